# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Watermark removal attacks on legal placements.

Every attack perturbs a watermarked placement and then restores legality with
legalization and detailed placement under the design's own fences only, the
way an adversary without the certificate would. Outcomes are scored against
the certificate: an attack succeeds when the extraction rate falls below
`wer_min` while the wirelength stays within `pwlr_max` of the unwatermarked
placement.

  * `attack_sla` exchanges the locations of random cell pairs.
  * `attack_cpa` shifts random cells with room by one step along x or y.
  * `attack_oa` reruns detailed placement with twice the pass budget.
  * `attack_ara` rescores the layout with guessed region weights and shifts
    every cell with room inside the best scoring windows.

Example:
  >>> outcome = attacks.attack_sla(design, placement, cert, 0.005, seed=3)
  >>> outcome.wer, outcome.success
  (98.0, False)
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections
import csv
import io

from absl import logging
from jax import random
import numpy as onp

from placemarks import dw
from placemarks import gw
from placemarks import icmarks
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import batch
from placemarks.utils import errors
from placemarks.utils import geometry
from placemarks.utils import utils

SLA = 'sla'
CPA = 'cpa'
OA = 'oa'
ARA = 'ara'
ATTACKS = (SLA, CPA, OA, ARA)

WER_MIN = 90.
PWLR_MAX = 1.005

OUTCOME_COLUMNS = ('scheme', 'attack', 'param', 'seed', 'pwlr', 'wer_gw',
                   'wer_dw', 'wer', 'success')


class AttackOutcome(
    collections.namedtuple('AttackOutcome', [
        'placement', 'pwlr', 'wer_gw', 'wer_dw', 'wer', 'scheme', 'attack',
        'param', 'seed', 'wer_min', 'pwlr_max'
    ])):
  """Result of one attack trial.

  Attributes:
    placement: the attacked, legal `Placement`.
    pwlr: HPWL ratio against the unwatermarked placement.
    wer_gw: region extraction rate, or `None` if the scheme has none.
    wer_dw: displacement extraction rate, or `None`.
    wer: overall extraction rate.
    scheme: scheme of the attacked certificate.
    attack: one of `ATTACKS`.
    param: the fraction, pass budget or `top_k` of the attack.
    seed: seed of the attack.
    wer_min: extraction rate below which the watermark counts as removed.
    pwlr_max: largest wirelength ratio an attacker accepts.
  """

  @property
  def success(self):
    return self.wer < self.wer_min and self.pwlr <= self.pwlr_max

  def to_row(self):
    row = {
        'scheme': self.scheme,
        'attack': self.attack,
        'param': '' if self.param is None else self.param,
        'seed': self.seed,
        'success': int(self.success),
    }
    for key in ('pwlr', 'wer_gw', 'wer_dw', 'wer'):
      value = getattr(self, key)
      row[key] = '' if value is None else '{:.6f}'.format(value)
    return row


Trial = collections.namedtuple('Trial', ['attack', 'param', 'seed'])


def _check_fraction(fraction, hi):
  if not 0. < fraction <= hi:
    raise errors.InvalidParams('fraction must lie in (0, {}], got {}'.format(
        hi, fraction))


def _fences(design):
  return placer.RegionConstraintSet.for_design(design)


def _restore(design, placement, place_params):
  constraints = _fences(design)
  p_legal = placer.legalize(design, placement, constraints)
  return placer.detailed_place(design, p_legal, constraints, place_params)


def _outcome(design, attacked, cert, attack, param, seed, wer_min, pwlr_max):
  extraction = icmarks.extract_certificate(design, attacked, cert)
  ratio = metrics.pwlr(metrics.hpwl(design, attacked), cert.baseline_hpwl)
  outcome = AttackOutcome(attacked, ratio, extraction.wer_gw,
                          extraction.wer_dw, extraction.wer, cert.scheme,
                          attack, param, seed, wer_min, pwlr_max)
  logging.info('%s(%s) on %s: wer %.2f, pwlr %.5f, success %s.', attack,
               param, cert.scheme, outcome.wer, ratio, outcome.success)
  return outcome


def _single_row(design):
  return onp.flatnonzero(design.movable_mask &
                         (design.heights == design.row_height))


def swap_locations(design, placement, fraction, seed):
  """Exchanges the positions of disjoint random pairs of single-row cells.

  `floor(fraction * movable)` cells take part, so an odd count leaves one
  cell out.

  Returns:
    `(placement, n_pairs)`; the placement is generally not legal.
  """
  single = _single_row(design)
  n_pairs = min(int(fraction * int(design.movable_mask.sum())) // 2,
                len(single) // 2)
  order = single[utils.permutation(utils.prng_key(seed), len(single))]
  a, b = order[:n_pairs], order[n_pairs:2 * n_pairs]
  xs, ys = placement.xs.copy(), placement.ys.copy()
  xs[a], xs[b] = placement.xs[b], placement.xs[a]
  ys[a], ys[b] = placement.ys[b], placement.ys[a]
  return placement.moved(netlist.GLOBAL, xs, ys), n_pairs


def _shift_pool(candidates):
  return ([(c, 'x', m) for c, m in zip(candidates.x_cells,
                                       candidates.x_moves)] +
          [(c, 'y', m) for c, m in zip(candidates.y_cells,
                                       candidates.y_moves)])


def _try_shift(occupancy, c, axis, move):
  x, y = int(occupancy.xs[c]), int(occupancy.ys[c])
  if axis == 'x':
    x += move
  else:
    y += move
  if occupancy.fits(c, x, y):
    occupancy.move(c, x, y)
    return True
  return False


def perturb_cells(design, placement, fraction, seed, d_x=1, d_y=None):
  """Shifts a random `fraction` of the movable cells that have room.

  Candidates are drawn from both shift pools in one seeded order; a cell
  moves at most once and every move is re-checked against earlier ones.

  Returns:
    `(placement, n_moved)` with a legal placement.
  """
  params = dw.DwParams(d_x, d_y).resolve(design)
  constraints = _fences(design)
  candidates = dw.select_candidates(design, placement, params.d_x,
                                    params.d_y, constraints)
  pool = _shift_pool(candidates)
  budget = int(fraction * int(design.movable_mask.sum()))
  occupancy = placer.RowOccupancy(design, placement, constraints)
  moved = set()
  for i in utils.permutation(utils.prng_key(seed), len(pool)):
    if len(moved) >= budget:
      break
    c, axis, move = pool[i]
    if c not in moved and _try_shift(occupancy, c, axis, move):
      moved.add(c)
  return occupancy.placement(netlist.LEGALIZED), len(moved)


def top_windows(design, placement, params, top_k, weights=None):
  """The `top_k` lowest scoring valid windows as `Rect`s, best first."""
  params = params.resolve(design)
  sweep = gw.sweep_windows(design, placement, params, weights)
  valid = onp.flatnonzero(sweep.valid)
  order = valid[onp.lexsort((sweep.xs[valid], sweep.ys[valid],
                             sweep.normalized[valid]))][:top_k]
  return [geometry.Rect(int(sweep.xs[i]), int(sweep.ys[i]),
                        int(sweep.xs[i]) + params.window_w,
                        int(sweep.ys[i]) + params.window_h) for i in order]


def shift_windows(design, placement, windows, seed, d_x=1, d_y=None):
  """Shifts every cell with room inside each of `windows`.

  A cell that can move along both axes picks one by a seeded coin.

  Returns:
    `(placement, n_moved)` with a legal placement.
  """
  params = dw.DwParams(d_x, d_y).resolve(design)
  constraints = _fences(design)
  occupancy = placer.RowOccupancy(design, placement, constraints)
  key = utils.prng_key(seed)
  moved = set()
  for k, window in enumerate(windows):
    current = occupancy.placement(netlist.LEGALIZED)
    inside = gw.members(design, current, window)
    candidates = dw.select_candidates(design, current, params.d_x,
                                      params.d_y, constraints,
                                      restrict_to=inside)
    options = collections.OrderedDict()
    for c, axis, move in _shift_pool(candidates):
      options.setdefault(c, []).append((axis, move))
    coins = onp.asarray(
        random.bernoulli(random.fold_in(key, k), 0.5, (len(options),)))
    for coin, (c, choices) in zip(coins, options.items()):
      if c in moved:
        continue
      if len(choices) > 1 and coin:
        choices = choices[::-1]
      for axis, move in choices:
        if _try_shift(occupancy, c, axis, move):
          moved.add(c)
          break
  return occupancy.placement(netlist.LEGALIZED), len(moved)


def attack_sla(design, placement, cert, fraction, seed=0, place_params=None,
               wer_min=WER_MIN, pwlr_max=PWLR_MAX):
  """Swap location attack on `fraction` of the movable cells."""
  _check_fraction(fraction, 0.5)
  swapped, n_pairs = swap_locations(design, placement, fraction, seed)
  attacked = (_restore(design, swapped, place_params) if n_pairs else
              placement)
  return _outcome(design, attacked, cert, SLA, fraction, seed, wer_min,
                  pwlr_max)


def attack_cpa(design, placement, cert, fraction, seed=0, d_x=1, d_y=None,
               place_params=None, wer_min=WER_MIN, pwlr_max=PWLR_MAX):
  """Constraint perturbation attack on `fraction` of the movable cells."""
  _check_fraction(fraction, 1.)
  shifted, n_moved = perturb_cells(design, placement, fraction, seed, d_x,
                                   d_y)
  attacked = (_restore(design, shifted, place_params) if n_moved else
              placement)
  return _outcome(design, attacked, cert, CPA, fraction, seed, wer_min,
                  pwlr_max)


def attack_oa(design, placement, cert, place_params=None, wer_min=WER_MIN,
              pwlr_max=PWLR_MAX):
  """Optimization attack: detailed placement with a doubled pass budget."""
  params = place_params or placer.PlaceParams()
  params = params._replace(detail_passes=2 * params.detail_passes)
  attacked = placer.detailed_place(design, placement, _fences(design), params)
  return _outcome(design, attacked, cert, OA, params.detail_passes, None,
                  wer_min, pwlr_max)


def attack_ara(design, placement, cert, gw_params=None, top_k=1, seed=0,
               weights=None, d_x=1, d_y=None, place_params=None,
               wer_min=WER_MIN, pwlr_max=PWLR_MAX):
  """Adaptive region attack.

  Args:
    design: the watermarked `Design`.
    placement: the watermarked `Placement`.
    cert: the owner's `Certificate`, used only for scoring.
    gw_params: the adversary's window `GwParams`; defaults with
      `n_signature_bits` set to the signature length.
    top_k: number of best windows to perturb.
    seed: seed of the axis choices.
    weights: optional `(alpha, beta, gamma)` guess overriding `gw_params`.
    d_x: horizontal shift.
    d_y: vertical shift.
    place_params: `PlaceParams` of the restoring detailed placement.
    wer_min: removal threshold.
    pwlr_max: wirelength threshold.

  Returns:
    An `AttackOutcome`.
  """
  if top_k < 1:
    raise errors.InvalidParams('top_k must be positive, got {}'.format(top_k))
  gw_params = gw_params or gw.GwParams(n_signature_bits=len(cert.signature))
  windows = top_windows(design, placement, gw_params, top_k, weights)
  shifted, n_moved = shift_windows(design, placement, windows, seed, d_x, d_y)
  attacked = (_restore(design, shifted, place_params) if n_moved else
              placement)
  return _outcome(design, attacked, cert, ARA, top_k, seed, wer_min,
                  pwlr_max)


def run_attack(design, placement, cert, trial, gw_params=None, weights=None,
               place_params=None, wer_min=WER_MIN, pwlr_max=PWLR_MAX):
  """Runs the attack described by a `Trial`."""
  thresholds = dict(wer_min=wer_min, pwlr_max=pwlr_max)
  if trial.attack == SLA:
    return attack_sla(design, placement, cert, trial.param, trial.seed,
                      place_params, **thresholds)
  if trial.attack == CPA:
    return attack_cpa(design, placement, cert, trial.param, trial.seed,
                      place_params=place_params, **thresholds)
  if trial.attack == OA:
    return attack_oa(design, placement, cert, place_params, **thresholds)
  if trial.attack == ARA:
    return attack_ara(design, placement, cert, gw_params, int(trial.param),
                      trial.seed, weights, place_params=place_params,
                      **thresholds)
  raise ValueError('Unknown attack {!r}; expected one of {}.'.format(
      trial.attack, ATTACKS))


def run_trials(design, placement, cert, trials, workers=1, **kwargs):
  """Runs independent trials, possibly concurrently, in input order.

  Keyword arguments are forwarded to `run_attack`.
  """
  trial_fn = batch.batch(
      lambda trial: run_attack(design, placement, cert, trial, **kwargs),
      workers)
  return trial_fn(list(trials))


def write_outcomes(path, outcomes, append=False):
  """Writes `AttackOutcome`s as CSV with a header row."""
  with io.open(path, 'a' if append else 'w', newline='',
               encoding='utf-8') as f:
    writer = csv.DictWriter(f, fieldnames=OUTCOME_COLUMNS)
    if not append or f.tell() == 0:
      writer.writeheader()
    for outcome in outcomes:
      writer.writerow(outcome.to_row())


def read_outcomes(path):
  """Reads outcome rows written by `write_outcomes` as dicts of strings."""
  with io.open(path, newline='', encoding='utf-8') as f:
    reader = csv.DictReader(f)
    if reader.fieldnames is None or tuple(
        reader.fieldnames) != OUTCOME_COLUMNS:
      raise errors.CorruptDocument('{} is not an attack outcome table'.format(
          path))
    return list(reader)


SUMMARY_COLUMNS = ('scheme', 'attack', 'param', 'trials', 'mean_wer',
                   'min_wer', 'mean_pwlr', 'successes')


def summarize_outcomes(rows):
  """Aggregates outcome rows per `(scheme, attack, param)`.

  Returns:
    A list of dicts keyed by `SUMMARY_COLUMNS`, sorted by the group key.
  """
  groups = collections.defaultdict(list)
  for row in rows:
    groups[(row['scheme'], row['attack'], row['param'])].append(row)
  summary = []
  for (scheme, attack, param), group in sorted(groups.items()):
    wers = [float(r['wer']) for r in group]
    ratios = [float(r['pwlr']) for r in group]
    summary.append({
        'scheme': scheme,
        'attack': attack,
        'param': param,
        'trials': len(group),
        'mean_wer': '{:.6f}'.format(sum(wers) / len(wers)),
        'min_wer': '{:.6f}'.format(min(wers)),
        'mean_pwlr': '{:.6f}'.format(sum(ratios) / len(ratios)),
        'successes': sum(int(r['success']) for r in group),
    })
  return summary

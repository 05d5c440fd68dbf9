# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Global watermarking: region selection, insertion and extraction.

A window of the original placement is scored with

  f = alpha * N_w / N_c + beta * S_cell / S + gamma * S_overlap / S

where `N_c` counts the movable cells fully inside the window, `S_cell` is
their area, `S` the window area and `S_overlap` the in-window area of cells
crossing its boundary. Windows touching a fixed cell or a fence region, or
holding fewer than `N_w` cells, get the sentinel score 1.0. Scores of a sweep
are min-max normalized and the lowest scoring window becomes the watermark
region `R_w`; the cells fully inside it form `C_w1`.

Insertion re-runs placement with `(R_w, C_w1)` as an exclusive region
constraint, then signs off with a detailed pass that ignores the region and
re-records `C_w1` from the result. Extraction counts members and foreigners
whose centers lie in `R_w`.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections

from absl import logging
from jax import jit
from jax import vmap
import jax.numpy as np
import numpy as onp

from placemarks import metrics
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils import geometry

SENTINEL = 1.0
WEIGHT_GRID = (0., 0.1, 0.5)
_WINDOW_ROWS = 10
SIGN_OFF_PASSES = 20


class GwParams(
    collections.namedtuple('GwParams', [
        'window_w', 'window_h', 'stride', 'alpha', 'beta', 'gamma',
        'n_signature_bits'
    ])):
  """Window sweep and scoring parameters.

  Attributes:
    window_w: window width; `None` for ten row heights.
    window_h: window height; `None` for ten row heights.
    stride: sweep step along both axes; `None` for the window size, so windows
      tile the die.
    alpha: weight of the `N_w / N_c` term.
    beta: weight of the cell area term.
    gamma: weight of the boundary overlap term.
    n_signature_bits: `N_w`, the minimum number of cells in a valid window.
  """

  def __new__(cls, window_w=None, window_h=None, stride=None, alpha=0.1,
              beta=0.1, gamma=1.0, n_signature_bits=50):
    if n_signature_bits < 1:
      raise errors.InvalidParams(
          'n_signature_bits must be positive, got {}'.format(n_signature_bits))
    for name, value in (('alpha', alpha), ('beta', beta), ('gamma', gamma)):
      if not 0. <= value <= 1.:
        raise errors.InvalidParams('{} must lie in [0, 1], got {}'.format(
            name, value))
    strides = stride if isinstance(stride, (tuple, list)) else (stride,)
    for name, value in ([('window_w', window_w), ('window_h', window_h)] +
                        [('stride', s) for s in strides]):
      if value is not None and value < 1:
        raise errors.InvalidParams('{} must be positive, got {}'.format(
            name, value))
    if isinstance(stride, list):
      stride = tuple(stride)
    return super(GwParams, cls).__new__(cls, window_w, window_h, stride,
                                        alpha, beta, gamma, n_signature_bits)

  def resolve(self, design):
    """Fills in window defaults for `design` and checks the window fits."""
    side = _WINDOW_ROWS * design.row_height
    w = side if self.window_w is None else int(self.window_w)
    h = side if self.window_h is None else int(self.window_h)
    if w > design.die.width or h > design.die.height:
      raise errors.InvalidParams('window {}x{} does not fit in die {}'.format(
          w, h, design.die))
    stride = self.stride
    if stride is None:
      stride = (w, h)
    elif not isinstance(stride, (tuple, list)):
      stride = (int(stride), int(stride))
    return self._replace(window_w=w, window_h=h, stride=tuple(stride))

  @property
  def weights(self):
    return (self.alpha, self.beta, self.gamma)


class GwWatermark(
    collections.namedtuple('GwWatermark',
                           ['region', 'cells', 'score', 'weights', 'window'])):
  """A selected watermark region.

  Attributes:
    region: `Rect` `R_w`.
    cells: sorted tuple of member cell ids `C_w1`.
    score: raw score of the region.
    weights: `(alpha, beta, gamma)` used for selection.
    window: `(window_w, window_h, stride_x, stride_y)` of the sweep.
  """

  def to_dict(self):
    return {
        'region': list(self.region),
        'cells': list(self.cells),
        'score': self.score,
        'weights': list(self.weights),
        'window': list(self.window),
    }

  @classmethod
  def from_dict(cls, d):
    return cls(
        geometry.Rect(*d['region']), tuple(int(c) for c in d['cells']),
        float(d['score']), tuple(float(w) for w in d['weights']),
        tuple(int(w) for w in d['window']))


SweepResult = collections.namedtuple(
    'SweepResult', ['xs', 'ys', 'raw', 'normalized', 'valid', 'counts'])
"""Scores of every window of a sweep, indexed by window.

Attributes:
  xs: lower-left x of every window.
  ys: lower-left y of every window.
  raw: raw scores; meaningful only where `valid`.
  normalized: min-max normalized scores with invalid windows at 1.0.
  valid: boolean mask of non-sentinel windows.
  counts: `N_c` of every window.
"""

RegionRank = collections.namedtuple(
    'RegionRank', ['rank', 'total', 'score', 'weights', 'out_of_range'])


@jit
def _score_windows(wx, wy, ww, wh, cx, cy, cw, ch, weights, n_bits):
  """Raw scores and cell counts of windows with lower-left `(wx, wy)`."""

  def score_one(x0, y0):
    x1, y1 = x0 + ww, y0 + wh
    inside = (cx >= x0) & (cx + cw <= x1) & (cy >= y0) & (cy + ch <= y1)
    ox = np.clip(np.minimum(cx + cw, x1) - np.maximum(cx, x0), 0., None)
    oy = np.clip(np.minimum(cy + ch, y1) - np.maximum(cy, y0), 0., None)
    n_c = np.sum(inside)
    s_cell = np.sum(np.where(inside, cw * ch, 0.))
    s_overlap = np.sum(np.where(inside, 0., ox * oy))
    area = ww * wh
    raw = (weights[0] * n_bits / np.maximum(n_c, 1) +
           weights[1] * s_cell / area + weights[2] * s_overlap / area)
    return raw, n_c

  return vmap(score_one)(wx, wy)


def _blocked(design, wx, wy, ww, wh):
  """Windows intersecting a fixed cell footprint or a fence rectangle."""
  rects = [
      geometry.cell_rect(design.init_xs[i], design.init_ys[i],
                         design.widths[i], design.heights[i])
      for i in onp.flatnonzero(design.fixed_mask)
  ]
  rects.extend(r for f in design.fence_regions for r in f.rects)
  mask = onp.zeros(wx.shape, bool)
  for r in rects:
    mask |= ((wx < r.x_hi) & (r.x_lo < wx + ww) & (wy < r.y_hi) &
             (r.y_lo < wy + wh))
  return mask


def _score(design, placement, wx, wy, ww, wh, weights, n_bits):
  movable = design.movable_mask
  f32 = lambda v: np.asarray(onp.asarray(v, onp.float32))
  raw, counts = _score_windows(
      f32(wx), f32(wy), f32(ww), f32(wh), f32(placement.xs[movable]),
      f32(placement.ys[movable]), f32(design.widths[movable]),
      f32(design.heights[movable]), f32(weights), f32(n_bits))
  counts = onp.asarray(counts, onp.int64)
  valid = ~_blocked(design, wx, wy, ww, wh) & (counts >= n_bits)
  return onp.asarray(raw, onp.float64), counts, valid


def score_window(design, placement, window, params):
  """Raw score of one window, or `SENTINEL` for an invalid window.

  Example:
    >>> gw.score_window(design, placement, Rect(0, 0, 40, 40), params)
    0.18
  """
  die = design.die
  if not die.contains_rect(window):
    raise ValueError('Window {} is not inside die {}.'.format(window, die))
  raw, _, valid = _score(design, placement, onp.array([window.x_lo]),
                         onp.array([window.y_lo]), window.width,
                         window.height, params.weights,
                         params.n_signature_bits)
  return float(raw[0]) if valid[0] else SENTINEL


def _normalize(raw, valid):
  out = onp.full(raw.shape, SENTINEL)
  if valid.any():
    lo, hi = raw[valid].min(), raw[valid].max()
    out[valid] = (raw[valid] - lo) / (hi - lo) if hi > lo else 0.
  return out


def sweep_windows(design, placement, params, weights=None):
  """Scores every window of a sweep over the die.

  Args:
    design: a `Design`.
    placement: a `Placement` of `design`.
    params: `GwParams`.
    weights: optional `(alpha, beta, gamma)` overriding `params.weights`,
      possibly outside `[0, 1]`.

  Returns:
    A `SweepResult`.
  """
  params = params.resolve(design)
  die = design.die
  w, h = params.window_w, params.window_h
  sx, sy = params.stride
  grid_x = onp.arange(die.x_lo, die.x_hi - w + 1, sx, dtype=onp.int64)
  grid_y = onp.arange(die.y_lo, die.y_hi - h + 1, sy, dtype=onp.int64)
  wy, wx = [a.reshape((-1,)) for a in onp.meshgrid(grid_y, grid_x,
                                                   indexing='ij')]
  raw, counts, valid = _score(design, placement, wx, wy, w, h,
                              weights or params.weights,
                              params.n_signature_bits)
  return SweepResult(wx, wy, raw, _normalize(raw, valid), valid, counts)


def members(design, placement, region):
  """Movable cells lying entirely inside `region`."""
  movable = design.movable_mask
  inside = ((placement.xs >= region.x_lo) &
            (placement.xs + design.widths <= region.x_hi) &
            (placement.ys >= region.y_lo) &
            (placement.ys + design.heights <= region.y_hi))
  return tuple(int(c) for c in onp.flatnonzero(inside & movable))


def select_region(design, placement, params):
  """Chooses the lowest scoring window of `placement` as `R_w`.

  Ties are broken by lowest y, then lowest x.

  Raises:
    NoValidWindow: if every window is a sentinel.
  """
  params = params.resolve(design)
  sweep = sweep_windows(design, placement, params)
  if not sweep.valid.any():
    raise errors.NoValidWindow(
        'no window holds {} cells outside macros and fences'.format(
            params.n_signature_bits))
  best = onp.lexsort((sweep.xs, sweep.ys, sweep.normalized))[0]
  x, y = int(sweep.xs[best]), int(sweep.ys[best])
  region = geometry.Rect(x, y, x + params.window_w, y + params.window_h)
  cells = members(design, placement, region)
  logging.info('Selected watermark region %s with %d cells (score %.4f).',
               region, len(cells), sweep.raw[best])
  return GwWatermark(region, cells, float(sweep.raw[best]), params.weights,
                     (params.window_w, params.window_h) + params.stride)


def insert_gw(design, params, place_params=None, constraints=None,
              original=None):
  """Selects a region on the original placement and places with it.

  Args:
    design: a `Design`.
    params: `GwParams`.
    place_params: `PlaceParams` shared by the original and watermarked runs.
    constraints: base `RegionConstraintSet`; the design's fences by default.
    original: optional detailed original placement, to skip recomputing it.

  Returns:
    `(placement, watermark)` with the detailed watermarked placement.
  """
  place_params = place_params or placer.PlaceParams()
  constraints = constraints or placer.RegionConstraintSet.for_design(design)
  if original is None:
    original = placer.run_pipeline(design, constraints, place_params)[-1]
  wm = select_region(design, original, params)
  marked = constraints.with_watermark(wm.region, wm.cells)
  marked.validate(design)
  _, _, placement = placer.run_pipeline(design, marked, place_params)
  return sign_off(design, placement, wm, constraints, place_params,
                  params.n_signature_bits)


def _centered_in(design, placement, region):
  cx2 = 2 * placement.xs + design.widths
  cy2 = 2 * placement.ys + design.heights
  return ((2 * region.x_lo <= cx2) & (cx2 < 2 * region.x_hi) &
          (2 * region.y_lo <= cy2) & (cy2 < 2 * region.y_hi) &
          design.movable_mask)


def sign_off(design, placement, wm, constraints, place_params, min_cells):
  """Final refinement without the region, then re-records the members.

  Runs detailed placement under `constraints` alone, with `SIGN_OFF_PASSES`
  times the pass budget, so the result is normally a placement no further
  detailed pass changes. The cells whose centers end up in `wm.region`
  become the members, so region exclusivity holds for the returned pair.

  Returns:
    `(placement, watermark)`. The inputs come back unchanged when fewer
    than `min_cells` cells would remain in the region.
  """
  params = place_params._replace(
      detail_passes=SIGN_OFF_PASSES * place_params.detail_passes)
  settled = placer.detailed_place(design, placement, constraints, params)
  cells = tuple(
      int(c) for c in onp.flatnonzero(_centered_in(design, settled,
                                                   wm.region)))
  if len(cells) < min_cells:
    logging.warning('Sign-off leaves %d cells in %s, fewer than %d; keeping '
                    'the constrained placement.', len(cells), wm.region,
                    min_cells)
    return placement, wm
  logging.info('Sign-off kept %d of %d members and admitted %d cells.',
               len(set(cells) & set(wm.cells)), len(wm.cells),
               len(set(cells) - set(wm.cells)))
  return settled, wm._replace(cells=cells)


def extract_gw(design, placement, wm):
  """Percentage of the region evidence recovered from `placement`.

  Members and foreign cells are counted by center; every foreign cell
  cancels one member.
  """
  if not wm.cells:
    return 0.
  inside = _centered_in(design, placement, wm.region)
  kept = int(inside[list(wm.cells)].sum())
  foreign = int(inside.sum()) - kept
  return min(100., 100. * max(0, kept - foreign) / len(wm.cells))


def rank_region(design, placement, wm, weights, n_signature_bits=None):
  """Rank of `wm.region` among all windows rescored with `weights`.

  Models an adversary who rescores a watermarked layout with their own
  weights. Weights outside `[0, 1]` are accepted and flagged.

  Returns:
    A `RegionRank`; rank 1 is the window an adversary would pick first.
  """
  weights = tuple(float(w) for w in weights)
  out_of_range = any(not 0. <= w <= 1. for w in weights)
  if out_of_range:
    logging.warning('Ranking with weights %s outside [0, 1].', weights)
  w, h, sx, sy = wm.window
  params = GwParams(w, h, (sx, sy),
                    n_signature_bits=n_signature_bits or len(wm.cells))
  sweep = sweep_windows(design, placement, params, weights=weights)
  raw, counts, valid = _score(design, placement,
                              onp.array([wm.region.x_lo]),
                              onp.array([wm.region.y_lo]), w, h, weights,
                              params.n_signature_bits)
  target = ((0, raw[0]) if valid[0] else (1, 0.)) + (wm.region.y_lo,
                                                     wm.region.x_lo)
  keys = [((0, s) if v else (1, 0.)) + (int(y), int(x))
          for s, v, x, y in zip(sweep.raw, sweep.valid, sweep.xs, sweep.ys)]
  ahead = sum(1 for k in keys if k < target)
  total = len(keys) + (0 if target in keys else 1)
  return RegionRank(ahead + 1, total, float(raw[0]) if valid[0] else SENTINEL,
                    weights, out_of_range)


WeightSearch = collections.namedtuple(
    'WeightSearch', ['params', 'placement', 'watermark', 'pwlr'])


def search_weights(design, params, place_params=None, pwlr_max=1.005,
                   grid=WEIGHT_GRID):
  """Retries insertion over an `(alpha, beta)` grid until PWLR is acceptable.

  The given weights are tried first. Returns the first setting within
  `pwlr_max`, or the lowest PWLR seen.

  Returns:
    A `WeightSearch`.
  """
  place_params = place_params or placer.PlaceParams()
  constraints = placer.RegionConstraintSet.for_design(design)
  original = placer.run_pipeline(design, constraints, place_params)[-1]
  baseline = metrics.hpwl(design, original)
  settings = [(params.alpha, params.beta)]
  settings.extend((a, b) for a in grid for b in grid
                  if (a, b) != (params.alpha, params.beta))
  best = None
  for alpha, beta in settings:
    trial = params._replace(alpha=alpha, beta=beta)
    try:
      placement, wm = insert_gw(design, trial, place_params, constraints,
                                original)
    except errors.RegionInfeasible as e:
      logging.info('Weights alpha=%s beta=%s infeasible: %s', alpha, beta, e)
      continue
    ratio = metrics.pwlr(metrics.hpwl(design, placement), baseline)
    logging.info('Weights alpha=%s beta=%s: pwlr %.5f.', alpha, beta, ratio)
    if best is None or ratio < best.pwlr:
      best = WeightSearch(trial, placement, wm, ratio)
    if ratio <= pwlr_max:
      break
  if best is None:
    raise errors.NoValidWindow('no weight setting produced a feasible region')
  return best

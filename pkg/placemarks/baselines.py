# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Reference watermarking schemes used for comparison.

* Row parity moves a seeded choice of cells onto odd rows for 1-bits and even
  rows for 0-bits during legalization.
* Cell scattering shifts cells of the final placement, along y for 1-bits
  and along x for 0-bits, with no compensation afterwards.
* Buffer insertion splits non-critical nets with a chain of one buffer for a
  1-bit or two buffers for a 0-bit; the netlist change is the evidence.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections

from absl import logging
import numpy as onp

from placemarks import dw
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils import utils

ROW_PARITY = 'row_parity'
CELL_SCATTERING = 'cell_scattering'
BUFFER_INSERTION = 'buffer_insertion'

BUFFER_PREFIX = 'wmbuf'
DEFAULT_MARGIN = 0.1


class BaselineWatermark(
    collections.namedtuple('BaselineWatermark',
                           ['scheme', 'cells', 'evidence'])):
  """Evidence of a reference scheme.

  Attributes:
    scheme: `ROW_PARITY`, `CELL_SCATTERING` or `BUFFER_INSERTION`.
    cells: watermarked cell ids in bit order; the re-driven sinks for buffer
      insertion.
    evidence: one entry per bit. Row parity stores the required parity, cell
      scattering `(ref_x, ref_y, dx, dy)` and buffer insertion
      `(sink_name, buffer_names)`.
  """

  def to_dict(self):
    if self.scheme == BUFFER_INSERTION:
      evidence = [[sink, list(names)] for sink, names in self.evidence]
    elif self.scheme == CELL_SCATTERING:
      evidence = [list(e) for e in self.evidence]
    else:
      evidence = list(self.evidence)
    return {'scheme': self.scheme, 'cells': list(self.cells),
            'evidence': evidence}

  @classmethod
  def from_dict(cls, d):
    scheme = d['scheme']
    if scheme == BUFFER_INSERTION:
      evidence = tuple(
          (sink, tuple(names)) for sink, names in d['evidence'])
    elif scheme == CELL_SCATTERING:
      evidence = tuple(tuple(int(v) for v in e) for e in d['evidence'])
    elif scheme == ROW_PARITY:
      evidence = tuple(int(e) for e in d['evidence'])
    else:
      raise ValueError('Unknown baseline scheme {!r}.'.format(scheme))
    return cls(scheme, tuple(int(c) for c in d['cells']), evidence)


def _row_parity(design, y):
  return int(netlist.row_index(design, y)) % 2


def _relocate_to_parity(occupancy, c, parity):
  """Nearest free slot on a row of `parity`, fewest rows away first.

  Rows at the same distance are compared by horizontal displacement, the
  lower row winning ties.
  """
  design = occupancy.design
  y = int(occupancy.ys[c])
  x = int(occupancy.xs[c])
  by_distance = collections.defaultdict(list)
  for level, level_y in enumerate(occupancy.levels):
    if _row_parity(design, level_y) == parity:
      by_distance[abs(level_y - y)].append(level)
  for distance in sorted(by_distance):
    best = None
    for level in sorted(by_distance[distance]):
      tx = occupancy.nearest_free_x(c, level, x)
      if tx is not None and (best is None or abs(tx - x) < best[0]):
        best = (abs(tx - x), tx, occupancy.levels[level])
    if best is not None:
      return best[1], best[2]
  return None


def row_parity_insert(design, placement, signature, seed, constraints=None,
                      place_params=None):
  """Moves seeded cells of a legalized placement onto rows of bit parity.

  Cells already on the right parity stay. Legalization and detailed placement
  follow; both keep cells on their rows.

  Returns:
    `(placement, watermark)`.

  Raises:
    InsufficientCandidates: if the cells run out before every bit found a
      landing slot.
  """
  bits = tuple(int(b) for b in signature)
  constraints = constraints or placer.RegionConstraintSet.for_design(design)
  occupancy = placer.RowOccupancy(design, placement, constraints)
  single = onp.flatnonzero(design.movable_mask &
                           (design.heights == design.row_height))
  order = single[utils.permutation(utils.prng_key(seed), len(single))]
  cursor = 0
  cells = []
  for bit in bits:
    while True:
      if cursor >= len(order):
        raise errors.InsufficientCandidates('row', len(bits), len(cells))
      c = int(order[cursor])
      cursor += 1
      if occupancy.level(occupancy.ys[c]) is None:
        continue
      if _row_parity(design, occupancy.ys[c]) == bit:
        cells.append(c)
        break
      target = _relocate_to_parity(occupancy, c, bit)
      if target is not None:
        occupancy.move(c, *target)
        cells.append(c)
        break

  moved = occupancy.placement(netlist.LEGALIZED)
  p_legal = placer.legalize(design, moved, constraints)
  p_detailed = placer.detailed_place(design, p_legal, constraints,
                                     place_params)
  return p_detailed, BaselineWatermark(ROW_PARITY, tuple(cells), bits)


def row_parity_extract(design, placement, wm):
  matched = sum(
      1 for c, bit in zip(wm.cells, wm.evidence)
      if _row_parity(design, placement.ys[c]) == bit)
  return 100. * matched / len(wm.cells) if wm.cells else 0.


def cell_scattering_insert(design, placement, signature, seed, d_x=1,
                           d_y=None, constraints=None):
  """Shifts cells of a final placement: 1-bits along y, 0-bits along x.

  Returns:
    `(placement, watermark)`; the placement is not re-optimized.

  Raises:
    InsufficientCandidates: if a candidate pool is too small.
  """
  bits = tuple(int(b) for b in signature)
  params = dw.DwParams(d_x, d_y).resolve(design)
  constraints = constraints or placer.RegionConstraintSet.for_design(design)
  candidates = dw.select_candidates(design, placement, params.d_x,
                                    params.d_y, constraints)
  occupancy, cells = dw.apply_shifts(design, placement, bits, candidates,
                                     seed, constraints, x_bit=0)
  evidence = tuple(
      (int(placement.xs[c]), int(placement.ys[c]),
       int(occupancy.xs[c] - placement.xs[c]),
       int(occupancy.ys[c] - placement.ys[c])) for c in cells)
  return (occupancy.placement(netlist.DETAILED),
          BaselineWatermark(CELL_SCATTERING, tuple(cells), evidence))


def cell_scattering_extract(design, placement, wm):
  del design
  matched = sum(
      1 for c, (ref_x, ref_y, dx, dy) in zip(wm.cells, wm.evidence)
      if placement.xs[c] - ref_x == dx and placement.ys[c] - ref_y == dy)
  return 100. * matched / len(wm.cells) if wm.cells else 0.


def _buffer_site(occupancy, x, y, tag):
  """Reserves the free unit slot nearest to `(x, y)` in the default class."""
  best = None
  for level, level_y in enumerate(occupancy.levels):
    dy = abs(level_y - y)
    if best is not None and dy * dy > best[0]:
      continue
    tx = occupancy.nearest_slot(level, x, 1, placer.DEFAULT_LABEL)
    if tx is None:
      continue
    cost = (tx - x)**2 + dy * dy
    if best is None or cost < best[0]:
      best = (cost, tx, level)
  if best is None:
    return None
  _, tx, level = best
  occupancy.reserve(level, tx, tx + 1, tag)
  return tx, occupancy.levels[level]


def buffer_insertion_insert(design, placement, signature, seed,
                            delay_model=None, margin=DEFAULT_MARGIN,
                            place_params=None):
  """Splits seeded non-critical nets with buffer chains.

  A net qualifies when it is not a timing endpoint and its slack is at least
  `margin` times the largest required arrival time. The last sink of each
  chosen net is re-driven through one buffer for a 1-bit or two buffers for a
  0-bit, each placed on the free site nearest to that sink.

  Returns:
    `(design, placement, watermark)` with the modified netlist.

  Raises:
    NoTimingMargin: if no net qualifies.
    InsufficientCandidates: if fewer nets qualify than there are bits.
  """
  bits = tuple(int(b) for b in signature)
  delay_model = delay_model or metrics.DelayModel()
  timing = metrics.timing_analyze(design, placement, delay_model)
  threshold = margin * delay_model.max_rat(
      onp.flatnonzero(design.net_endpoints).tolist())
  sizes = onp.diff(design.net_starts)
  eligible = onp.flatnonzero((timing.net_slacks >= threshold) & (sizes >= 2) &
                             ~design.net_endpoints)
  if not len(eligible):
    raise errors.NoTimingMargin(margin)
  if len(eligible) < len(bits):
    raise errors.InsufficientCandidates('net', len(bits), len(eligible))
  chosen = eligible[utils.permutation(utils.prng_key(seed),
                                      len(eligible))][:len(bits)]

  occupancy = placer.RowOccupancy(design, placement)
  cells = list(design.cells)
  nets = list(design.nets)
  xs, ys = placement.xs.tolist(), placement.ys.tolist()
  sinks, evidence = [], []
  for i, (bit, n) in enumerate(zip(bits, chosen)):
    net = nets[n]
    sink, sink_dx, sink_dy = net.pins[-1]
    chain = []
    for j in range(1 if bit else 2):
      site = _buffer_site(occupancy, xs[sink], ys[sink], -(len(cells) + 1))
      if site is None:
        raise errors.InsufficientCandidates('site', len(bits), i)
      name = '{}_{}_{}'.format(BUFFER_PREFIX, i, j)
      chain.append(len(cells))
      cells.append(
          netlist.Cell(len(cells), name, 1, design.row_height,
                       netlist.CellKind.BUFFER, -1, site[0], site[1]))
      xs.append(site[0])
      ys.append(site[1])
    nets[n] = net._replace(pins=net.pins[:-1] + ((chain[0], 0, 0),))
    for j, buffer_id in enumerate(chain):
      target = ((chain[j + 1], 0, 0) if j + 1 < len(chain) else
                (sink, sink_dx, sink_dy))
      nets.append(
          netlist.Net(len(nets), '{}_net_{}_{}'.format(BUFFER_PREFIX, i, j),
                      ((buffer_id, 0, 0), target), False))
    sinks.append(int(sink))
    evidence.append((design.cell_names[sink],
                     tuple(cells[b].name for b in chain)))

  marked = netlist.from_records(design.name, design.die, design.row_height,
                                design.rows, cells, nets,
                                design.fence_regions)
  constraints = placer.RegionConstraintSet.for_design(marked)
  p_legal = placer.legalize(
      marked, netlist.Placement(xs, ys, netlist.LEGALIZED), constraints)
  p_detailed = placer.detailed_place(marked, p_legal, constraints,
                                     place_params)
  logging.info('Inserted %d buffer chains into %s.', len(bits), design.name)
  return marked, p_detailed, BaselineWatermark(
      BUFFER_INSERTION, tuple(sinks), tuple(evidence))


def _chain_intact(design, index, drives, sink, names):
  ids = [index.get(name) for name in names]
  if any(i is None for i in ids):
    return False
  if sink not in index:
    return False
  hops = ids + [index[sink]]
  return all(hops[k + 1] in drives.get(hops[k], ()) for k in range(len(ids)))


def buffer_insertion_extract(design, wm):
  """Percentage of recorded buffer chains present with their exact length."""
  index = {name: i for i, name in enumerate(design.cell_names)}
  drives = collections.defaultdict(set)
  for n in range(design.n_nets):
    pins = design.net_pins(n)
    if pins:
      drives[pins[0][0]].update(c for c, _, _ in pins[1:])
  matched = sum(
      1 for sink, names in wm.evidence
      if _chain_intact(design, index, drives, sink, names))
  return 100. * matched / len(wm.evidence) if wm.evidence else 0.


def extract(design, placement, wm):
  """Extraction rate of any reference scheme."""
  if wm.scheme == ROW_PARITY:
    return row_parity_extract(design, placement, wm)
  if wm.scheme == CELL_SCATTERING:
    return cell_scattering_extract(design, placement, wm)
  if wm.scheme == BUFFER_INSERTION:
    return buffer_insertion_extract(design, wm)
  raise ValueError('Unknown baseline scheme {!r}.'.format(wm.scheme))

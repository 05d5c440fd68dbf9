# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Detailed watermarking: signature-driven cell shifts before detailed placement.

Cells of a legalized placement that can move by `d_x` along their row, or by
`d_y` to an adjacent row, without overlapping anything form two candidate
pools. A seeded shuffle of each pool is consumed in signature order: a 1-bit
shifts the next x-candidate, a 0-bit the next y-candidate. Detailed placement
then runs on the perturbed placement `P_itr`, and the watermark is the
per-cell displacement between `P_itr` and the final placement.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections

from absl import logging
from jax import random
import numpy as onp

from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils import utils


class DwParams(collections.namedtuple('DwParams', ['d_x', 'd_y'])):
  """Shift magnitudes.

  Attributes:
    d_x: horizontal shift in placement units.
    d_y: vertical shift, a positive multiple of the row height; `None` for
      one row height.
  """

  def __new__(cls, d_x=1, d_y=None):
    if d_x < 1:
      raise errors.InvalidParams('d_x must be positive, got {}'.format(d_x))
    if d_y is not None and d_y < 1:
      raise errors.InvalidParams('d_y must be positive, got {}'.format(d_y))
    return super(DwParams, cls).__new__(cls, int(d_x),
                                        None if d_y is None else int(d_y))

  def resolve(self, design):
    d_y = design.row_height if self.d_y is None else self.d_y
    if d_y % design.row_height:
      raise errors.InvalidParams(
          'd_y {} is not a multiple of the row height {}'.format(
              d_y, design.row_height))
    return self._replace(d_y=d_y)


class DwCandidates(
    collections.namedtuple('DwCandidates',
                           ['x_cells', 'x_moves', 'y_cells', 'y_moves'])):
  """Cells that can shift alone, in row-then-x scan order.

  Attributes:
    x_cells: tuple of cell ids that can shift horizontally.
    x_moves: signed horizontal displacement of every `x_cells` entry.
    y_cells: tuple of cell ids that can shift to an adjacent row.
    y_moves: signed vertical displacement of every `y_cells` entry.
  """


class DwWatermark(
    collections.namedtuple(
        'DwWatermark', ['cells', 'itr_xs', 'itr_ys', 'dist_xs', 'dist_ys'])):
  """Displacement evidence in signature order.

  Attributes:
    cells: watermarked cell ids `C_w2`, one per signature bit.
    itr_xs: x of every cell in the perturbed placement `P_itr`.
    itr_ys: y of every cell in `P_itr`.
    dist_xs: `P_itr - P_wm` along x.
    dist_ys: `P_itr - P_wm` along y.
  """

  def to_dict(self):
    return {k: [int(v) for v in getattr(self, k)] for k in self._fields}

  @classmethod
  def from_dict(cls, d):
    return cls(*[tuple(int(v) for v in d[k]) for k in cls._fields])


def _pick(room_pos, room_neg, step):
  """Signed shift towards more room, positive on ties, or `None`."""
  pos, neg = room_pos >= step, room_neg >= step
  if pos and (not neg or room_pos >= room_neg):
    return step
  if neg:
    return -step
  return None


def _x_move(occupancy, c, d_x):
  x, y = int(occupancy.xs[c]), int(occupancy.ys[c])
  w = int(occupancy.design.widths[c])
  span = occupancy.free_span(occupancy.level(y), x, x + w, ignore=c)
  if span is None:
    return None
  return _pick(span[1] - x - w, x - span[0], d_x)


def _y_room(occupancy, c, y):
  level = occupancy.level(y)
  if level is None:
    return -1
  x = int(occupancy.xs[c])
  w = int(occupancy.design.widths[c])
  span = occupancy.free_span(level, x, x + w, ignore=c)
  if span is None:
    return -1
  if occupancy.segment(level, x, x + w)[2] != occupancy.labels[c]:
    return -1
  return span[1] - span[0] - w


def _y_move(occupancy, c, d_y):
  y = int(occupancy.ys[c])
  up, down = _y_room(occupancy, c, y + d_y), _y_room(occupancy, c, y - d_y)
  if up < 0 and down < 0:
    return None
  return d_y if up >= down else -d_y


def select_candidates(design, placement, d_x=1, d_y=None, constraints=None,
                      restrict_to=None):
  """Scans a legal placement for cells that can shift without overlap.

  Only single-row movable cells qualify. A horizontal candidate keeps
  clearance to its row neighbours and segment ends; a vertical candidate has
  a free landing interval of its own region class in the row `d_y` above or
  below.

  Args:
    design: a `Design`.
    placement: a legal `Placement`.
    d_x: horizontal shift.
    d_y: vertical shift; one row height by default.
    constraints: `RegionConstraintSet` whose classes must be kept.
    restrict_to: optional collection of the only cells to consider.

  Returns:
    `DwCandidates`.
  """
  params = DwParams(d_x, d_y).resolve(design)
  occupancy = placer.RowOccupancy(design, placement, constraints)
  allowed = None if restrict_to is None else set(int(c) for c in restrict_to)
  rh = design.row_height
  single = onp.flatnonzero(design.movable_mask & (design.heights == rh))
  order = single[onp.lexsort((single, placement.xs[single],
                              placement.ys[single]))]
  x_cells, x_moves, y_cells, y_moves = [], [], [], []
  for c in order:
    c = int(c)
    if allowed is not None and c not in allowed:
      continue
    if occupancy.level(placement.ys[c]) is None:
      continue
    move = _x_move(occupancy, c, params.d_x)
    if move is not None:
      x_cells.append(c)
      x_moves.append(move)
    move = _y_move(occupancy, c, params.d_y)
    if move is not None:
      y_cells.append(c)
      y_moves.append(move)
  return DwCandidates(tuple(x_cells), tuple(x_moves), tuple(y_cells),
                      tuple(y_moves))


def _shuffled(key, cells, moves):
  order = utils.permutation(key, len(cells))
  return [(cells[i], moves[i]) for i in order]


def apply_shifts(design, placement, bits, candidates, seed, constraints=None,
                 x_bit=1):
  """Consumes shuffled candidate pools in signature order.

  A bit equal to `x_bit` takes the next horizontal candidate, the other bit
  the next vertical one. Every move is re-validated against the moves already
  applied; a candidate that no longer fits, or was already consumed from the
  other pool, is skipped for the next one.

  Returns:
    `(occupancy, cells)`: the `RowOccupancy` holding the shifted placement and
    the moved cell ids in bit order.

  Raises:
    InsufficientCandidates: if a pool runs dry. `available` is the pool size
      when it is short from the start, else the number of cells actually
      shifted along that axis.
  """
  needed = {b: sum(1 for bit in bits if bit == b) for b in (0, 1)}
  key_x, key_y = random.split(utils.prng_key(seed))
  pools = {
      x_bit: ('x', _shuffled(key_x, candidates.x_cells, candidates.x_moves)),
      1 - x_bit: ('y', _shuffled(key_y, candidates.y_cells,
                                 candidates.y_moves)),
  }
  for bit, (axis, pool) in pools.items():
    if len(pool) < needed[bit]:
      raise errors.InsufficientCandidates(axis, needed[bit], len(pool))

  cursor = {0: 0, 1: 0}
  placed = {0: 0, 1: 0}
  occupancy = placer.RowOccupancy(design, placement, constraints)
  used = set()
  cells = []
  for bit in bits:
    axis, pool = pools[bit]
    while True:
      if cursor[bit] >= len(pool):
        raise errors.InsufficientCandidates(axis, needed[bit], placed[bit])
      c, move = pool[cursor[bit]]
      cursor[bit] += 1
      if c in used:
        continue
      x, y = int(occupancy.xs[c]), int(occupancy.ys[c])
      if axis == 'x':
        x += move
      else:
        y += move
      if occupancy.fits(c, x, y):
        occupancy.move(c, x, y)
        used.add(c)
        cells.append(c)
        placed[bit] += 1
        break
  return occupancy, cells


def insert_dw(design, placement, signature, d_x=1, d_y=None, seed=0,
              constraints=None, restrict_to=None, place_params=None):
  """Perturbs a legalized placement by `signature` and runs detailed placement.

  Returns:
    `(placement, watermark)`: the detailed placement `P_wm` and its
    `DwWatermark`.

  Raises:
    InsufficientCandidates: if a candidate pool is too small.
  """
  bits = tuple(int(b) for b in signature)
  constraints = constraints or placer.RegionConstraintSet.for_design(design)
  p_itr, cells = perturb(design, placement, bits, d_x, d_y, seed, constraints,
                         restrict_to)
  p_wm = placer.detailed_place(design, p_itr, constraints, place_params)
  logging.info('Inserted %d-bit detailed watermark (%d x-moves).', len(bits),
               sum(bits))
  return p_wm, record(p_itr, p_wm, cells)


def perturb(design, placement, signature, d_x=1, d_y=None, seed=0,
            constraints=None, restrict_to=None):
  """Selects candidates and shifts them by `signature`.

  Returns:
    `(p_itr, cells)`: the perturbed legal placement and the moved cell ids
    in bit order.
  """
  bits = tuple(int(b) for b in signature)
  if not bits:
    raise errors.InvalidParams('empty signature')
  params = DwParams(d_x, d_y).resolve(design)
  candidates = select_candidates(design, placement, params.d_x, params.d_y,
                                 constraints, restrict_to)
  occupancy, cells = apply_shifts(design, placement, bits, candidates, seed,
                                  constraints)
  return occupancy.placement(netlist.LEGALIZED), cells


def record(p_itr, p_wm, cells):
  """The `DwWatermark` of `cells` between `p_itr` and `p_wm`."""
  ids = onp.asarray(cells, onp.int64)
  return DwWatermark(
      tuple(int(c) for c in cells), tuple(int(v) for v in p_itr.xs[ids]),
      tuple(int(v) for v in p_itr.ys[ids]),
      tuple(int(v) for v in p_itr.xs[ids] - p_wm.xs[ids]),
      tuple(int(v) for v in p_itr.ys[ids] - p_wm.ys[ids]))


def extract_dw(design, placement, wm):
  """Percentage of watermarked cells whose displacement matches exactly."""
  del design
  if not wm.cells:
    return 0.
  ids = onp.asarray(wm.cells, onp.int64)
  dist_x = onp.asarray(wm.itr_xs) - placement.xs[ids]
  dist_y = onp.asarray(wm.itr_ys) - placement.ys[ids]
  matched = ((dist_x == onp.asarray(wm.dist_xs)) &
             (dist_y == onp.asarray(wm.dist_ys)))
  return 100. * int(matched.sum()) / len(wm.cells)

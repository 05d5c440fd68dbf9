# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Three-stage placement: global placement, legalization, detailed placement.

Global placement alternates a bound-to-bound quadratic wirelength solve with
bin-based spreading. The quadratic system is solved matrix-free with
`jax.scipy.sparse.linalg.cg`; spreading recursively bisects the bin grid and
only moves cells out of overfilled halves. Cells are anchored to their spread
positions with a weight that grows every iteration.

Legalization assigns every cell to the nearest row segment of its region class
with spare capacity and then packs each segment with Abacus clustering.
Multi-row-height cells are placed first.

Detailed placement runs deterministic passes of adjacent swaps, sliding to the
optimal free position and 3-cell reordering inside row segments, committing
only strictly improving moves.

Example:
  >>> constraints = placer.RegionConstraintSet.for_design(design)
  >>> params = placer.PlaceParams(seed=3)
  >>> p_global, p_legal, p_detailed = placer.run_pipeline(
  ...     design, constraints, params)
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import bisect
import collections
from functools import partial
import itertools
import math

from absl import logging
from jax import jit
from jax import random
import jax.numpy as np
from jax.ops import segment_sum
from jax.scipy.sparse.linalg import cg
import numpy as onp

from placemarks import metrics
from placemarks import netlist
from placemarks.utils import errors
from placemarks.utils import geometry
from placemarks.utils import utils

DEFAULT_LABEL = -1
WATERMARK_LABEL = -2

_BIN_ROWS = 6
_MAX_BINS = 128
_DENSITY_SLACK = 0.04


class PlaceParams(
    collections.namedtuple('PlaceParams', [
        'density_target', 'bins', 'max_iterations', 'density_weight',
        'density_weight_multiplier', 'convergence_tol', 'seed',
        'detail_passes', 'cg_iterations'
    ])):
  """Placement parameters.

  Attributes:
    density_target: target bin utilization in (0, 1].
    bins: `(bins_x, bins_y)` spreading grid, or `None` for bins of about six
      row heights.
    max_iterations: global placement iteration budget.
    density_weight: initial weight of the spreading anchors.
    density_weight_multiplier: growth factor of the anchor weight.
    convergence_tol: relative HPWL change that stops global placement.
    seed: 64-bit seed of the initial spread.
    detail_passes: detailed placement pass budget.
    cg_iterations: conjugate gradient iteration cap per solve.
  """

  def __new__(cls, density_target=0.9, bins=None, max_iterations=30,
              density_weight=0.01, density_weight_multiplier=1.3,
              convergence_tol=0.002, seed=0, detail_passes=5,
              cg_iterations=100):
    if not 0 < density_target <= 1:
      raise ValueError('density_target must lie in (0, 1], got {}.'.format(
          density_target))
    if max_iterations < 1:
      raise ValueError('max_iterations must be at least 1.')
    if density_weight <= 0 or density_weight_multiplier < 1:
      raise ValueError('The anchor weight schedule must be positive and '
                       'non-decreasing.')
    if bins is not None and (bins[0] < 1 or bins[1] < 1):
      raise ValueError('Bin counts must be positive, got {}.'.format(bins))
    return super(PlaceParams, cls).__new__(
        cls, density_target, None if bins is None else tuple(bins),
        max_iterations, density_weight, density_weight_multiplier,
        convergence_tol, seed, detail_passes, cg_iterations)


class RegionConstraintSet(
    collections.namedtuple('RegionConstraintSet',
                           ['fences', 'wm_rect', 'wm_cells'])):
  """Fence regions plus an optional exclusive watermark region.

  Attributes:
    fences: the design's `FenceRegion`s.
    wm_rect: watermark `Rect` or `None`.
    wm_cells: sorted tuple of ids of the cells that must sit in `wm_rect`;
      every other cell must stay out of it.
  """

  def __new__(cls, fences, wm_rect=None, wm_cells=()):
    return super(RegionConstraintSet, cls).__new__(
        cls, tuple(fences), wm_rect, tuple(sorted(int(c) for c in wm_cells)))

  @classmethod
  def for_design(cls, design, wm_rect=None, wm_cells=()):
    constraints = cls(design.fence_regions, wm_rect, wm_cells)
    constraints.validate(design)
    return constraints

  def with_watermark(self, wm_rect, wm_cells):
    return RegionConstraintSet(self.fences, wm_rect, wm_cells)

  def validate(self, design):
    if self.wm_rect is None:
      return
    cells = onp.asarray(self.wm_cells, onp.int64)
    if len(cells) and (not design.movable_mask[cells].all() or
                       (design.region_ids[cells] >= 0).any()):
      raise ValueError('Watermark members must be movable cells outside '
                       'fence regions.')
    for i in onp.flatnonzero(design.kinds == netlist.CellKind.MACRO):
      box = geometry.cell_rect(design.init_xs[i], design.init_ys[i],
                               design.widths[i], design.heights[i])
      if box.intersects(self.wm_rect):
        raise ValueError('Watermark region {} intersects macro {}.'.format(
            self.wm_rect, design.cell_names[i]))

  def labels(self, design):
    """Region class of every cell: fence id, `WATERMARK_LABEL` or default."""
    labels = design.region_ids.copy()
    if self.wm_rect is not None and self.wm_cells:
      labels[list(self.wm_cells)] = WATERMARK_LABEL
    return labels

  def labeled_rects(self):
    out = [(f.id, r) for f in self.fences for r in f.rects]
    if self.wm_rect is not None:
      out.append((WATERMARK_LABEL, self.wm_rect))
    return out

  def rects_of(self, label):
    if label == WATERMARK_LABEL:
      return (self.wm_rect,)
    if label >= 0:
      return self.fences[label].rects
    return ()


# Row segments.


def _row_levels(design):
  spans = collections.defaultdict(list)
  for row in design.rows:
    spans[row.y].append((row.x_lo, row.x_hi))
  levels = sorted(spans)
  merged = []
  for y in levels:
    out = []
    for lo, hi in sorted(spans[y]):
      if out and lo <= out[-1][1]:
        out[-1] = (out[-1][0], max(out[-1][1], hi))
      else:
        out.append((lo, hi))
    merged.append(out)
  return levels, merged


def free_space(design, constraints, blockers=()):
  """Row segments left free by fixed cells, labeled by region class.

  Args:
    design: a `Design`.
    constraints: a `RegionConstraintSet`.
    blockers: extra `(x, y, w, h)` boxes to remove, for instance placed
      multi-row-height cells.

  Returns:
    `(levels, segments)`: sorted row heights and, per level, a sorted list of
    `(x_lo, x_hi, label)` segments. A segment takes the label of the region
    containing the center of its row.
  """
  levels, intervals = _row_levels(design)
  rh = design.row_height
  boxes = [(int(design.init_xs[i]), int(design.init_ys[i]),
            int(design.widths[i]), int(design.heights[i]))
           for i in onp.flatnonzero(design.fixed_mask)]
  boxes.extend(blockers)
  for x, y, w, h in boxes:
    lo = bisect.bisect_right(levels, y - rh)
    hi = bisect.bisect_left(levels, y + h)
    for l in range(lo, hi):
      intervals[l] = geometry.subtract_interval(intervals[l], x, x + w)

  segments = [[(a, b, DEFAULT_LABEL) for a, b in iv] for iv in intervals]
  for label, rect in constraints.labeled_rects():
    for l, y in enumerate(levels):
      if not 2 * rect.y_lo <= 2 * y + rh < 2 * rect.y_hi:
        continue
      out = []
      for a, b, lab in segments[l]:
        if lab != DEFAULT_LABEL:
          out.append((a, b, lab))
          continue
        inside, outside = geometry.split_intervals([(a, b)], rect.x_lo,
                                                   rect.x_hi)
        out.extend((p, q, label) for p, q in inside)
        out.extend((p, q, DEFAULT_LABEL) for p, q in outside)
      segments[l] = sorted(out)
  return levels, segments


class RowOccupancy(object):
  """Mutable per-row index of movable cells over labeled row segments.

  Used to validate single-cell moves against the current state of a legal
  placement, as needed by watermark insertion, baselines and attacks.
  """

  def __init__(self, design, placement, constraints=None):
    self.design = design
    self.constraints = constraints or RegionConstraintSet.for_design(design)
    self.labels = self.constraints.labels(design)
    self.xs = placement.xs.copy()
    self.ys = placement.ys.copy()
    self.levels, self.segments = free_space(design, self.constraints)
    self._level_of = {y: l for l, y in enumerate(self.levels)}
    self._segment_starts = [[s[0] for s in segs] for segs in self.segments]
    self.occupied = [[] for _ in self.levels]
    for c in onp.flatnonzero(design.movable_mask):
      self._insert(int(c))

  def level(self, y):
    return self._level_of.get(int(y))

  def _spanned(self, c):
    rh = self.design.row_height
    start = self.level(self.ys[c])
    if start is None:
      return []
    return [
        self.level(self.ys[c] + k * rh)
        for k in range(int(self.design.heights[c]) // rh)
        if self.level(self.ys[c] + k * rh) is not None
    ]

  def _item(self, c):
    return (int(self.xs[c]), int(self.xs[c] + self.design.widths[c]), c)

  def _insert(self, c):
    for l in self._spanned(c):
      bisect.insort(self.occupied[l], self._item(c))

  def _remove(self, c):
    item = self._item(c)
    for l in self._spanned(c):
      items = self.occupied[l]
      i = bisect.bisect_left(items, item)
      if i < len(items) and items[i] == item:
        del items[i]

  def segment(self, level, lo, hi):
    """The `(x_lo, x_hi, label)` segment containing `[lo, hi)`, or `None`."""
    i = bisect.bisect_right(self._segment_starts[level], lo) - 1
    if i >= 0:
      seg = self.segments[level][i]
      if seg[0] <= lo and hi <= seg[1]:
        return seg
    return None

  def free_span(self, level, lo, hi, ignore=None):
    """Bounds of the free gap around `[lo, hi)` in `level`.

    Returns:
      `(left, right)` such that `[left, right)` is free of cells other than
      `ignore` and lies in the segment containing `[lo, hi)`, or `None` when
      `[lo, hi)` is occupied or not inside a segment.
    """
    seg = self.segment(level, lo, hi)
    if seg is None:
      return None
    left, right = seg[0], seg[1]
    items = self.occupied[level]
    i = bisect.bisect_left(items, (hi,))
    j = i
    while j < len(items) and items[j][2] == ignore:
      j += 1
    if j < len(items):
      right = min(right, items[j][0])
    j = i - 1
    while j >= 0 and items[j][2] == ignore:
      j -= 1
    if j >= 0:
      if items[j][1] > lo:
        return None
      left = max(left, items[j][1])
    if left > lo or right < hi:
      return None
    return left, right

  def move(self, c, x, y):
    self._remove(c)
    self.xs[c] = x
    self.ys[c] = y
    self._insert(c)

  def fits(self, c, x, y):
    """Whether cell `c` can sit at `(x, y)` without overlap or class change."""
    rh = self.design.row_height
    w = int(self.design.widths[c])
    for k in range(int(self.design.heights[c]) // rh):
      level = self.level(y + k * rh)
      if level is None:
        return False
      span = self.free_span(level, x, x + w, ignore=c)
      if span is None:
        return False
      seg = self.segment(level, x, x + w)
      if seg[2] != self.labels[c]:
        return False
    return True

  def nearest_free_x(self, c, level, x):
    """Closest x in `level` where single-row cell `c` fits, or `None`."""
    return self.nearest_slot(level, x, int(self.design.widths[c]),
                             self.labels[c], ignore=c)

  def nearest_slot(self, level, x, w, label, ignore=None):
    """Closest x of a free `w`-wide slot of class `label` in `level`."""
    best = None
    for lo, hi, seg_label in self.segments[level]:
      if seg_label != label or hi - lo < w:
        continue
      cursor = lo
      gaps = []
      for a, b, other in self.occupied[level]:
        if b <= lo or a >= hi or other == ignore:
          continue
        if a > cursor:
          gaps.append((cursor, a))
        cursor = max(cursor, b)
      if cursor < hi:
        gaps.append((cursor, hi))
      for a, b in gaps:
        if b - a < w:
          continue
        tx = min(max(x, a), b - w)
        if best is None or (abs(tx - x), tx) < (abs(best - x), best):
          best = tx
    return best

  def reserve(self, level, lo, hi, tag):
    """Marks `[lo, hi)` of `level` occupied by a cell not in the design.

    `tag` must be negative so it never collides with a cell id.
    """
    bisect.insort(self.occupied[level], (int(lo), int(hi), tag))

  def placement(self, stage):
    return netlist.Placement(self.xs.copy(), self.ys.copy(), stage)


# Global placement.


def _auto_bins(design, params):
  if params.bins is not None:
    return params.bins
  side = _BIN_ROWS * design.row_height
  bx = int(min(max(round(design.die.width / float(side)), 1), _MAX_BINS))
  by = int(min(max(round(design.die.height / float(side)), 1), _MAX_BINS))
  return bx, by


def _region_area(design, rects):
  """Area of `rects` not covered by fixed cells."""
  area = sum(r.area for r in rects)
  for i in onp.flatnonzero(design.fixed_mask):
    box = geometry.cell_rect(design.init_xs[i], design.init_ys[i],
                             design.widths[i], design.heights[i])
    area -= sum(box.overlap_area(r) for r in rects)
  return area


def _check_capacity(design, constraints, params):
  labels = constraints.labels(design)
  areas = design.areas
  movable = design.movable_mask
  target = params.density_target
  region_total = 0
  for label, rects in ([(f.id, f.rects) for f in constraints.fences] +
                       ([(WATERMARK_LABEL, (constraints.wm_rect,))]
                        if constraints.wm_rect is not None else [])):
    capacity = _region_area(design, rects)
    region_total += capacity
    demand = int(areas[movable & (labels == label)].sum())
    if demand > target * capacity:
      raise errors.RegionInfeasible(
          'watermark' if label == WATERMARK_LABEL else label, demand,
          target * capacity)
  capacity = _region_area(design, (design.die,)) - region_total
  demand = int(areas[movable & (labels == DEFAULT_LABEL)].sum())
  if demand > target * capacity:
    raise errors.RegionInfeasible('default', demand, target * capacity)


def _b2b_edges(design, pos, offsets):
  """Bound-to-bound net model edges along one axis.

  Every net with `p >= 2` pins contributes an edge between its two extreme
  pins and edges from each inner pin to both extremes, weighted
  `2 / ((p - 1) * length)`. Edge count depends on net sizes only.
  """
  sizes = onp.diff(design.net_starts)
  pin_nets = design.pin_nets
  pin_pos = pos[design.pin_cells] + offsets
  order = onp.lexsort((pin_pos, pin_nets))
  starts = design.net_starts[:-1]
  multi = onp.flatnonzero(sizes >= 2)
  lo_pin = order[starts[multi]]
  hi_pin = order[starts[multi] + sizes[multi] - 1]

  rank = onp.arange(len(order)) - design.net_starts[pin_nets[order]]
  inner = (rank > 0) & (rank < sizes[pin_nets[order]] - 1)
  inner_pins = order[inner]
  inner_nets = pin_nets[inner_pins]
  slot = onp.full((design.n_nets,), -1, onp.int64)
  slot[multi] = onp.arange(len(multi))

  a = onp.concatenate([lo_pin, inner_pins, inner_pins])
  b = onp.concatenate(
      [hi_pin, lo_pin[slot[inner_nets]], hi_pin[slot[inner_nets]]])
  p = sizes[pin_nets[a]].astype(onp.float64)
  length = onp.maximum(onp.abs(pin_pos[a] - pin_pos[b]), 1.)
  weight = 2. / ((p - 1.) * length)
  ci, cj = design.pin_cells[a], design.pin_cells[b]
  weight[ci == cj] = 0.
  return ci, cj, offsets[a], offsets[b], weight


@partial(jit, static_argnums=(9, 10))
def _solve_axis(ei, ej, w, oi, oj, anchor_w, anchor_pos, pos, movable,
                n_cells, maxiter):
  """Minimizes the quadratic wirelength plus anchor energy along one axis.

  Fixed cells are pinned to `pos` by identity rows, which keeps the system
  symmetric positive definite.
  """
  m = movable
  mi, mj = m[ei], m[ej]

  def matvec(v):
    d_ij = w * (v[ei] - mj * v[ej])
    d_ji = w * (v[ej] - mi * v[ei])
    lap = (segment_sum(d_ij, ei, n_cells) + segment_sum(d_ji, ej, n_cells))
    return m * (lap + anchor_w * v) + (1. - m) * v

  b_ij = w * ((oj - oi) + (1. - mj) * pos[ej])
  b_ji = w * ((oi - oj) + (1. - mi) * pos[ei])
  rhs = (m * (segment_sum(b_ij, ei, n_cells) + segment_sum(b_ji, ej, n_cells)
              + anchor_w * anchor_pos) + (1. - m) * pos)
  diag = (m * (segment_sum(w, ei, n_cells) + segment_sum(w, ej, n_cells) +
               anchor_w) + (1. - m))
  x, _ = cg(matvec, rhs, x0=pos, tol=1e-6, maxiter=maxiter,
            M=lambda r: r / diag)
  return x


def _quadratic_step(design, pos, offsets, anchor_w, params):
  ci, cj, oi, oj, w = _b2b_edges(design, pos, offsets)
  f32 = lambda v: np.asarray(onp.asarray(v, onp.float32))
  i32 = lambda v: np.asarray(onp.asarray(v, onp.int32))
  movable = design.movable_mask.astype(onp.float32)
  x = _solve_axis(i32(ci), i32(cj), f32(w), f32(oi), f32(oj),
                  f32(anchor_w * movable), f32(pos), f32(pos), f32(movable),
                  design.n_cells, params.cg_iterations)
  return onp.asarray(x, onp.float64)


class _Spreader(object):
  """Recursive-bisection spreading per region class over a bin grid."""

  def __init__(self, design, constraints, bins, target):
    self.design = design
    self.constraints = constraints
    self.bins_x, self.bins_y = bins
    die = design.die
    self.edges_x = die.x_lo + die.width * onp.arange(
        self.bins_x + 1) / float(self.bins_x)
    self.edges_y = die.y_lo + die.height * onp.arange(
        self.bins_y + 1) / float(self.bins_y)
    bin_area = die.area / float(self.bins_x * self.bins_y)

    fixed = design.fixed_mask
    free = bin_area * (1. - metrics.density_map(
        design, netlist.Placement(design.init_xs, design.init_ys,
                                  netlist.GLOBAL),
        self.bins_x, self.bins_y, cells=fixed).occupancy)
    free = onp.clip(free, 0., None)

    self.labels = constraints.labels(design)
    self.areas = {}
    self.boxes = {}
    classes = [(f.id, f.rects) for f in constraints.fences]
    if constraints.wm_rect is not None:
      classes.append((WATERMARK_LABEL, (constraints.wm_rect,)))
    fenced = onp.zeros_like(free)
    for label, rects in classes:
      area = onp.zeros_like(free)
      best = onp.zeros(free.shape + (4,))
      best_area = onp.zeros_like(free)
      for rect in rects:
        cover = self._rect_cover(rect)
        for i in onp.flatnonzero(fixed):
          box = geometry.cell_rect(design.init_xs[i], design.init_ys[i],
                                   design.widths[i], design.heights[i])
          common = box.intersection(rect)
          if common is not None:
            cover -= self._rect_cover(common)
        area += cover
        better = cover > best_area
        best[better] = rect
        best_area[better] = cover[better]
      self.areas[label] = onp.clip(area, 0., None)
      self.boxes[label] = best
      fenced += area
    self.areas[DEFAULT_LABEL] = onp.clip(free - fenced, 0., None)
    self.target = target

  def _rect_cover(self, rect):
    cx = onp.clip(
        onp.minimum(rect.x_hi, self.edges_x[1:]) -
        onp.maximum(rect.x_lo, self.edges_x[:-1]), 0., None)
    cy = onp.clip(
        onp.minimum(rect.y_hi, self.edges_y[1:]) -
        onp.maximum(rect.y_lo, self.edges_y[:-1]), 0., None)
    return onp.outer(cx, cy)

  def _bisect(self, cells, cx, cy, areas, cap, x0, x1, y0, y1, out):
    if not len(cells):
      return
    if x1 - x0 == 1 and y1 - y0 == 1:
      out[cells] = x0 * self.bins_y + y0
      return
    if x1 - x0 >= y1 - y0:
      mid = (x0 + x1) // 2
      cut, coord = self.edges_x[mid], cx
      cap_lo = cap[x0:mid, y0:y1].sum()
      cap_hi = cap[mid:x1, y0:y1].sum()
    else:
      mid = (y0 + y1) // 2
      cut, coord = self.edges_y[mid], cy
      cap_lo = cap[x0:x1, y0:mid].sum()
      cap_hi = cap[x0:x1, mid:y1].sum()

    order = cells[onp.lexsort((cells, coord[cells]))]
    a = areas[order]
    prefix = onp.cumsum(a)
    total = prefix[-1]
    k = int(onp.searchsorted(coord[order], cut, 'left'))
    area_lo = prefix[k - 1] if k else 0.
    if total > cap_lo + cap_hi:
      share = cap_lo / (cap_lo + cap_hi) if cap_lo + cap_hi > 0 else 0.5
      k = int(onp.searchsorted(prefix - a / 2., total * share, 'right'))
    elif area_lo > cap_lo:
      k = int(onp.searchsorted(prefix, cap_lo, 'right'))
    elif total - area_lo > cap_hi:
      k = int(onp.searchsorted(prefix, total - cap_hi, 'left')) + 1
    lo, hi = order[:k], order[k:]
    if x1 - x0 >= y1 - y0:
      self._bisect(lo, cx, cy, areas, cap, x0, mid, y0, y1, out)
      self._bisect(hi, cx, cy, areas, cap, mid, x1, y0, y1, out)
    else:
      self._bisect(lo, cx, cy, areas, cap, x0, x1, y0, mid, out)
      self._bisect(hi, cx, cy, areas, cap, x0, x1, mid, y1, out)

  def _repair(self, cells, assigned, areas, area):
    """Moves cells out of bins above the density slack; `False` if stuck."""
    load = onp.bincount(assigned[cells], weights=areas[cells],
                        minlength=self.bins_x * self.bins_y)
    flat_area = area.reshape((-1,))
    cap = self.target * flat_area
    limit = (self.target + _DENSITY_SLACK) * flat_area
    bx, by = onp.divmod(onp.arange(len(load)), self.bins_y)
    for b in onp.flatnonzero(load > limit + 1e-9):
      while load[b] > limit[b] + 1e-9:
        members = cells[assigned[cells] == b]
        members = members[onp.lexsort((members, -areas[members]))]
        moved = False
        for c in members:
          room = load + areas[c] <= cap + 1e-9
          room[b] = False
          if not room.any():
            continue
          dist = onp.abs(bx - bx[b]) + onp.abs(by - by[b])
          dest = int(onp.flatnonzero(room)[onp.argmin(dist[room])])
          assigned[c] = dest
          load[b] -= areas[c]
          load[dest] += areas[c]
          moved = True
          break
        if not moved:
          return False
    return True

  def spread(self, xs, ys):
    design = self.design
    w = design.widths.astype(onp.float64)
    h = design.heights.astype(onp.float64)
    areas = w * h
    cx, cy = xs + w / 2., ys + h / 2.
    assigned = onp.zeros((design.n_cells,), onp.int64)
    movable = design.movable_mask
    ok = True
    new_x, new_y = xs.copy(), ys.copy()
    for label, area in sorted(self.areas.items()):
      cells = onp.flatnonzero(movable & (self.labels == label))
      if not len(cells):
        continue
      self._bisect(cells, cx, cy, areas, self.target * area, 0, self.bins_x,
                   0, self.bins_y, assigned)
      ok &= self._repair(cells, assigned, areas, area)
      bx, by = onp.divmod(assigned[cells], self.bins_y)
      x_lo = onp.ceil(self.edges_x[bx])
      x_hi = onp.floor(self.edges_x[bx + 1])
      y_lo = onp.ceil(self.edges_y[by])
      y_hi = onp.floor(self.edges_y[by + 1])
      if label != DEFAULT_LABEL:
        box = self.boxes[label][bx, by]
        has_box = box[:, 2] > box[:, 0]
        x_lo = onp.where(has_box, onp.maximum(x_lo, box[:, 0]), x_lo)
        x_hi = onp.where(has_box, onp.minimum(x_hi, box[:, 2]), x_hi)
        y_lo = onp.where(has_box, onp.maximum(y_lo, box[:, 1]), y_lo)
        y_hi = onp.where(has_box, onp.minimum(y_hi, box[:, 3]), y_hi)
      new_x[cells] = onp.clip(xs[cells], x_lo,
                              onp.maximum(x_lo, x_hi - w[cells]))
      new_y[cells] = onp.clip(ys[cells], y_lo,
                              onp.maximum(y_lo, y_hi - h[cells]))
    return new_x, new_y, ok


def _clamp_into(x, y, w, h, rects):
  best = None
  for r in rects:
    tx = r.x_lo if w > r.width else min(max(x, r.x_lo), r.x_hi - w)
    ty = r.y_lo if h > r.height else min(max(y, r.y_lo), r.y_hi - h)
    cost = abs(tx - x) + abs(ty - y)
    if best is None or cost < best[0]:
      best = (cost, tx, ty)
  return best[1], best[2]


def _eject(x, y, w, h, forbidden, die):
  """Moves a box whose center lies in a forbidden rect to the nearest side."""
  for _ in range(4):
    hits = [r for r in forbidden if geometry.center_in_rect(x, y, w, h, r)]
    if not hits:
      break
    r = hits[0]
    options = []
    for k, (nx, ny) in enumerate([(r.x_lo - w, y), (r.x_hi, y),
                                  (x, r.y_lo - h), (x, r.y_hi)]):
      if not (die.x_lo <= nx and nx + w <= die.x_hi and die.y_lo <= ny and
              ny + h <= die.y_hi):
        continue
      blocked = any(
          geometry.center_in_rect(nx, ny, w, h, o) for o in forbidden)
      options.append((blocked, abs(nx - x) + abs(ny - y), k, nx, ny))
    if not options:
      break
    _, _, _, x, y = min(options)
  return x, y


def _project(design, constraints, xs, ys):
  """Clamps region members into their regions and ejects non-members.

  Fences and the watermark region are handled alike.
  """
  labels = constraints.labels(design)
  all_rects = constraints.labeled_rects()
  if not all_rects:
    return xs, ys
  w, h = design.widths, design.heights
  for c in onp.flatnonzero(design.movable_mask):
    c = int(c)
    label = labels[c]
    x, y = int(xs[c]), int(ys[c])
    if label != DEFAULT_LABEL:
      rects = constraints.rects_of(label)
      if not any(r.contains_rect(geometry.cell_rect(x, y, w[c], h[c]))
                 for r in rects):
        x, y = _clamp_into(x, y, int(w[c]), int(h[c]), rects)
    forbidden = [r for other, r in all_rects if other != label]
    x, y = _eject(x, y, int(w[c]), int(h[c]), forbidden, design.die)
    xs[c], ys[c] = x, y
  return xs, ys


def _round(design, xs, ys):
  die = design.die
  rx = onp.clip(utils.round_half_up(xs), die.x_lo,
                onp.maximum(die.x_lo, die.x_hi - design.widths))
  ry = onp.clip(utils.round_half_up(ys), die.y_lo,
                onp.maximum(die.y_lo, die.y_hi - design.heights))
  fixed = design.fixed_mask
  rx[fixed] = design.init_xs[fixed]
  ry[fixed] = design.init_ys[fixed]
  return rx, ry


def _initial_spread(design, key):
  """Uniform random positions; fence members start inside their region."""
  kx, ky = random.split(key)
  n = design.n_cells
  u = onp.asarray(random.uniform(kx, (n,)), onp.float64)
  v = onp.asarray(random.uniform(ky, (n,)), onp.float64)
  die = design.die
  x_lo = onp.full((n,), float(die.x_lo))
  y_lo = onp.full((n,), float(die.y_lo))
  x_span = onp.full((n,), float(die.width))
  y_span = onp.full((n,), float(die.height))
  for c in onp.flatnonzero(design.region_ids >= 0):
    r = design.fence_regions[design.region_ids[c]].rects[0]
    x_lo[c], y_lo[c] = r.x_lo, r.y_lo
    x_span[c], y_span[c] = r.width, r.height
  xs = x_lo + u * onp.maximum(x_span - design.widths, 0.)
  ys = y_lo + v * onp.maximum(y_span - design.heights, 0.)
  fixed = design.fixed_mask
  xs[fixed] = design.init_xs[fixed]
  ys[fixed] = design.init_ys[fixed]
  return xs, ys


def bin_utilization(design, placement, bins_x, bins_y):
  """Movable cell area over free (non-fixed) area of every bin.

  Bins that are less than a tenth free report zero.
  """
  movable = metrics.density_map(design, placement, bins_x, bins_y,
                                cells=design.movable_mask).occupancy
  fixed = metrics.density_map(design, placement, bins_x, bins_y,
                              cells=design.fixed_mask).occupancy
  free = 1. - onp.minimum(fixed, 1.)
  return onp.where(free > 0.1, movable / onp.maximum(free, 1e-12), 0.)


def global_place(design, constraints=None, params=None):
  """Region-aware global placement.

  Args:
    design: a `Design`.
    constraints: a `RegionConstraintSet`; the design's fences by default.
    params: `PlaceParams`.

  Returns:
    An integer `Placement` with stage `global`. `converged` is `False` when
    the iteration budget ran out or a bin could not be brought under the
    density slack.

  Raises:
    RegionInfeasible: if some region class holds more cell area than its
      capacity at the target density.
  """
  params = params or PlaceParams()
  constraints = constraints or RegionConstraintSet.for_design(design)
  _check_capacity(design, constraints, params)
  bins = _auto_bins(design, params)

  xs, ys = _initial_spread(design, utils.prng_key(params.seed))
  xs, ys = _project(design, constraints, *_round(design, xs, ys))
  best = (xs.copy(), ys.copy())
  best_hpwl = metrics.hpwl(design,
                           netlist.Placement(xs, ys, netlist.GLOBAL))
  initial_hpwl = best_hpwl

  spreader = _Spreader(design, constraints, bins, params.density_target)
  ux, uy = xs.astype(onp.float64), ys.astype(onp.float64)
  weight = params.density_weight
  previous = None
  converged = False
  spread_ok = True
  for iteration in range(params.max_iterations):
    lx = _quadratic_step(design, ux, design.pin_dx.astype(onp.float64),
                         weight, params)
    ly = _quadratic_step(design, uy, design.pin_dy.astype(onp.float64),
                         weight, params)
    ux, uy, spread_ok = spreader.spread(lx, ly)
    rx, ry = _project(design, constraints, *_round(design, ux, uy))
    ux, uy = rx.astype(onp.float64), ry.astype(onp.float64)
    length = metrics.hpwl(design, netlist.Placement(rx, ry, netlist.GLOBAL))
    logging.debug('Global iteration %d: hpwl %d, anchor weight %.4f.',
                  iteration, length, weight)
    if length < best_hpwl:
      best, best_hpwl = (rx, ry), length
    if (previous is not None and
        abs(previous - length) <= params.convergence_tol * max(previous, 1)):
      converged = spread_ok
      break
    previous = length
    weight *= params.density_weight_multiplier

  xs, ys = best
  if not converged:
    logging.warning('Global placement of %s stopped without converging; '
                    'returning the best placement found.', design.name)
  logging.info('Global placement of %s: hpwl %d -> %d.', design.name,
               initial_hpwl, best_hpwl)
  return netlist.Placement(xs, ys, netlist.GLOBAL, converged)


# Legalization.


class _Segment(object):
  __slots__ = ('level', 'lo', 'hi', 'label', 'used', 'cells')

  def __init__(self, level, lo, hi, label):
    self.level = level
    self.lo = lo
    self.hi = hi
    self.label = label
    self.used = 0
    self.cells = []


def _abacus(cells, desired, widths, lo, hi):
  """Packs `cells` (sorted by desired x) into `[lo, hi)`.

  Minimizes total squared displacement for the given order, with cluster
  positions rounded half up to integer sites.

  Returns:
    A list of x coordinates aligned with `cells`.
  """
  clusters = []  # [x, weight, q, width, first]

  def collapse():
    while True:
      cluster = clusters[-1]
      x = int(math.floor(cluster[2] / cluster[1] + 0.5))
      cluster[0] = min(max(x, lo), hi - cluster[3])
      if len(clusters) > 1 and clusters[-2][0] + clusters[-2][3] > cluster[0]:
        prev = clusters[-2]
        prev[1] += cluster[1]
        prev[2] += cluster[2] - cluster[1] * prev[3]
        prev[3] += cluster[3]
        clusters.pop()
        continue
      return

  for index, c in enumerate(cells):
    x, w = desired[c], widths[c]
    if not clusters or clusters[-1][0] + clusters[-1][3] <= x:
      clusters.append([x, 1., float(x), w, index])
    else:
      cluster = clusters[-1]
      cluster[1] += 1.
      cluster[2] += x - cluster[3]
      cluster[3] += w
    collapse()

  out = [0] * len(cells)
  for k, cluster in enumerate(clusters):
    end = clusters[k + 1][4] if k + 1 < len(clusters) else len(cells)
    x = cluster[0]
    for index in range(cluster[4], end):
      out[index] = x
      x += widths[cells[index]]
  return out


def _nearest_levels(levels, y):
  """Level indices ordered by vertical distance to `y`, lower first on ties."""
  i = bisect.bisect_left(levels, y)
  lo, hi = i - 1, i
  while lo >= 0 or hi < len(levels):
    d_lo = y - levels[lo] if lo >= 0 else None
    d_hi = levels[hi] - y if hi < len(levels) else None
    if d_hi is None or (d_lo is not None and d_lo <= d_hi):
      yield lo, d_lo
      lo -= 1
    else:
      yield hi, d_hi
      hi += 1


def _place_tall(design, c, x, y, label, levels, segments):
  """Places a multi-row cell on the nearest aligned run of free levels."""
  rh = design.row_height
  w, k = int(design.widths[c]), int(design.heights[c]) // rh
  best = None
  for l, dy in _nearest_levels(levels, y):
    if best is not None and dy * dy > best[0]:
      break
    if l + k > len(levels) or levels[l + k - 1] != levels[l] + (k - 1) * rh:
      continue
    common = [(a, b) for a, b, lab in segments[l] if lab == label]
    for j in range(1, k):
      others = [(a, b) for a, b, lab in segments[l + j] if lab == label]
      common = [(max(a, p), min(b, q)) for a, b in common for p, q in others
                if max(a, p) < min(b, q)]
    for a, b in common:
      if b - a < w:
        continue
      tx = min(max(x, a), b - w)
      cost = (tx - x)**2 + dy * dy
      if best is None or cost < best[0]:
        best = (cost, tx, l)
  if best is None:
    raise errors.LegalizationOverflow(c, label)
  _, tx, l = best
  for j in range(k):
    out = []
    for a, b, lab in segments[l + j]:
      out.extend((p, q, lab)
                 for p, q in geometry.subtract_interval([(a, b)], tx, tx + w))
    segments[l + j] = out
  return tx, levels[l]


def legalize(design, placement, constraints=None, padding=None):
  """Moves cells onto rows without overlap, preserving region classes.

  Args:
    design: a `Design`.
    placement: a `Placement`, usually from `global_place`.
    constraints: a `RegionConstraintSet`; the design's fences by default.
    padding: optional `{label: sites}`. Every single-row cell of a listed
      class keeps that many free sites to its right.

  Raises:
    LegalizationOverflow: if no segment of a cell's class can host it.
  """
  constraints = constraints or RegionConstraintSet.for_design(design)
  labels = constraints.labels(design)
  padding = padding or {}
  levels, segments = free_space(design, constraints)
  rh = design.row_height
  xs, ys = placement.xs.copy(), placement.ys.copy()
  movable = onp.flatnonzero(design.movable_mask)
  tall = [int(c) for c in movable if design.heights[c] > rh]
  short = [int(c) for c in movable if design.heights[c] <= rh]

  for c in sorted(tall, key=lambda c: (xs[c], c)):
    xs[c], ys[c] = _place_tall(design, c, int(xs[c]), int(ys[c]), labels[c],
                               levels, segments)

  rows = [[_Segment(l, a, b, lab) for a, b, lab in segs]
          for l, segs in enumerate(segments)]
  widths = design.widths.copy()
  for c in short:
    widths[c] += padding.get(labels[c], 0)
  for c in sorted(short, key=lambda c: (xs[c], c)):
    x, y, w, label = int(xs[c]), int(ys[c]), int(widths[c]), labels[c]
    best = None
    for l, dy in _nearest_levels(levels, y):
      if best is not None and dy * dy > best[0]:
        break
      for seg in rows[l]:
        if seg.label != label or seg.hi - seg.lo - seg.used < w:
          continue
        tx = min(max(x, seg.lo), seg.hi - w)
        cost = (tx - x)**2 + dy * dy
        if best is None or cost < best[0]:
          best = (cost, seg)
    if best is None:
      raise errors.LegalizationOverflow(c, label)
    best[1].used += w
    best[1].cells.append(c)

  desired = xs.tolist()
  width_list = widths.tolist()
  for segs in rows:
    for seg in segs:
      if not seg.cells:
        continue
      cells = sorted(seg.cells, key=lambda c: (desired[c], c))
      for c, x in zip(cells, _abacus(cells, desired, width_list, seg.lo,
                                     seg.hi)):
        xs[c] = x
        ys[c] = levels[seg.level]
  moved = int(onp.abs(xs - placement.xs).sum() + onp.abs(ys - placement.ys).sum())
  logging.info('Legalized %s: total displacement %d.', design.name, moved)
  return netlist.Placement(xs, ys, netlist.LEGALIZED)


# Detailed placement.


class _DetailState(object):
  """Segments of single-row cells plus incremental net cost evaluation."""

  def __init__(self, design, placement, constraints):
    self.design = design
    rh = design.row_height
    tall = [(int(placement.xs[c]), int(placement.ys[c]),
             int(design.widths[c]), int(design.heights[c]))
            for c in onp.flatnonzero(design.movable_mask)
            if design.heights[c] > rh]
    levels, segments = free_space(design, constraints, blockers=tall)
    level_of = {y: l for l, y in enumerate(levels)}
    self.segments = [[_Segment(l, a, b, lab) for a, b, lab in segs]
                     for l, segs in enumerate(segments)]
    starts = [[s.lo for s in segs] for segs in self.segments]
    self.xs = placement.xs.tolist()
    self.ys = placement.ys.tolist()
    self.widths = design.widths.tolist()
    for c in onp.flatnonzero(design.movable_mask):
      c = int(c)
      if design.heights[c] > rh or self.ys[c] not in level_of:
        continue
      l = level_of[self.ys[c]]
      i = bisect.bisect_right(starts[l], self.xs[c]) - 1
      if i >= 0:
        seg = self.segments[l][i]
        if seg.lo <= self.xs[c] and self.xs[c] + self.widths[c] <= seg.hi:
          seg.cells.append(c)
    for segs in self.segments:
      for seg in segs:
        seg.cells.sort(key=lambda c: (self.xs[c], c))

    cell_starts, cell_nets = netlist.cell_nets(design)
    self.cell_nets = [
        cell_nets[cell_starts[c]:cell_starts[c + 1]].tolist()
        for c in range(design.n_cells)
    ]
    self.net_pins = [design.net_pins(n) for n in range(design.n_nets)]

  def cost(self, nets):
    xs, ys = self.xs, self.ys
    total = 0
    for n in nets:
      pins = self.net_pins[n]
      if len(pins) < 2:
        continue
      px = [xs[c] + dx for c, dx, _ in pins]
      py = [ys[c] + dy for c, _, dy in pins]
      total += max(px) - min(px) + max(py) - min(py)
    return total

  def nets_of(self, cells):
    nets = set()
    for c in cells:
      nets.update(self.cell_nets[c])
    return nets

  def try_positions(self, moves):
    """Applies `{cell: x}` if it strictly lowers HPWL; returns the gain."""
    nets = self.nets_of(moves)
    before = self.cost(nets)
    old = {c: self.xs[c] for c in moves}
    for c, x in moves.items():
      self.xs[c] = x
    gain = before - self.cost(nets)
    if gain <= 0:
      for c, x in old.items():
        self.xs[c] = x
      return 0
    return gain

  def optimal_x(self, c):
    """Lower median of the per-net optimal ranges of cell `c`."""
    bounds = []
    for n in self.cell_nets[c]:
      pins = self.net_pins[n]
      others = [self.xs[o] + dx for o, dx, _ in pins if o != c]
      if not others:
        continue
      own = [dx for o, dx, _ in pins if o == c]
      bounds.append(min(others) - own[0])
      bounds.append(max(others) - own[0])
    if not bounds:
      return None
    bounds.sort()
    return bounds[(len(bounds) - 1) // 2]


def _swap_pass(state, seg):
  committed = 0
  cells, w = seg.cells, state.widths
  for i in range(len(cells) - 1):
    a, b = cells[i], cells[i + 1]
    xa, xb = state.xs[a], state.xs[b]
    if state.try_positions({b: xa, a: xb + w[b] - w[a]}):
      cells[i], cells[i + 1] = b, a
      committed += 1
  return committed


def _slide_pass(state, seg):
  committed = 0
  cells, w = seg.cells, state.widths
  for i, c in enumerate(cells):
    left = seg.lo if i == 0 else state.xs[cells[i - 1]] + w[cells[i - 1]]
    right = (seg.hi if i + 1 == len(cells) else state.xs[cells[i + 1]]) - w[c]
    target = state.optimal_x(c)
    if target is None or left > right:
      continue
    target = min(max(target, left), right)
    if target != state.xs[c] and state.try_positions({c: target}):
      committed += 1
  return committed


def _reorder_pass(state, seg):
  committed = 0
  cells, w = seg.cells, state.widths
  for i in range(len(cells) - 2):
    trio = cells[i:i + 3]
    start = state.xs[trio[0]]
    gap_1 = state.xs[trio[1]] - start - w[trio[0]]
    gap_2 = state.xs[trio[2]] - state.xs[trio[1]] - w[trio[1]]
    nets = state.nets_of(trio)
    before = state.cost(nets)
    original = {c: state.xs[c] for c in trio}
    best = None
    for perm in itertools.permutations(trio):
      if list(perm) == trio:
        continue
      p0 = start
      p1 = p0 + w[perm[0]] + gap_1
      p2 = p1 + w[perm[1]] + gap_2
      for c, x in zip(perm, (p0, p1, p2)):
        state.xs[c] = x
      gain = before - state.cost(nets)
      if gain > 0 and (best is None or gain > best[0]):
        best = (gain, perm, (p0, p1, p2))
      for c, x in original.items():
        state.xs[c] = x
    if best is not None:
      for c, x in zip(best[1], best[2]):
        state.xs[c] = x
      cells[i:i + 3] = list(best[1])
      committed += 1
  return committed


def detailed_place(design, placement, constraints=None, params=None):
  """Refines a legal placement without increasing HPWL.

  Moves stay inside the row segment of each cell, so legality and region
  membership are preserved. Multi-row cells stay fixed.
  """
  params = params or PlaceParams()
  constraints = constraints or RegionConstraintSet.for_design(design)
  state = _DetailState(design, placement, constraints)
  before = metrics.hpwl(design, placement)
  for sweep in range(params.detail_passes):
    committed = 0
    for segs in state.segments:
      for seg in segs:
        committed += _swap_pass(state, seg)
        committed += _slide_pass(state, seg)
        committed += _reorder_pass(state, seg)
    logging.debug('Detailed pass %d committed %d moves.', sweep, committed)
    if not committed:
      break
  out = netlist.Placement(state.xs, state.ys, netlist.DETAILED)
  logging.info('Detailed placement of %s: hpwl %d -> %d.', design.name,
               before, metrics.hpwl(design, out))
  return out


def run_pipeline(design, constraints=None, params=None):
  """Runs global placement, legalization and detailed placement.

  Returns:
    `(global, legalized, detailed)` placements.
  """
  params = params or PlaceParams()
  constraints = constraints or RegionConstraintSet.for_design(design)
  p_global = global_place(design, constraints, params)
  p_legal = legalize(design, p_global, constraints)
  p_detailed = detailed_place(design, p_legal, constraints, params)
  return p_global, p_legal, p_detailed


def write_pl(design, placement, path):
  netlist.write_pl(design, placement.xs, placement.ys, path)


def read_pl(design, path, stage=netlist.DETAILED):
  xs, ys = netlist.read_pl(design, path)
  return netlist.Placement(xs, ys, stage)

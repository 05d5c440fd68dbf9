# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Placement quality and legality measurements.

  `hpwl`: half-perimeter wirelength, exact in integer units.
  `pwlr`: wirelength of a watermarked placement relative to a baseline.
  `density_map`: area-prorated bin occupancy.
  `check_legal`: exhaustive legality audit.
  `timing_analyze`: arrival/required-time propagation with a linear delay
    model and the resulting TNS/WNS.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections
import csv
import io

import networkx as nx
import numpy as onp

from placemarks import netlist
from placemarks.utils import errors
from placemarks.utils import geometry

DEFAULT_RAT = 1e9


def net_hpwls(design, placement):
  """Per-net half-perimeter wirelength as an `int64` array."""
  if not design.n_nets:
    return onp.zeros((0,), onp.int64)
  px = placement.xs[design.pin_cells] + design.pin_dx
  py = placement.ys[design.pin_cells] + design.pin_dy
  starts = design.net_starts[:-1]
  return (onp.maximum.reduceat(px, starts) - onp.minimum.reduceat(px, starts)
          + onp.maximum.reduceat(py, starts) -
          onp.minimum.reduceat(py, starts))


def hpwl(design, placement):
  """Total half-perimeter wirelength of `placement`.

  Example:
    >>> metrics.hpwl(design, placement)
    8
  """
  return int(net_hpwls(design, placement).sum())


def pwlr(wm_hpwl, orig_hpwl):
  if orig_hpwl <= 0:
    raise errors.InvalidBaseline(
        'baseline wirelength must be positive, got {}'.format(orig_hpwl))
  return wm_hpwl / float(orig_hpwl)


class DensityGrid(
    collections.namedtuple('DensityGrid',
                           ['bins_x', 'bins_y', 'occupancy', 'die'])):
  """Bin occupancy of a placement.

  Attributes:
    bins_x: number of bins along x.
    bins_y: number of bins along y.
    occupancy: `float64` array of shape `[bins_x, bins_y]` holding the covered
      fraction of every bin. Values above 1 mean overlap.
    die: the gridded `Rect`.
  """

  @property
  def bin_area(self):
    return self.die.area / float(self.bins_x * self.bins_y)


def _coverage(lo, size, edges):
  """Length of `[lo, lo + size)` inside every `[edges[i], edges[i + 1])`."""
  hi = (lo + size)[:, None]
  lo = lo[:, None]
  return onp.clip(
      onp.minimum(hi, edges[None, 1:]) - onp.maximum(lo, edges[None, :-1]), 0,
      None)


def density_map(design, placement, bins_x, bins_y, cells=None):
  """Rasterizes cell area into a `bins_x` by `bins_y` grid over the die.

  Args:
    design: a `Design`.
    placement: a `Placement` aligned with `design`.
    bins_x: positive bin count along x.
    bins_y: positive bin count along y.
    cells: optional boolean mask of cells to rasterize; all cells by default.

  Returns:
    A `DensityGrid`.
  """
  if bins_x < 1 or bins_y < 1:
    raise ValueError('Bin counts must be positive, got {}x{}.'.format(
        bins_x, bins_y))
  die = design.die
  mask = onp.ones((design.n_cells,), bool) if cells is None else cells
  edges_x = die.x_lo + die.width * onp.arange(bins_x + 1) / float(bins_x)
  edges_y = die.y_lo + die.height * onp.arange(bins_y + 1) / float(bins_y)
  cover_x = _coverage(placement.xs[mask].astype(onp.float64),
                      design.widths[mask], edges_x)
  cover_y = _coverage(placement.ys[mask].astype(onp.float64),
                      design.heights[mask], edges_y)
  bin_area = die.area / float(bins_x * bins_y)
  occupancy = onp.dot(cover_x.T, cover_y) / bin_area
  return DensityGrid(bins_x, bins_y, occupancy, die)


class LegalityReport(
    collections.namedtuple('LegalityReport', [
        'overlap_pairs', 'off_row_cells', 'out_of_die_cells',
        'fence_violations'
    ])):
  """Legality findings; the placement is legal iff every list is empty.

  Attributes:
    overlap_pairs: sorted `(i, j)` pairs, `i < j`, of overlapping cells where
      at least one is movable.
    off_row_cells: movable cells not aligned to rows or outside row spans.
    out_of_die_cells: movable cells extending past the die.
    fence_violations: `(cell, region)` pairs; `region` is a fence id, or
      `'watermark'` for a breach of the watermark region's exclusivity.
  """

  @property
  def is_legal(self):
    return not any(self)


def _row_spans(design):
  spans = collections.defaultdict(list)
  for row in design.rows:
    spans[row.y].append((row.x_lo, row.x_hi))
  return spans


def _on_rows(spans, x, y, w, h, rh):
  for k in range(h // rh):
    if not any(lo <= x and x + w <= hi for lo, hi in spans.get(y + k * rh, ())):
      return False
  return h % rh == 0


def overlapping_pairs(design, placement, cells=None):
  """All pairs of overlapping cells among `cells`, with at least one movable."""
  ids = onp.arange(design.n_cells) if cells is None else onp.asarray(cells)
  movable = design.movable_mask
  movable_ids = onp.flatnonzero(movable)
  if not len(movable_ids):
    return []
  bx = max(8, int(design.widths[movable_ids].max()))
  by = design.row_height
  xs, ys = placement.xs, placement.ys
  buckets = collections.defaultdict(list)
  for i in ids.tolist():
    x0, y0 = xs[i] // bx, ys[i] // by
    x1 = (xs[i] + design.widths[i] - 1) // bx
    y1 = (ys[i] + design.heights[i] - 1) // by
    for gx in range(x0, x1 + 1):
      for gy in range(y0, y1 + 1):
        buckets[(gx, gy)].append(i)
  pairs = set()
  for members in buckets.values():
    for a in range(len(members)):
      i = members[a]
      for j in members[a + 1:]:
        if not (movable[i] or movable[j]):
          continue
        if (xs[i] < xs[j] + design.widths[j] and
            xs[j] < xs[i] + design.widths[i] and
            ys[i] < ys[j] + design.heights[j] and
            ys[j] < ys[i] + design.heights[i]):
          pairs.add((min(i, j), max(i, j)))
  return sorted(pairs)


def check_legal(design, placement, constraints=None):
  """Audits a legalized or detailed placement.

  Args:
    design: a `Design`.
    placement: a `Placement` with stage `legalized` or `detailed`.
    constraints: optional object with `wm_rect` and `wm_cells` attributes
      (a `placer.RegionConstraintSet`); when `wm_rect` is set, every movable
      cell must have its center inside it iff it is in `wm_cells`.

  Returns:
    A `LegalityReport`.
  """
  if placement.stage == netlist.GLOBAL:
    raise ValueError('check_legal expects a legalized or detailed placement.')
  die, rh = design.die, design.row_height
  xs, ys = placement.xs, placement.ys
  w, h = design.widths, design.heights
  movable = onp.flatnonzero(design.movable_mask)

  outside = ((xs < die.x_lo) | (ys < die.y_lo) | (xs + w > die.x_hi) |
             (ys + h > die.y_hi))
  out_of_die = [int(i) for i in movable if outside[i]]

  spans = _row_spans(design)
  off_row = [
      int(i) for i in movable
      if not _on_rows(spans, xs[i], ys[i], w[i], h[i], rh)
  ]

  violations = []
  for i in movable:
    region = design.region_ids[i]
    if region < 0:
      continue
    rects = design.fence_regions[region].rects
    if not any(
        geometry.center_in_rect(xs[i], ys[i], w[i], h[i], r) for r in rects):
      violations.append((int(i), int(region)))
  wm_rect = getattr(constraints, 'wm_rect', None)
  if wm_rect is not None:
    members = set(constraints.wm_cells)
    for i in movable:
      inside = geometry.center_in_rect(xs[i], ys[i], w[i], h[i], wm_rect)
      if inside != (int(i) in members):
        violations.append((int(i), 'watermark'))

  return LegalityReport(
      overlapping_pairs(design, placement), off_row, out_of_die, violations)


class DelayModel(
    collections.namedtuple('DelayModel',
                           ['unit_delay_per_length', 'endpoint_rats'])):
  """Linear wire delay model.

  Attributes:
    unit_delay_per_length: delay per unit of net HPWL.
    endpoint_rats: required arrival time of every endpoint net; a number
      applied to all endpoints, a `{net_id: rat}` mapping (missing endpoints
      get `DEFAULT_RAT`), or `None` for `DEFAULT_RAT` everywhere.
  """

  def __new__(cls, unit_delay_per_length=1.0, endpoint_rats=None):
    if unit_delay_per_length < 0:
      raise ValueError('Delays must be non-negative.')
    return super(DelayModel, cls).__new__(cls, unit_delay_per_length,
                                          endpoint_rats)

  def rat(self, net):
    if self.endpoint_rats is None:
      return DEFAULT_RAT
    if isinstance(self.endpoint_rats, dict):
      return self.endpoint_rats.get(net, DEFAULT_RAT)
    return float(self.endpoint_rats)

  def max_rat(self, endpoint_nets):
    return max([self.rat(n) for n in endpoint_nets] or [DEFAULT_RAT])


class TimingResult(
    collections.namedtuple(
        'TimingResult',
        ['slacks', 'tns', 'wns', 'arrival', 'net_slacks'])):
  """Outcome of `timing_analyze`.

  Attributes:
    slacks: tuple of `(net_id, slack)` for every endpoint net, by net id.
    tns: sum of negative endpoint slacks (non-positive).
    wns: smallest endpoint slack; `inf` when there are no endpoints.
    arrival: `float64` array of arrival times at cell outputs.
    net_slacks: `float64` array of the worst slack through every net; `inf`
      for nets that reach no endpoint.
  """


def timing_graph(design, delays):
  """Driver-to-sink graph over non-endpoint nets, weighted by net delay."""
  graph = nx.DiGraph()
  graph.add_nodes_from(range(design.n_cells))
  starts = design.net_starts
  for n in onp.flatnonzero(~design.net_endpoints):
    pins = design.pin_cells[starts[n]:starts[n + 1]]
    driver = int(pins[0])
    for sink in set(pins[1:].tolist()):
      if sink == driver:
        continue
      if graph.has_edge(driver, sink):
        delay = max(graph[driver][sink]['delay'], delays[n])
      else:
        delay = delays[n]
      graph.add_edge(driver, sink, delay=delay)
  return graph


def timing_analyze(design, placement, delay_model=None):
  """Computes endpoint slacks, TNS and WNS.

  The first pin of every net drives its other pins with delay
  `unit_delay_per_length * hpwl(net)`. Endpoint nets terminate paths: their
  sinks start fresh.

  Raises:
    CombinationalCycle: if the driver-to-sink graph has a cycle.
  """
  delay_model = delay_model or DelayModel()
  delays = (delay_model.unit_delay_per_length *
            net_hpwls(design, placement).astype(onp.float64))
  graph = timing_graph(design, delays)
  try:
    order = list(nx.topological_sort(graph))
  except nx.NetworkXUnfeasible:
    raise errors.CombinationalCycle(u for u, _ in nx.find_cycle(graph))

  arrival = onp.zeros((design.n_cells,), onp.float64)
  for u in order:
    for v in graph.successors(u):
      arrival[v] = max(arrival[v], arrival[u] + graph[u][v]['delay'])

  starts = design.net_starts
  drivers = design.pin_cells[starts[:-1]] if design.n_nets else onp.zeros(
      (0,), onp.int64)
  endpoints = onp.flatnonzero(design.net_endpoints)
  required = onp.full((design.n_cells,), onp.inf)
  slacks = []
  for n in endpoints:
    rat = delay_model.rat(int(n))
    slacks.append((int(n), rat - (arrival[drivers[n]] + delays[n])))
    required[drivers[n]] = min(required[drivers[n]], rat - delays[n])
  for u in reversed(order):
    for v in graph.successors(u):
      required[u] = min(required[u], required[v] - graph[u][v]['delay'])

  net_slacks = onp.full((design.n_nets,), onp.inf)
  for n in range(design.n_nets):
    pins = design.pin_cells[starts[n]:starts[n + 1]]
    if len(pins) < 2:
      continue
    if design.net_endpoints[n]:
      net_slacks[n] = delay_model.rat(n) - arrival[drivers[n]] - delays[n]
      continue
    sink_required = required[pins[1:]].min()
    net_slacks[n] = sink_required - (arrival[drivers[n]] + delays[n])

  values = [s for _, s in slacks]
  tns = float(sum(min(0., s) for s in values))
  wns = float(min(values)) if values else float('inf')
  return TimingResult(tuple(slacks), tns, wns, arrival, net_slacks)


EVAL_COLUMNS = ('design', 'scheme', 'stage', 'hpwl', 'pwlr', 'tns', 'wns',
                'wer', 'legal', 'bits')


class EvalReport(collections.namedtuple('EvalReport', EVAL_COLUMNS)):
  """One row of evaluation output; `legal` is written as 0/1."""

  def to_row(self):
    row = self._asdict()
    row['legal'] = int(bool(self.legal))
    for key in ('pwlr', 'tns', 'wns', 'wer'):
      if row[key] is not None:
        row[key] = '{:.6f}'.format(row[key])
    return row


def evaluate(design, placement, scheme, baseline_hpwl=None, wer=None,
             bits=0, constraints=None, delay_model=None):
  """Builds an `EvalReport` for one placement."""
  length = hpwl(design, placement)
  ratio = pwlr(length, baseline_hpwl) if baseline_hpwl else None
  legal = (placement.stage == netlist.GLOBAL or
           check_legal(design, placement, constraints).is_legal)
  try:
    timing = timing_analyze(design, placement, delay_model)
    tns, wns = timing.tns, timing.wns
  except errors.CombinationalCycle:
    tns, wns = None, None
  return EvalReport(design.name, scheme, placement.stage, length, ratio, tns,
                    wns, wer, legal, bits)


def write_reports(path, reports, append=False):
  """Writes `EvalReport`s as CSV with a header row."""
  with io.open(path, 'a' if append else 'w', newline='',
               encoding='utf-8') as f:
    writer = csv.DictWriter(f, fieldnames=EVAL_COLUMNS)
    if not append or f.tell() == 0:
      writer.writeheader()
    for report in reports:
      writer.writerow(report.to_row())


def read_reports(path):
  """Reads rows written by `write_reports` as dicts of strings."""
  with io.open(path, newline='', encoding='utf-8') as f:
    reader = csv.DictReader(f)
    if reader.fieldnames is None or tuple(reader.fieldnames) != EVAL_COLUMNS:
      raise errors.CorruptDocument('{} is not an evaluation table'.format(path))
    return list(reader)


CAPACITY_COLUMNS = ('design', 'scheme', 'capacity', 'lengths_tried')


def summarize_capacity(rows, pwlr_max=1.005, wer_min=90.):
  """Largest signature length per design and scheme meeting both thresholds.

  A row qualifies when its PWLR is at most `pwlr_max` and its WER at least
  `wer_min`; the capacity is `0` when no row does.

  Returns:
    A list of dicts keyed by `CAPACITY_COLUMNS`, sorted by design and scheme.
  """
  groups = collections.defaultdict(list)
  for row in rows:
    groups[(row['design'], row['scheme'])].append(row)
  summary = []
  for (name, scheme), group in sorted(groups.items()):
    passing = [
        int(r['bits']) for r in group
        if r['pwlr'] and r['wer'] and float(r['pwlr']) <= pwlr_max and
        float(r['wer']) >= wer_min
    ]
    summary.append({
        'design': name,
        'scheme': scheme,
        'capacity': max(passing) if passing else 0,
        'lengths_tried': len(group),
    })
  return summary

# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Design data model, Bookshelf ingestion and synthetic design generation.

A `Design` stores cells and nets column-wise in host `numpy` arrays so every
stage can vectorize over them. Per-record views (`Cell`, `Net`) are produced on
demand for serialization and tests.

Example:
  >>> from placemarks import netlist
  >>> cfg = netlist.SyntheticConfig(n_cells=2000, n_nets=2000)
  >>> design = netlist.generate_synthetic(cfg, seed=7)
  >>> design.n_cells
  2000
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections
import enum
import hashlib
import io
import math
import os

from absl import logging
from jax import random
import numpy as onp

from placemarks.utils import document
from placemarks.utils import errors
from placemarks.utils import utils
from placemarks.utils.geometry import Rect
from placemarks.utils.geometry import Row

DESIGN_DOCUMENT = 'placemarks-design'

GLOBAL = 'global'
LEGALIZED = 'legalized'
DETAILED = 'detailed'
STAGES = (GLOBAL, LEGALIZED, DETAILED)


class CellKind(enum.IntEnum):
  """Role of a cell. `MACRO` and `IO` cells are fixed at their coordinates."""
  MOVABLE = 0
  MACRO = 1
  IO = 2
  BUFFER = 3


_KIND_NAMES = {k: k.name.lower() for k in CellKind}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}

Cell = collections.namedtuple(
    'Cell', ['id', 'name', 'width', 'height', 'kind', 'region_id', 'x', 'y'])
Net = collections.namedtuple('Net', ['id', 'name', 'pins', 'endpoint'])
FenceRegion = collections.namedtuple('FenceRegion', ['id', 'rects'])


class Design(
    collections.namedtuple('Design', [
        'name', 'die', 'row_height', 'rows', 'cell_names', 'widths',
        'heights', 'kinds', 'region_ids', 'init_xs', 'init_ys', 'net_names',
        'net_starts', 'pin_cells', 'pin_dx', 'pin_dy', 'net_endpoints',
        'fence_regions'
    ])):
  """An immutable netlist with geometry.

  Attributes:
    name: design name.
    die: `Rect` of the placeable area.
    row_height: height of every row, the base unit of vertical moves.
    rows: tuple of `Row`s sorted by `(y, x_lo)`.
    cell_names: tuple of cell names; the position is the cell id.
    widths: `int64` array of cell widths.
    heights: `int64` array of cell heights.
    kinds: `int64` array of `CellKind` values.
    region_ids: `int64` array of fence region ids, `-1` for no region.
    init_xs: `int64` array of coordinates from the input. Fixed cells keep
      them in every placement.
    init_ys: `int64` array, see `init_xs`.
    net_names: tuple of net names; the position is the net id.
    net_starts: `int64` array of length `n_nets + 1`; pins of net `i` are
      `net_starts[i]:net_starts[i + 1]`.
    pin_cells: `int64` array of the owning cell of every pin. The first pin of
      a net is its driver.
    pin_dx: `int64` array of pin offsets from the cell origin.
    pin_dy: `int64` array, see `pin_dx`.
    net_endpoints: `bool` array flagging timing endpoint nets.
    fence_regions: tuple of `FenceRegion`s indexed by id.
  """

  @property
  def n_cells(self):
    return len(self.cell_names)

  @property
  def n_nets(self):
    return len(self.net_names)

  @property
  def fixed_mask(self):
    return (self.kinds == CellKind.MACRO) | (self.kinds == CellKind.IO)

  @property
  def movable_mask(self):
    return ~self.fixed_mask

  @property
  def areas(self):
    return self.widths * self.heights

  @property
  def pin_nets(self):
    return onp.repeat(
        onp.arange(self.n_nets, dtype=onp.int64), onp.diff(self.net_starts))

  def cell(self, i):
    return Cell(i, self.cell_names[i], int(self.widths[i]),
                int(self.heights[i]), CellKind(int(self.kinds[i])),
                int(self.region_ids[i]), int(self.init_xs[i]),
                int(self.init_ys[i]))

  @property
  def cells(self):
    return tuple(self.cell(i) for i in range(self.n_cells))

  def net_pins(self, n):
    lo, hi = self.net_starts[n], self.net_starts[n + 1]
    return tuple(
        (int(c), int(dx), int(dy)) for c, dx, dy in zip(
            self.pin_cells[lo:hi], self.pin_dx[lo:hi], self.pin_dy[lo:hi]))

  def net(self, n):
    return Net(n, self.net_names[n], self.net_pins(n),
               bool(self.net_endpoints[n]))

  @property
  def nets(self):
    return tuple(self.net(n) for n in range(self.n_nets))


class Placement(
    collections.namedtuple('Placement', ['xs', 'ys', 'stage', 'converged'])):
  """Integer cell coordinates produced by one placement stage.

  Attributes:
    xs: `int64` array of lower-left x coordinates indexed by cell id.
    ys: `int64` array of lower-left y coordinates.
    stage: one of `GLOBAL`, `LEGALIZED` or `DETAILED`.
    converged: `False` when global placement stopped on its iteration budget.
  """

  def __new__(cls, xs, ys, stage, converged=True):
    if stage not in STAGES:
      raise ValueError('Unknown placement stage {!r}.'.format(stage))
    xs = onp.asarray(xs, dtype=onp.int64)
    ys = onp.asarray(ys, dtype=onp.int64)
    if xs.shape != ys.shape or xs.ndim != 1:
      raise ValueError('Coordinate arrays must be 1d and aligned, got {} '
                       'and {}.'.format(xs.shape, ys.shape))
    return super(Placement, cls).__new__(cls, xs, ys, stage, bool(converged))

  def moved(self, stage=None, xs=None, ys=None):
    """A copy with new coordinates and/or stage."""
    return Placement(
        self.xs.copy() if xs is None else xs,
        self.ys.copy() if ys is None else ys,
        self.stage if stage is None else stage, self.converged)


def from_records(name, die, row_height, rows, cells, nets, fence_regions=()):
  """Builds a validated `Design` from `Cell` and `Net` records.

  `Cell.id` and `Net.id` are ignored: ids are the record positions.
  """
  cells = list(cells)
  nets = list(nets)
  starts = onp.zeros((len(nets) + 1,), onp.int64)
  starts[1:] = onp.cumsum([len(n.pins) for n in nets], dtype=onp.int64)
  pins = [p for n in nets for p in n.pins]

  def column(values, dtype=onp.int64):
    return onp.asarray(values, dtype=dtype).reshape((-1,))

  design = Design(
      name=name,
      die=die,
      row_height=int(row_height),
      rows=tuple(sorted(rows)),
      cell_names=tuple(c.name for c in cells),
      widths=column([c.width for c in cells]),
      heights=column([c.height for c in cells]),
      kinds=column([int(c.kind) for c in cells]),
      region_ids=column([
          -1 if c.region_id is None else c.region_id for c in cells]),
      init_xs=column([c.x for c in cells]),
      init_ys=column([c.y for c in cells]),
      net_names=tuple(n.name for n in nets),
      net_starts=starts,
      pin_cells=column([p[0] for p in pins]),
      pin_dx=column([p[1] for p in pins]),
      pin_dy=column([p[2] for p in pins]),
      net_endpoints=column([bool(n.endpoint) for n in nets], onp.bool_),
      fence_regions=tuple(
          FenceRegion(i, tuple(f.rects)) for i, f in enumerate(fence_regions)))
  validate_design(design)
  return design


def validate_design(design):
  """Checks every structural invariant of `design`.

  Raises:
    OverlappingRows: if two rows share placement sites.
    ValueError: for any other violated invariant.
  """
  die, rh = design.die, design.row_height
  if rh < 1:
    raise ValueError('row_height must be positive, got {}.'.format(rh))

  for row in design.rows:
    if not die.contains_rect(Rect(row.x_lo, row.y, row.x_hi, row.y + rh)):
      raise ValueError('Row {} lies outside die {}.'.format(row, die))
  rows = sorted(design.rows)
  for i, a in enumerate(rows):
    for b in rows[i + 1:]:
      if b.y >= a.y + rh:
        break
      if a.x_lo < b.x_hi and b.x_lo < a.x_hi:
        raise errors.OverlappingRows(a, b)

  n = design.n_cells
  for field in ('widths', 'heights', 'kinds', 'region_ids', 'init_xs',
                'init_ys'):
    if getattr(design, field).shape != (n,):
      raise ValueError('{} must have one entry per cell.'.format(field))
  if n and (design.widths.min() < 1 or design.heights.min() < 1):
    raise ValueError('Cell sizes must be positive.')
  movable = design.movable_mask
  if onp.any(design.heights[movable] % rh):
    bad = int(onp.flatnonzero(movable & (design.heights % rh != 0))[0])
    raise ValueError('Movable cell {} has height {} which is not a multiple '
                     'of the row height {}.'.format(
                         design.cell_names[bad], design.heights[bad], rh))

  starts = design.net_starts
  if starts.shape != (design.n_nets + 1,) or starts[0] != 0:
    raise ValueError('Malformed net index.')
  if design.n_nets and onp.any(onp.diff(starts) < 1):
    bad = int(onp.flatnonzero(onp.diff(starts) < 1)[0])
    raise ValueError('Net {} has no pins.'.format(design.net_names[bad]))
  if len(design.pin_cells):
    if design.pin_cells.min() < 0 or design.pin_cells.max() >= n:
      raise ValueError('A pin references a missing cell.')
    w = design.widths[design.pin_cells]
    h = design.heights[design.pin_cells]
    if (onp.any(design.pin_dx < 0) or onp.any(design.pin_dx > w) or
        onp.any(design.pin_dy < 0) or onp.any(design.pin_dy > h)):
      raise ValueError('A pin offset lies outside its cell.')

  for i, fence in enumerate(design.fence_regions):
    if fence.id != i:
      raise ValueError('Fence regions must be indexed by id.')
    if not fence.rects:
      raise ValueError('Fence region {} has no rectangles.'.format(i))
    for rect in fence.rects:
      if not die.contains_rect(rect):
        raise ValueError('Fence region {} leaves the die.'.format(i))
  if n and design.region_ids.max() >= len(design.fence_regions):
    raise ValueError('A cell references an unknown fence region.')
  if onp.any(design.region_ids[design.fixed_mask] >= 0):
    raise ValueError('Fixed cells cannot belong to fence regions.')


def cell_nets(design):
  """Cell-to-net incidence as `(starts, nets)` CSR arrays without repeats."""
  pairs = onp.unique(
      onp.stack([design.pin_cells, design.pin_nets], axis=1), axis=0)
  if not len(pairs):
    return onp.zeros((design.n_cells + 1,), onp.int64), onp.zeros(
        (0,), onp.int64)
  counts = onp.bincount(pairs[:, 0], minlength=design.n_cells)
  starts = onp.zeros((design.n_cells + 1,), onp.int64)
  starts[1:] = onp.cumsum(counts)
  return starts, pairs[:, 1].astype(onp.int64)


def row_index(design, y):
  return (y - design.die.y_lo) // design.row_height


# Canonical dump.


def dump_design(design):
  """The canonical document text of `design`."""
  payload = {
      'name': design.name,
      'die': list(design.die),
      'row_height': design.row_height,
      'rows': [list(r) for r in design.rows],
      'cells': {
          'names': list(design.cell_names),
          'widths': design.widths.tolist(),
          'heights': design.heights.tolist(),
          'kinds': [_KIND_NAMES[CellKind(k)] for k in design.kinds.tolist()],
          'region_ids': design.region_ids.tolist(),
          'xs': design.init_xs.tolist(),
          'ys': design.init_ys.tolist(),
      },
      'nets': {
          'names': list(design.net_names),
          'starts': design.net_starts.tolist(),
          'pin_cells': design.pin_cells.tolist(),
          'pin_dx': design.pin_dx.tolist(),
          'pin_dy': design.pin_dy.tolist(),
          'endpoints': [bool(e) for e in design.net_endpoints],
      },
      'fences': [[f.id, [list(r) for r in f.rects]]
                 for f in design.fence_regions],
  }
  return document.dumps(DESIGN_DOCUMENT, payload)


def loads_design(text):
  payload = document.loads(text, DESIGN_DOCUMENT)
  try:
    cells, nets = payload['cells'], payload['nets']
    design = Design(
        name=payload['name'],
        die=Rect(*payload['die']),
        row_height=int(payload['row_height']),
        rows=tuple(Row(*r) for r in payload['rows']),
        cell_names=tuple(cells['names']),
        widths=onp.asarray(cells['widths'], onp.int64).reshape((-1,)),
        heights=onp.asarray(cells['heights'], onp.int64).reshape((-1,)),
        kinds=onp.asarray([int(_KIND_BY_NAME[k]) for k in cells['kinds']],
                          onp.int64).reshape((-1,)),
        region_ids=onp.asarray(cells['region_ids'], onp.int64).reshape((-1,)),
        init_xs=onp.asarray(cells['xs'], onp.int64).reshape((-1,)),
        init_ys=onp.asarray(cells['ys'], onp.int64).reshape((-1,)),
        net_names=tuple(nets['names']),
        net_starts=onp.asarray(nets['starts'], onp.int64).reshape((-1,)),
        pin_cells=onp.asarray(nets['pin_cells'], onp.int64).reshape((-1,)),
        pin_dx=onp.asarray(nets['pin_dx'], onp.int64).reshape((-1,)),
        pin_dy=onp.asarray(nets['pin_dy'], onp.int64).reshape((-1,)),
        net_endpoints=onp.asarray(nets['endpoints'],
                                  onp.bool_).reshape((-1,)),
        fence_regions=tuple(
            FenceRegion(i, tuple(Rect(*r) for r in rects))
            for i, rects in payload['fences']))
  except (KeyError, TypeError, ValueError) as e:
    raise errors.CorruptDocument('malformed design document: {!r}'.format(e))
  try:
    validate_design(design)
  except ValueError as e:
    raise errors.CorruptDocument('invalid design document: {}'.format(e))
  return design


def save_design(design, path):
  with io.open(path, 'w', encoding='utf-8') as f:
    f.write(dump_design(design))


def load_design(path):
  if not os.path.exists(path):
    raise errors.MissingFile(path)
  with io.open(path, 'r', encoding='utf-8') as f:
    return loads_design(f.read())


def fingerprint(design):
  """SHA-256 hex digest of the canonical dump."""
  return hashlib.sha256(dump_design(design).encode('utf-8')).hexdigest()


# Bookshelf.


def _records(path):
  """Yields `(line_number, tokens)` for non-empty lines, comments removed."""
  if not os.path.exists(path):
    raise errors.MissingFile(path)
  with io.open(path, 'r', encoding='utf-8') as f:
    for number, line in enumerate(f, 1):
      line = line.split('#', 1)[0].strip()
      if not line or line.startswith('UCLA'):
        continue
      yield number, line.replace(':', ' : ').split()


def _number(path, line, token, integral=True):
  try:
    value = float(token)
  except ValueError:
    raise errors.BookshelfSyntaxError(path, line, token, 'expected a number')
  if integral:
    if value != math.floor(value):
      raise errors.BookshelfSyntaxError(path, line, token,
                                        'expected an integer')
    return int(value)
  return value


def _header(tokens, key):
  return len(tokens) >= 3 and tokens[0] == key and tokens[1] == ':'


def _read_aux(aux_path):
  records = list(_records(aux_path))
  if not records:
    raise errors.BookshelfSyntaxError(aux_path, 1, '', 'empty .aux file')
  line, tokens = records[0]
  if len(tokens) < 3 or tokens[1] != ':':
    raise errors.BookshelfSyntaxError(aux_path, line, tokens[0],
                                      'expected "<kind> : <files>"')
  directory = os.path.dirname(aux_path)
  files = {}
  for name in tokens[2:]:
    files[os.path.splitext(name)[1].lower()] = os.path.join(directory, name)
  for ext in ('.nodes', '.nets', '.pl', '.scl'):
    if ext not in files:
      raise errors.BookshelfSyntaxError(aux_path, line, ext,
                                        'no {} file listed'.format(ext))
  return files


def _read_nodes(path):
  nodes = []
  expected = None
  for line, tokens in _records(path):
    if _header(tokens, 'NumNodes'):
      expected = _number(path, line, tokens[2])
      continue
    if _header(tokens, 'NumTerminals'):
      continue
    if len(tokens) < 3:
      raise errors.BookshelfSyntaxError(path, line, tokens[0],
                                        'expected "<name> <width> <height>"')
    kind = tokens[3] if len(tokens) > 3 else None
    if kind not in (None, 'terminal', 'terminal_NI'):
      raise errors.BookshelfSyntaxError(path, line, kind,
                                        'unknown node attribute')
    nodes.append((tokens[0], _number(path, line, tokens[1]),
                  _number(path, line, tokens[2]), kind, line))
  if expected is not None and expected != len(nodes):
    raise errors.BookshelfSyntaxError(
        path, 0, 'NumNodes',
        'declares {} nodes but lists {}'.format(expected, len(nodes)))
  return nodes


def _read_pl(path):
  coordinates = {}
  for line, tokens in _records(path):
    if len(tokens) < 3:
      raise errors.BookshelfSyntaxError(path, line, tokens[0],
                                        'expected "<name> <x> <y>"')
    fixed = any('FIXED' in t for t in tokens[3:])
    x = utils.round_half_away(_number(path, line, tokens[1], False))
    y = utils.round_half_away(_number(path, line, tokens[2], False))
    coordinates[tokens[0]] = (x, y, fixed)
  return coordinates


def _read_scl(path):
  rows = []
  row_height = None
  current = None
  for line, tokens in _records(path):
    key = tokens[0]
    if key == 'NumRows':
      continue
    if key == 'CoreRow':
      if len(tokens) < 2 or tokens[1] != 'Horizontal':
        raise errors.BookshelfSyntaxError(path, line, ' '.join(tokens[1:]),
                                          'only horizontal rows are supported')
      current = {'line': line}
      continue
    if current is None:
      raise errors.BookshelfSyntaxError(path, line, key,
                                        'statement outside a CoreRow block')
    if key == 'End':
      missing = [k for k in ('Coordinate', 'Height', 'SubrowOrigin',
                             'NumSites') if k not in current]
      if missing:
        raise errors.BookshelfSyntaxError(path, line, 'End',
                                          'row lacks {}'.format(missing))
      height = current['Height']
      if row_height is None:
        row_height = height
      elif height != row_height:
        raise errors.BookshelfSyntaxError(path, current['line'], str(height),
                                          'rows must share one height')
      spacing = current.get('Sitespacing', 1)
      x_lo = current['SubrowOrigin']
      rows.append(
          Row(current['Coordinate'], x_lo,
              x_lo + current['NumSites'] * spacing))
      current = None
      continue
    # `key : value` pairs, possibly two on one line.
    i = 0
    while i < len(tokens):
      if i + 2 >= len(tokens) or tokens[i + 1] != ':':
        raise errors.BookshelfSyntaxError(path, line, tokens[i],
                                          'expected "<key> : <value>"')
      if tokens[i] in ('Siteorient', 'Sitesymmetry'):
        current[tokens[i]] = tokens[i + 2]
      else:
        current[tokens[i]] = _number(path, line, tokens[i + 2])
      i += 3
  if current is not None:
    raise errors.BookshelfSyntaxError(path, current['line'], 'CoreRow',
                                      'unterminated row')
  if not rows:
    raise errors.BookshelfSyntaxError(path, 0, '', 'no rows defined')
  return rows, row_height


def _read_nets(path, index, sizes):
  nets = []
  current = None
  remaining = 0

  def close():
    if current is not None and remaining:
      raise errors.BookshelfSyntaxError(
          path, current['line'], current['name'],
          'net ends {} pins early'.format(remaining))

  for line, tokens in _records(path):
    if _header(tokens, 'NumNets') or _header(tokens, 'NumPins'):
      continue
    if tokens[0] == 'NetDegree':
      close()
      if len(tokens) < 3 or tokens[1] != ':':
        raise errors.BookshelfSyntaxError(path, line, tokens[0],
                                          'expected "NetDegree : <k>"')
      remaining = _number(path, line, tokens[2])
      if remaining < 1:
        raise errors.BookshelfSyntaxError(path, line, tokens[2],
                                          'nets need at least one pin')
      name = tokens[3] if len(tokens) > 3 else 'net{}'.format(len(nets))
      current = {'name': name, 'line': line, 'pins': []}
      nets.append(current)
      continue
    if current is None or not remaining:
      raise errors.BookshelfSyntaxError(path, line, tokens[0],
                                        'pin outside a NetDegree block')
    cell = tokens[0]
    if cell not in index:
      raise errors.DanglingPinReference(current['name'], cell, line)
    c = index[cell]
    w, h = sizes[c]
    dx, dy = 0.0, 0.0
    if ':' in tokens:
      at = tokens.index(':')
      if len(tokens) < at + 3:
        raise errors.BookshelfSyntaxError(path, line, cell,
                                          'expected two pin offsets')
      dx = _number(path, line, tokens[at + 1], False)
      dy = _number(path, line, tokens[at + 2], False)
    px = min(max(utils.round_half_away(dx + w / 2.), 0), w)
    py = min(max(utils.round_half_away(dy + h / 2.), 0), h)
    current['pins'].append((c, px, py))
    remaining -= 1
  close()
  return nets


def _check_weights(path):
  for line, tokens in _records(path):
    if len(tokens) >= 2 and _number(path, line, tokens[-1], False) != 1:
      raise errors.BookshelfSyntaxError(path, line, tokens[-1],
                                        'net weights are not supported')


def parse_bookshelf(aux_path, fences_path=None):
  """Reads a Bookshelf `.aux` bundle into a `Design`.

  Args:
    aux_path: path of the `.aux` file naming `.nodes`, `.nets`, `.pl` and
      `.scl` companions in the same directory.
    fences_path: optional fence sidecar applied with `parse_fences`.

  Returns:
    A validated `Design` named after the `.aux` file.

  Raises:
    MissingFile: if the `.aux` file or a companion does not exist.
    BookshelfSyntaxError: on malformed content, with file, line and token.
    DanglingPinReference: if a pin names an unknown cell.
    OverlappingRows: if two rows share sites.
  """
  if not os.path.exists(aux_path):
    raise errors.MissingFile(aux_path)
  files = _read_aux(aux_path)
  for path in files.values():
    if not os.path.exists(path):
      raise errors.MissingFile(path, 'listed in {} but missing'.format(
          aux_path))

  nodes = _read_nodes(files['.nodes'])
  rows, row_height = _read_scl(files['.scl'])
  coordinates = _read_pl(files['.pl'])
  if '.wts' in files:
    _check_weights(files['.wts'])

  index = {}
  cells = []
  for name, w, h, terminal, line in nodes:
    if name in index:
      raise errors.BookshelfSyntaxError(files['.nodes'], line, name,
                                        'duplicate node')
    if name not in coordinates:
      raise errors.BookshelfSyntaxError(
          files['.nodes'], line, name,
          'node has no coordinates in {}'.format(files['.pl']))
    x, y, fixed = coordinates[name]
    if terminal == 'terminal_NI':
      kind = CellKind.IO
    elif terminal or fixed:
      kind = CellKind.MACRO if h > row_height else CellKind.IO
    else:
      kind = CellKind.MOVABLE
      if h != row_height:
        raise errors.BookshelfSyntaxError(
            files['.nodes'], line, name,
            'movable cell height {} differs from the row height {}'.format(
                h, row_height))
    index[name] = len(cells)
    cells.append(Cell(len(cells), name, w, h, kind, -1, x, y))

  fixed = set(c.id for c in cells if c.kind in (CellKind.MACRO, CellKind.IO))
  nets = []
  for raw in _read_nets(files['.nets'], index,
                        [(c.width, c.height) for c in cells]):
    endpoint = any(p[0] in fixed for p in raw['pins'][1:])
    nets.append(Net(len(nets), raw['name'], tuple(raw['pins']), endpoint))

  die = Rect(
      min(r.x_lo for r in rows), min(r.y for r in rows),
      max(r.x_hi for r in rows), max(r.y for r in rows) + row_height)
  name = os.path.splitext(os.path.basename(aux_path))[0]
  design = from_records(name, die, row_height, rows, cells, nets)
  if fences_path is not None:
    design = parse_fences(fences_path, design)
  logging.info('Parsed %s: %d cells, %d nets, %d rows.', name,
               design.n_cells, design.n_nets, len(design.rows))
  return design


def parse_fences(path, design):
  """Applies a fence sidecar to `design`.

  Each line is either `region <id> <x_lo> <y_lo> <x_hi> <y_hi>` (repeatable
  per id for multi-rectangle regions) or `member <region_id> <cell_name>`.
  Region ids must be dense from 0.
  """
  rects = collections.defaultdict(list)
  members = []
  for line, tokens in _records(path):
    if tokens[0] == 'region' and len(tokens) == 6:
      values = [_number(path, line, t) for t in tokens[1:]]
      try:
        rects[values[0]].append(Rect(*values[1:]))
      except ValueError:
        raise errors.BookshelfSyntaxError(path, line, ' '.join(tokens[2:]),
                                          'empty rectangle')
    elif tokens[0] == 'member' and len(tokens) == 3:
      members.append((line, _number(path, line, tokens[1]), tokens[2]))
    else:
      raise errors.BookshelfSyntaxError(path, line, tokens[0],
                                        'expected a region or member line')
  if sorted(rects) != list(range(len(rects))):
    raise errors.BookshelfSyntaxError(path, 0, str(sorted(rects)),
                                      'region ids must be dense from 0')

  index = {name: i for i, name in enumerate(design.cell_names)}
  region_ids = design.region_ids.copy()
  region_ids[:] = -1
  for line, region, name in members:
    if region not in rects:
      raise errors.BookshelfSyntaxError(path, line, str(region),
                                        'unknown region')
    if name not in index:
      raise errors.BookshelfSyntaxError(path, line, name, 'unknown cell')
    if region_ids[index[name]] >= 0:
      raise errors.BookshelfSyntaxError(path, line, name,
                                        'cell belongs to two regions')
    region_ids[index[name]] = region
  fences = tuple(FenceRegion(i, tuple(rects[i])) for i in range(len(rects)))
  design = design._replace(region_ids=region_ids, fence_regions=fences)
  validate_design(design)
  return design


def _offset(value, size):
  value = value - size / 2.
  return str(int(value)) if value == int(value) else '{:.1f}'.format(value)


def write_bookshelf(design, directory, name=None):
  """Writes `design` as a Bookshelf bundle and returns the `.aux` path.

  A `<name>.fence` sidecar is written when the design has fence regions.
  Inserted buffers are written as ordinary movable nodes.
  """
  name = name or design.name
  path = lambda ext: os.path.join(directory, name + ext)
  fixed = design.fixed_mask

  with io.open(path('.aux'), 'w', encoding='utf-8') as f:
    f.write(u'RowBasedPlacement : {0}.nodes {0}.nets {0}.pl {0}.scl\n'.format(
        name))

  with io.open(path('.nodes'), 'w', encoding='utf-8') as f:
    f.write(u'UCLA nodes 1.0\n\n')
    f.write(u'NumNodes : {}\nNumTerminals : {}\n'.format(
        design.n_cells, int(fixed.sum())))
    for i, cell_name in enumerate(design.cell_names):
      suffix = ''
      if design.kinds[i] == CellKind.IO and design.heights[i] > \
          design.row_height:
        suffix = ' terminal_NI'
      elif fixed[i]:
        suffix = ' terminal'
      f.write(u'{} {} {}{}\n'.format(cell_name, design.widths[i],
                                     design.heights[i], suffix))

  with io.open(path('.nets'), 'w', encoding='utf-8') as f:
    f.write(u'UCLA nets 1.0\n\n')
    f.write(u'NumNets : {}\nNumPins : {}\n'.format(design.n_nets,
                                                   len(design.pin_cells)))
    for n in range(design.n_nets):
      pins = design.net_pins(n)
      f.write(u'NetDegree : {} {}\n'.format(len(pins), design.net_names[n]))
      for k, (c, dx, dy) in enumerate(pins):
        f.write(u'  {} {} : {} {}\n'.format(
            design.cell_names[c], 'O' if k == 0 else 'I',
            _offset(dx, design.widths[c]), _offset(dy, design.heights[c])))

  write_pl(design, design.init_xs, design.init_ys, path('.pl'))

  with io.open(path('.scl'), 'w', encoding='utf-8') as f:
    f.write(u'UCLA scl 1.0\n\nNumRows : {}\n\n'.format(len(design.rows)))
    for row in design.rows:
      f.write(u'CoreRow Horizontal\n')
      f.write(u'  Coordinate : {}\n'.format(row.y))
      f.write(u'  Height : {}\n'.format(design.row_height))
      f.write(u'  Sitewidth : 1\n  Sitespacing : 1\n')
      f.write(u'  Siteorient : N\n  Sitesymmetry : Y\n')
      f.write(u'  SubrowOrigin : {} NumSites : {}\n'.format(
          row.x_lo, row.width))
      f.write(u'End\n')

  if design.fence_regions:
    with io.open(path('.fence'), 'w', encoding='utf-8') as f:
      for fence in design.fence_regions:
        for r in fence.rects:
          f.write(u'region {} {} {} {} {}\n'.format(fence.id, *r))
      for i in onp.flatnonzero(design.region_ids >= 0):
        f.write(u'member {} {}\n'.format(design.region_ids[i],
                                         design.cell_names[i]))
  return path('.aux')


def write_pl(design, xs, ys, path):
  """Writes coordinates in `.pl` form; fixed cells carry `/FIXED`."""
  fixed = design.fixed_mask
  with io.open(path, 'w', encoding='utf-8') as f:
    f.write(u'UCLA pl 1.0\n\n')
    for i, cell_name in enumerate(design.cell_names):
      f.write(u'{} {} {} : N{}\n'.format(cell_name, int(xs[i]), int(ys[i]),
                                         ' /FIXED' if fixed[i] else ''))


def read_pl(design, path):
  """Reads `.pl` coordinates for every cell of `design`, in id order."""
  coordinates = _read_pl(path)
  xs = onp.zeros((design.n_cells,), onp.int64)
  ys = onp.zeros((design.n_cells,), onp.int64)
  for i, cell_name in enumerate(design.cell_names):
    if cell_name not in coordinates:
      raise errors.BookshelfSyntaxError(path, 0, cell_name,
                                        'cell has no coordinates')
    xs[i], ys[i] = coordinates[cell_name][:2]
  return xs, ys


# Synthetic designs.


class SyntheticConfig(
    collections.namedtuple('SyntheticConfig', [
        'n_cells', 'n_nets', 'n_macros', 'n_fences', 'utilization',
        'die_aspect', 'n_ios', 'double_height_fraction', 'endpoint_fraction',
        'row_height'
    ])):
  """Parameters of `generate_synthetic`.

  Attributes:
    n_cells: number of movable cells.
    n_nets: number of nets, each with 2 to 6 pins.
    n_macros: number of fixed square macros.
    n_fences: number of single-rectangle fence regions.
    utilization: movable area over free (non-macro) die area, in (0, 0.95].
    die_aspect: die height over die width.
    n_ios: number of fixed 1x1 pads on the left and right die edges.
    double_height_fraction: share of movable cells spanning two rows.
    endpoint_fraction: share of nets flagged as timing endpoints.
    row_height: row height in placement units.
  """

  def __new__(cls, n_cells, n_nets, n_macros=0, n_fences=0, utilization=0.6,
              die_aspect=1.0, n_ios=0, double_height_fraction=0.0,
              endpoint_fraction=0.1, row_height=4):
    return super(SyntheticConfig, cls).__new__(
        cls, n_cells, n_nets, n_macros, n_fences, utilization, die_aspect,
        n_ios, double_height_fraction, endpoint_fraction, row_height)


_DEGREES = onp.array([2, 3, 4, 5, 6])
_DEGREE_PROBABILITIES = onp.array([0.45, 0.25, 0.15, 0.1, 0.05])
_NEIGHBOURHOOD = 3
_CANDIDATE_SITES = 256


def _free_site(key, die_rows, width, side_rows, die_w, taken):
  """First random row-aligned location of a box that avoids `taken`."""
  kx, ky = random.split(key)
  xs = onp.asarray(random.randint(kx, (_CANDIDATE_SITES,), 0,
                                  max(1, die_w - width + 1)))
  ys = onp.asarray(random.randint(ky, (_CANDIDATE_SITES,), 0,
                                  max(1, die_rows - side_rows + 1)))
  for x, y in zip(xs.tolist(), ys.tolist()):
    box = (x, y, x + width, y + side_rows)
    if all(box[2] <= t[0] or t[2] <= box[0] or box[3] <= t[1] or t[3] <= box[1]
           for t in taken):
      return box
  return None


def generate_synthetic(cfg, seed):
  """Generates a deterministic random `Design`.

  Cells are 2 to 8 units wide. Nets join cells that are neighbours on a virtual
  grid of cell ids, and every net is driven by its lowest-id cell, so the
  timing graph is acyclic.

  Args:
    cfg: a `SyntheticConfig`.
    seed: a 64-bit integer seed.

  Returns:
    A validated `Design`.

  Raises:
    InfeasibleConfig: if the configuration is out of range, or if macros and
      fences cannot be laid out on the die.
  """
  if not 0 < cfg.utilization <= 0.95:
    raise errors.InfeasibleConfig(
        'utilization must lie in (0, 0.95], got {}'.format(cfg.utilization))
  if cfg.n_cells < 1:
    raise errors.InfeasibleConfig('at least one movable cell is required')
  if cfg.n_nets < 0 or cfg.n_macros < 0 or cfg.n_fences < 0 or cfg.n_ios < 0:
    raise errors.InfeasibleConfig('counts must be non-negative')
  if cfg.die_aspect <= 0:
    raise errors.InfeasibleConfig('die_aspect must be positive')

  n, rh, util = cfg.n_cells, cfg.row_height, cfg.utilization
  keys = random.split(utils.prng_key(seed), 10)
  widths = onp.asarray(random.randint(keys[0], (n,), 2, 9), onp.int64)
  doubles = onp.asarray(
      random.uniform(keys[1], (n,)) < cfg.double_height_fraction)
  heights = onp.where(doubles, 2 * rh, rh).astype(onp.int64)
  movable_area = int((widths * heights).sum())
  free_area = movable_area / util

  macro_rows = max(2, int(round(math.sqrt(0.04 * free_area) / rh)))
  macro_side = macro_rows * rh
  macro_area = cfg.n_macros * macro_side * macro_side
  die_area = free_area + macro_area
  n_rows = max(int(heights.max()) // rh,
               int(round(math.sqrt(die_area * cfg.die_aspect) / rh)), 1)
  if cfg.n_macros:
    n_rows = max(n_rows, macro_rows + 1)
  die_w = max(int(math.ceil(die_area / (n_rows * rh))), int(widths.max()))
  if cfg.n_macros:
    die_w = max(die_w, macro_side + 1)
  die = Rect(0, 0, die_w, n_rows * rh)

  # Blocks are (x_lo, row_lo, x_hi, row_hi) in units of (1, rows).
  taken = []
  macro_boxes = []
  for key in random.split(keys[2], max(cfg.n_macros, 1))[:cfg.n_macros]:
    box = _free_site(key, n_rows, macro_side, macro_rows, die_w, taken)
    if box is None:
      raise errors.InfeasibleConfig(
          'cannot place {} macros of side {} on a {}x{} die'.format(
              cfg.n_macros, macro_side, die.width, die.height))
    taken.append((box[0] - 1, box[1] - 1, box[2] + 1, box[3] + 1))
    macro_boxes.append(box)

  region_ids = onp.full((n,), -1, onp.int64)
  fences = []
  if cfg.n_fences:
    per_fence = max(1, n // (10 * cfg.n_fences))
    if per_fence * cfg.n_fences > n:
      raise errors.InfeasibleConfig('{} fence regions need more than {} '
                                    'cells'.format(cfg.n_fences, n))
    areas = widths * heights
    for f, key in enumerate(random.split(keys[3], cfg.n_fences)):
      members = onp.arange(f * per_fence, (f + 1) * per_fence)
      area = 1.1 * areas[members].sum() / util
      rows_f = min(n_rows, max(2, int(round(math.sqrt(area) / rh))))
      width_f = int(math.ceil(area / (rows_f * rh))) + int(widths.max())
      if width_f > die_w:
        raise errors.InfeasibleConfig(
            'fence region {} of width {} exceeds the die'.format(f, width_f))
      box = _free_site(key, n_rows, width_f, rows_f, die_w, taken)
      if box is None:
        raise errors.InfeasibleConfig(
            'cannot place fence region {} on the die'.format(f))
      taken.append(box)
      fences.append(FenceRegion(f, (Rect(box[0], box[1] * rh, box[2],
                                         box[3] * rh),)))
      region_ids[members] = f

  cells = []
  for i in range(n):
    cells.append(
        Cell(i, 'c{}'.format(i), int(widths[i]), int(heights[i]),
             CellKind.MOVABLE, int(region_ids[i]), 0, 0))
  for m, box in enumerate(macro_boxes):
    cells.append(
        Cell(len(cells), 'm{}'.format(m), macro_side, macro_side,
             CellKind.MACRO, -1, box[0], box[1] * rh))
  io_rows = onp.asarray(random.randint(keys[4], (cfg.n_ios,), 0, n_rows))
  for p in range(cfg.n_ios):
    x = 0 if p % 2 == 0 else die_w - 1
    cells.append(
        Cell(len(cells), 'p{}'.format(p), 1, 1, CellKind.IO, -1, x,
             int(io_rows[p]) * rh))

  grid = int(math.ceil(math.sqrt(n)))
  nets = []
  if cfg.n_nets:
    degrees = onp.asarray(
        random.choice(keys[5], _DEGREES, (cfg.n_nets,),
                      p=_DEGREE_PROBABILITIES))
    centers = onp.asarray(random.randint(keys[6], (cfg.n_nets,), 0, n))
    steps = onp.asarray(
        random.randint(keys[7], (cfg.n_nets, 6, 2), -_NEIGHBOURHOOD,
                       _NEIGHBOURHOOD + 1))
    offsets = onp.asarray(random.uniform(keys[8], (cfg.n_nets, 6, 2)))
    endpoints = onp.asarray(
        random.uniform(keys[9], (cfg.n_nets,)) < cfg.endpoint_fraction)

  for k in range(cfg.n_nets):
    c = int(centers[k])
    gx, gy = c % grid, c // grid
    members = [c]
    for sx, sy in steps[k, :degrees[k] - 1].tolist():
      other = min(max((gx + sx) + (gy + sy) * grid, 0), n - 1)
      if other not in members:
        members.append(other)
    if len(members) < 2 and n > 1:
      members.append(c + 1 if c + 1 < n else c - 1)
    members.sort()
    pins = []
    for j, cell in enumerate(members):
      u, v = offsets[k, j]
      w, h = int(widths[cell]), int(heights[cell])
      pins.append((cell, min(int(u * (w + 1)), w), min(int(v * (h + 1)), h)))
    nets.append(Net(k, 'n{}'.format(k), tuple(pins), bool(endpoints[k])))

  rows = [Row(r * rh, 0, die_w) for r in range(n_rows)]
  design = from_records('synthetic_{}_{}'.format(n, seed), die, rh, rows,
                        cells, nets, fences)
  logging.info(
      'Generated %s: %d cells on a %dx%d die, utilization %.3f.', design.name,
      design.n_cells, die.width, die.height,
      movable_area / float(die.area - macro_area))
  return design

# Copyright 2026 The Placemarks Authors.  All rights reserved.
"""Tests for `placemarks.netlist`."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import io
import os

from absl.testing import absltest
from absl.testing import parameterized
import numpy as onp

from placemarks import netlist
from placemarks.utils import document
from placemarks.utils import errors
from placemarks.utils.geometry import Rect
from placemarks.utils.geometry import Row

TOY_DIR = os.path.join(os.path.dirname(__file__), 'testdata', 'toy')
TOY_AUX = os.path.join(TOY_DIR, 'toy.aux')
TOY_FILES = ('toy.aux', 'toy.nodes', 'toy.nets', 'toy.pl', 'toy.scl')


def _read(name):
  with io.open(os.path.join(TOY_DIR, name), encoding='utf-8') as f:
    return f.read()


def _toy_copy(test, **replacements):
  """Copies the toy bundle into a temporary directory, replacing files."""
  directory = test.create_tempdir()
  for name in TOY_FILES:
    directory.create_file(name, replacements.get(name.replace('.', '_'),
                                                 _read(name)))
  return os.path.join(directory.full_path, 'toy.aux')


def _assert_same_design(test, a, b, endpoints=True):
  test.assertEqual(a.name, b.name)
  test.assertEqual(a.die, b.die)
  test.assertEqual(a.row_height, b.row_height)
  test.assertEqual(a.rows, b.rows)
  test.assertEqual(a.cell_names, b.cell_names)
  test.assertEqual(a.net_names, b.net_names)
  test.assertEqual(a.fence_regions, b.fence_regions)
  fields = ['widths', 'heights', 'kinds', 'region_ids', 'init_xs', 'init_ys',
            'net_starts', 'pin_cells', 'pin_dx', 'pin_dy']
  if endpoints:
    fields.append('net_endpoints')
  for field in fields:
    onp.testing.assert_array_equal(getattr(a, field), getattr(b, field),
                                   err_msg=field)


class BookshelfTest(parameterized.TestCase):

  def testParseToy(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    self.assertEqual(design.name, 'toy')
    self.assertEqual(design.n_cells, 4)
    self.assertEqual(design.n_nets, 2)
    self.assertEqual(design.row_height, 4)
    self.assertEqual(design.rows, (Row(0, 0, 20), Row(4, 0, 20)))
    self.assertEqual(design.die, Rect(0, 0, 20, 8))
    self.assertEqual(design.cell_names, ('a', 'b', 'c', 'p'))
    self.assertEqual(
        [netlist.CellKind(k) for k in design.kinds],
        [netlist.CellKind.MOVABLE] * 3 + [netlist.CellKind.IO])
    self.assertEqual(design.init_xs.tolist(), [0, 6, 3, 19])
    self.assertEqual(design.init_ys.tolist(), [0, 0, 4, 7])

  def testPinOffsetsAreOriginRelative(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    self.assertEqual(design.net_pins(0), ((0, 1, 2), (1, 2, 2)))
    self.assertEqual(design.net_pins(1), ((1, 0, 2), (2, 1, 2), (3, 1, 1)))

  def testEndpointsAreNetsWithFixedSinks(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    self.assertEqual(design.net_endpoints.tolist(), [False, True])
    self.assertEqual([n.endpoint for n in design.nets], [False, True])

  def testRecordViews(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    b = design.cells[1]
    self.assertEqual((b.id, b.name, b.width, b.height, b.x, b.y),
                     (1, 'b', 3, 4, 6, 0))
    self.assertEqual(b.region_id, -1)
    self.assertEqual(design.nets[1].name, 'n1')
    self.assertTrue(design.fixed_mask[3])
    self.assertEqual(design.areas.tolist(), [8, 12, 8, 1])

  def testCellNets(self):
    starts, nets = netlist.cell_nets(netlist.parse_bookshelf(TOY_AUX))
    by_cell = [nets[starts[i]:starts[i + 1]].tolist() for i in range(4)]
    self.assertEqual(by_cell, [[0], [0, 1], [1], [1]])

  def testMissingAux(self):
    with self.assertRaises(errors.MissingFile):
      netlist.parse_bookshelf('/nonexistent/placemarks/toy.aux')

  def testMissingCompanion(self):
    directory = self.create_tempdir()
    directory.create_file(
        'toy.aux', 'RowBasedPlacement : toy.nodes toy.nets toy.pl toy.scl\n')
    directory.create_file('toy.nodes', _read('toy.nodes'))
    with self.assertRaises(errors.MissingFile):
      netlist.parse_bookshelf(os.path.join(directory.full_path, 'toy.aux'))

  def testCellWithoutCoordinates(self):
    pl = 'UCLA pl 1.0\n\na 0 0 : N\nb 6 0 : N\np 19 7 : N /FIXED\n'
    with self.assertRaises(errors.BookshelfSyntaxError) as cm:
      netlist.parse_bookshelf(_toy_copy(self, toy_pl=pl))
    self.assertEqual(cm.exception.token, 'c')
    # The line number belongs to the .nodes entry of c.
    self.assertEqual(os.path.basename(cm.exception.path), 'toy.nodes')
    self.assertEqual(cm.exception.line, 8)

  def testBadNumberIsLocated(self):
    pl = 'UCLA pl 1.0\n\na zz 0 : N\nb 6 0 : N\nc 3 4 : N\np 19 7 : N\n'
    with self.assertRaises(errors.BookshelfSyntaxError) as cm:
      netlist.parse_bookshelf(_toy_copy(self, toy_pl=pl))
    self.assertEqual(cm.exception.line, 3)
    self.assertEqual(cm.exception.token, 'zz')

  def testDanglingPin(self):
    nets = 'NetDegree : 2 n0\n  a O : 0 0\n  q I : 0 0\n'
    with self.assertRaises(errors.DanglingPinReference) as cm:
      netlist.parse_bookshelf(_toy_copy(self, toy_nets=nets))
    self.assertEqual((cm.exception.net, cm.exception.cell), ('n0', 'q'))

  def testShortNet(self):
    nets = ('NetDegree : 3 n0\n  a O : 0 0\n  b I : 0 0\n'
            'NetDegree : 2 n1\n  b O : 0 0\n  c I : 0 0\n')
    with self.assertRaises(errors.BookshelfSyntaxError):
      netlist.parse_bookshelf(_toy_copy(self, toy_nets=nets))

  def testEmptyNets(self):
    design = netlist.parse_bookshelf(_toy_copy(self, toy_nets=''))
    self.assertEqual(design.n_nets, 0)
    self.assertEqual(design.n_cells, 4)

  def testNodeCountMismatch(self):
    nodes = 'NumNodes : 5\n  a 2 4\n  b 3 4\n  c 2 4\n  p 1 1 terminal\n'
    with self.assertRaises(errors.BookshelfSyntaxError):
      netlist.parse_bookshelf(_toy_copy(self, toy_nodes=nodes))

  def testMovableHeightMustMatchRows(self):
    nodes = '  a 2 8\n  b 3 4\n  c 2 4\n  p 1 1 terminal\n'
    with self.assertRaises(errors.BookshelfSyntaxError) as cm:
      netlist.parse_bookshelf(_toy_copy(self, toy_nodes=nodes))
    self.assertEqual(cm.exception.token, 'a')

  def testOverlappingRows(self):
    scl = _read('toy.scl').replace('Coordinate : 4', 'Coordinate : 2')
    with self.assertRaises(errors.OverlappingRows):
      netlist.parse_bookshelf(_toy_copy(self, toy_scl=scl))

  def testVerticalRowsRejected(self):
    scl = _read('toy.scl').replace('CoreRow Horizontal', 'CoreRow Vertical')
    with self.assertRaises(errors.BookshelfSyntaxError):
      netlist.parse_bookshelf(_toy_copy(self, toy_scl=scl))

  def testRoundTrip(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    directory = self.create_tempdir().full_path
    aux = netlist.write_bookshelf(design, directory)
    again = netlist.parse_bookshelf(aux)
    _assert_same_design(self, design, again)
    self.assertEqual(netlist.fingerprint(design), netlist.fingerprint(again))


class FenceTest(parameterized.TestCase):

  def _fenced(self, text):
    path = self.create_tempfile('toy.fence', text).full_path
    return netlist.parse_bookshelf(TOY_AUX, path)

  def testSidecar(self):
    design = self._fenced('region 0 0 0 10 8\nmember 0 a\nmember 0 c\n')
    self.assertEqual(design.region_ids.tolist(), [0, -1, 0, -1])
    self.assertEqual(design.fence_regions,
                     (netlist.FenceRegion(0, (Rect(0, 0, 10, 8),)),))

  def testMultiRectangleRegion(self):
    design = self._fenced('region 0 0 0 4 4\nregion 0 10 4 14 8\n'
                          'member 0 b\n')
    self.assertLen(design.fence_regions[0].rects, 2)

  @parameterized.named_parameters(
      ('unknown_cell', 'region 0 0 0 10 8\nmember 0 zz\n'),
      ('unknown_region', 'region 0 0 0 10 8\nmember 1 a\n'),
      ('two_regions', 'region 0 0 0 10 8\nregion 1 10 0 20 8\n'
       'member 0 a\nmember 1 a\n'),
      ('sparse_ids', 'region 1 0 0 10 8\n'),
      ('empty_rect', 'region 0 3 0 3 8\n'),
      ('garbage', 'fence 0\n'),
  )
  def testBadSidecar(self, text):
    with self.assertRaises(errors.BookshelfSyntaxError):
      self._fenced(text)

  def testRegionOutsideDie(self):
    with self.assertRaises(ValueError):
      self._fenced('region 0 0 0 30 8\nmember 0 a\n')

  def testFixedCellsCannotJoinRegions(self):
    with self.assertRaises(ValueError):
      self._fenced('region 0 0 0 20 8\nmember 0 p\n')


class DocumentTest(parameterized.TestCase):

  def testDumpLoad(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    again = netlist.loads_design(netlist.dump_design(design))
    _assert_same_design(self, design, again)

  def testSaveLoad(self):
    design = netlist.generate_synthetic(
        netlist.SyntheticConfig(60, 50, n_fences=1, n_macros=1), 3)
    path = os.path.join(self.create_tempdir().full_path, 'design.json')
    netlist.save_design(design, path)
    _assert_same_design(self, design, netlist.load_design(path))

  def testCorrupt(self):
    text = netlist.dump_design(netlist.parse_bookshelf(TOY_AUX))
    with self.assertRaises(errors.CorruptDocument):
      netlist.loads_design(text.replace('"widths"', '"wides"'))

  def testInvalidContent(self):
    text = netlist.dump_design(netlist.parse_bookshelf(TOY_AUX))
    payload = document.loads(text, netlist.DESIGN_DOCUMENT)
    # Moves a pin far outside its cell.
    payload['nets']['pin_dx'][0] = 99
    with self.assertRaises(errors.CorruptDocument):
      netlist.loads_design(document.dumps(netlist.DESIGN_DOCUMENT, payload))

  def testFingerprintTracksContent(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    moved = design._replace(init_xs=design.init_xs + 1)
    self.assertNotEqual(netlist.fingerprint(design),
                        netlist.fingerprint(moved))
    self.assertLen(netlist.fingerprint(design), 64)

  def testPlRoundTrip(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    path = os.path.join(self.create_tempdir().full_path, 'out.pl')
    xs, ys = onp.array([2, 8, 11, 19]), onp.array([4, 0, 0, 7])
    netlist.write_pl(design, xs, ys, path)
    read_xs, read_ys = netlist.read_pl(design, path)
    self.assertEqual(read_xs.tolist(), xs.tolist())
    self.assertEqual(read_ys.tolist(), ys.tolist())

  def testPlMissingCell(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    path = self.create_tempfile('short.pl', 'a 0 0 : N\n').full_path
    with self.assertRaises(errors.BookshelfSyntaxError):
      netlist.read_pl(design, path)


class PlacementTest(parameterized.TestCase):

  def testCoordinatesAreIntegers(self):
    p = netlist.Placement([1, 2], [3, 4], netlist.GLOBAL)
    self.assertEqual(p.xs.dtype, onp.int64)
    self.assertTrue(p.converged)

  def testUnknownStage(self):
    with self.assertRaises(ValueError):
      netlist.Placement([0], [0], 'final')

  def testMisalignedArrays(self):
    with self.assertRaises(ValueError):
      netlist.Placement([0, 1], [0], netlist.DETAILED)

  def testMovedCopies(self):
    p = netlist.Placement([1, 2], [3, 4], netlist.LEGALIZED)
    q = p.moved(netlist.DETAILED)
    q.xs[0] = 9
    self.assertEqual(p.xs[0], 1)
    self.assertEqual(q.stage, netlist.DETAILED)

  def testRowIndex(self):
    design = netlist.parse_bookshelf(TOY_AUX)
    self.assertEqual(netlist.row_index(design, 4), 1)
    self.assertEqual(netlist.row_index(design, 0), 0)


class SyntheticTest(parameterized.TestCase):

  def testMinimal(self):
    design = netlist.generate_synthetic(
        netlist.SyntheticConfig(1, 0, utilization=0.1), 0)
    self.assertEqual(design.n_cells, 1)
    self.assertEqual(design.n_nets, 0)

  def testDeterministic(self):
    cfg = netlist.SyntheticConfig(200, 220, n_macros=1, n_fences=1)
    a = netlist.generate_synthetic(cfg, 11)
    b = netlist.generate_synthetic(cfg, 11)
    self.assertEqual(netlist.dump_design(a), netlist.dump_design(b))
    self.assertNotEqual(
        netlist.fingerprint(a),
        netlist.fingerprint(netlist.generate_synthetic(cfg, 12)))

  def testUtilization(self):
    cfg = netlist.SyntheticConfig(2000, 2000, utilization=0.6)
    design = netlist.generate_synthetic(cfg, 7)
    movable = design.movable_mask
    util = design.areas[movable].sum() / float(design.die.area)
    self.assertBetween(util, 0.58, 0.62)

  def testNets(self):
    design = netlist.generate_synthetic(
        netlist.SyntheticConfig(300, 400), 5)
    degrees = onp.diff(design.net_starts)
    self.assertGreaterEqual(degrees.min(), 2)
    self.assertLessEqual(degrees.max(), 6)
    for n in range(design.n_nets):
      cells = [c for c, _, _ in design.net_pins(n)]
      # Drivers come first and have the lowest id.
      self.assertEqual(cells[0], min(cells))

  def testMacrosFencesAndPads(self):
    cfg = netlist.SyntheticConfig(400, 400, n_macros=2, n_fences=2, n_ios=4,
                                  double_height_fraction=0.1)
    design = netlist.generate_synthetic(cfg, 2)
    kinds = design.kinds
    self.assertEqual(int((kinds == netlist.CellKind.MACRO).sum()), 2)
    self.assertEqual(int((kinds == netlist.CellKind.IO).sum()), 4)
    self.assertLen(design.fence_regions, 2)
    self.assertEqual(sorted(set(design.region_ids.tolist())), [-1, 0, 1])
    rh = design.row_height
    self.assertTrue(onp.all(design.heights[design.movable_mask] % rh == 0))
    self.assertIn(2 * rh, design.heights[design.movable_mask].tolist())
    for i in onp.flatnonzero(design.fixed_mask):
      self.assertTrue(design.die.contains_rect(Rect(
          design.init_xs[i], design.init_ys[i],
          design.init_xs[i] + design.widths[i],
          design.init_ys[i] + design.heights[i])))

  @parameterized.named_parameters(
      ('zero_utilization', dict(utilization=0.)),
      ('over_utilized', dict(utilization=0.99)),
      ('no_cells', dict(n_cells=0)),
      ('negative_aspect', dict(die_aspect=-1.)),
  )
  def testInfeasible(self, overrides):
    cfg = netlist.SyntheticConfig(50, 50)._replace(**overrides)
    with self.assertRaises(errors.InfeasibleConfig):
      netlist.generate_synthetic(cfg, 0)

  def testBookshelfRoundTrip(self):
    cfg = netlist.SyntheticConfig(120, 140, n_macros=1, n_fences=1, n_ios=2)
    design = netlist.generate_synthetic(cfg, 4)
    directory = self.create_tempdir().full_path
    aux = netlist.write_bookshelf(design, directory)
    fence = os.path.join(directory, design.name + '.fence')
    again = netlist.parse_bookshelf(aux, fence)
    # Endpoint flags are derived from fixed sinks when parsing Bookshelf.
    _assert_same_design(self, design, again, endpoints=False)


if __name__ == '__main__':
  absltest.main()

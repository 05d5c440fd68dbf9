# Copyright 2026 The Placemarks Authors.  All rights reserved.
"""Tests for `placemarks.baselines`."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import os

from absl.testing import absltest
from absl.testing import parameterized
import numpy as onp

from placemarks import baselines
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils import utils

TOY_AUX = os.path.join(os.path.dirname(__file__), 'testdata', 'toy',
                       'toy.aux')


def _toy():
  design = netlist.parse_bookshelf(TOY_AUX)
  return design, netlist.Placement(design.init_xs, design.init_ys,
                                   netlist.DETAILED)


class _SyntheticCase(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super(_SyntheticCase, cls).setUpClass()
    cls.design = netlist.generate_synthetic(
        netlist.SyntheticConfig(300, 360), 13)
    cls.legal = placer.legalize(
        cls.design,
        placer.global_place(cls.design,
                            params=placer.PlaceParams(max_iterations=8)))
    cls.signature = utils.random_signature(24, 13)


class RowParityTest(_SyntheticCase):

  def testToy(self):
    design, placement = _toy()
    marked, wm = baselines.row_parity_insert(design, placement, (1, 0, 1), 0)
    self.assertEqual(sorted(wm.cells), [0, 1, 2])
    self.assertEqual(wm.evidence, (1, 0, 1))
    self.assertEqual(baselines.row_parity_extract(design, marked, wm), 100.)
    self.assertTrue(metrics.check_legal(design, marked).is_legal)

  def testNotEnoughCells(self):
    design, placement = _toy()
    with self.assertRaises(errors.InsufficientCandidates) as cm:
      baselines.row_parity_insert(design, placement, (1, 0, 1, 1), 0)
    self.assertEqual(cm.exception.axis, 'row')

  def testSynthetic(self):
    placement, wm = baselines.row_parity_insert(self.design, self.legal,
                                                self.signature, 4)
    self.assertEqual(placement.stage, netlist.DETAILED)
    self.assertLen(set(wm.cells), len(self.signature))
    self.assertTrue(metrics.check_legal(self.design, placement).is_legal)
    self.assertEqual(
        baselines.row_parity_extract(self.design, placement, wm), 100.)
    self.assertEqual(baselines.extract(self.design, placement, wm), 100.)

  def testWrongRow(self):
    placement, wm = baselines.row_parity_insert(self.design, self.legal,
                                                self.signature, 4)
    ys = placement.ys.copy()
    c = wm.cells[0]
    ys[c] += self.design.row_height
    rate = baselines.row_parity_extract(self.design, placement.moved(ys=ys),
                                        wm)
    self.assertEqual(rate, 100. * 23 / 24)


class CellScatteringTest(parameterized.TestCase):

  def testToy(self):
    design, placement = _toy()
    scattered, wm = baselines.cell_scattering_insert(design, placement,
                                                     (1, 0), 3)
    self.assertEqual(scattered.stage, netlist.DETAILED)
    self.assertTrue(metrics.check_legal(design, scattered).is_legal)
    (_, _, dx1, dy1), (_, _, dx0, dy0) = wm.evidence
    # 1-bits move along y, 0-bits along x.
    self.assertEqual(dx1, 0)
    self.assertEqual(abs(dy1), design.row_height)
    self.assertEqual((abs(dx0), dy0), (1, 0))
    self.assertEqual(
        baselines.cell_scattering_extract(design, scattered, wm), 100.)

  @parameterized.named_parameters(
      ('one_reverted', 1, 50.),
      ('all_reverted', 2, 0.),
  )
  def testReverted(self, n, expected):
    design, placement = _toy()
    scattered, wm = baselines.cell_scattering_insert(design, placement,
                                                     (1, 0), 3)
    xs, ys = scattered.xs.copy(), scattered.ys.copy()
    for c in wm.cells[:n]:
      xs[c], ys[c] = placement.xs[c], placement.ys[c]
    self.assertEqual(
        baselines.extract(design, scattered.moved(xs=xs, ys=ys), wm),
        expected)

  def testPoolTooSmall(self):
    design, placement = _toy()
    with self.assertRaises(errors.InsufficientCandidates):
      baselines.cell_scattering_insert(design, placement, (0, 0, 0, 0), 3)


class BufferInsertionTest(_SyntheticCase):

  def testToy(self):
    design, placement = _toy()
    marked, placed, wm = baselines.buffer_insertion_insert(
        design, placement, (0,), 0)
    self.assertEqual(marked.n_cells, design.n_cells + 2)
    self.assertEqual(marked.n_nets, design.n_nets + 2)
    self.assertEqual(marked.cell_names[4:], ('wmbuf_0_0', 'wmbuf_0_1'))
    # n0 is the only net that is not a timing endpoint; b is its sink.
    self.assertEqual(wm.cells, (1,))
    self.assertEqual(wm.evidence, (('b', ('wmbuf_0_0', 'wmbuf_0_1')),))
    self.assertEqual(marked.net_pins(0)[-1], (4, 0, 0))
    self.assertEqual(marked.net_pins(3), ((5, 0, 0), (1, 2, 2)))
    self.assertTrue(metrics.check_legal(marked, placed).is_legal)
    self.assertEqual(baselines.buffer_insertion_extract(marked, wm), 100.)
    self.assertEqual(baselines.buffer_insertion_extract(design, wm), 0.)

  def testBuffersTakeNearestFreeSites(self):
    design, placement = _toy()
    marked, _, _ = baselines.buffer_insertion_insert(design, placement, (0,),
                                                     0)
    self.assertEqual(marked.init_xs[4:].tolist(), [5, 4])
    self.assertEqual(marked.init_ys[4:].tolist(), [0, 0])

  def testShortenedChain(self):
    design, placement = _toy()
    marked, _, wm = baselines.buffer_insertion_insert(design, placement, (0,),
                                                      0)
    # Drop the second buffer and let the first one drive b directly.
    nets = marked.nets[:2] + (netlist.Net(2, 'wmbuf_net_0_0',
                                          ((4, 0, 0), (1, 2, 2)), False),)
    shortened = netlist.from_records(marked.name, marked.die,
                                     marked.row_height, marked.rows,
                                     marked.cells[:5], nets,
                                     marked.fence_regions)
    self.assertEqual(baselines.buffer_insertion_extract(shortened, wm), 0.)
    forged = wm._replace(evidence=(('b', ('wmbuf_0_0',)),))
    self.assertEqual(baselines.buffer_insertion_extract(shortened, forged),
                     100.)

  def testNoMargin(self):
    design, placement = _toy()
    with self.assertRaises(errors.NoTimingMargin):
      baselines.buffer_insertion_insert(design, placement, (1,), 0,
                                        metrics.DelayModel(1., 10.))

  def testTooFewNets(self):
    design, placement = _toy()
    with self.assertRaises(errors.InsufficientCandidates) as cm:
      baselines.buffer_insertion_insert(design, placement, (1, 1), 0)
    self.assertEqual((cm.exception.axis, cm.exception.available), ('net', 1))

  def testSynthetic(self):
    marked, placed, wm = baselines.buffer_insertion_insert(
        self.design, self.legal, self.signature, 2)
    n_buffers = sum(1 if b else 2 for b in self.signature)
    self.assertEqual(marked.n_cells, self.design.n_cells + n_buffers)
    self.assertTrue(metrics.check_legal(marked, placed).is_legal)
    self.assertEqual(baselines.extract(marked, placed, wm), 100.)
    self.assertEqual(
        onp.sum(marked.kinds == netlist.CellKind.BUFFER), n_buffers)


class DocumentTest(parameterized.TestCase):

  def testBufferEvidence(self):
    wm = baselines.BaselineWatermark(
        baselines.BUFFER_INSERTION, (1,), (('b', ('wmbuf_0_0',)),))
    self.assertEqual(baselines.BaselineWatermark.from_dict(wm.to_dict()), wm)

  def testScatteringEvidence(self):
    wm = baselines.BaselineWatermark(baselines.CELL_SCATTERING, (2, 0),
                                     ((3, 4, 0, -4), (0, 0, 1, 0)))
    self.assertEqual(baselines.BaselineWatermark.from_dict(wm.to_dict()), wm)

  def testUnknownScheme(self):
    with self.assertRaises(ValueError):
      baselines.BaselineWatermark.from_dict(
          {'scheme': 'other', 'cells': [], 'evidence': []})
    with self.assertRaises(ValueError):
      baselines.extract(None, None,
                        baselines.BaselineWatermark('other', (), ()))


if __name__ == '__main__':
  absltest.main()

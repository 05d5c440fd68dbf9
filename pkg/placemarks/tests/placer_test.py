# Copyright 2026 The Placemarks Authors.  All rights reserved.
"""Tests for `placemarks.placer`."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import os
from unittest import mock

from absl.testing import absltest
from absl.testing import parameterized
import numpy as onp

from placemarks import dw
from placemarks import gw
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils.geometry import Rect

TOY_AUX = os.path.join(os.path.dirname(__file__), 'testdata', 'toy',
                       'toy.aux')

PARAMS = placer.PlaceParams(max_iterations=8, seed=1)


def _toy():
  return netlist.parse_bookshelf(TOY_AUX)


def _toy_placement(design):
  return netlist.Placement(design.init_xs, design.init_ys, netlist.LEGALIZED)


def _synthetic(n_cells=200, **kwargs):
  return netlist.generate_synthetic(
      netlist.SyntheticConfig(n_cells, int(1.2 * n_cells), **kwargs), 11)


class ParamsTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('zero_density', dict(density_target=0.)),
      ('dense', dict(density_target=1.5)),
      ('no_iterations', dict(max_iterations=0)),
      ('shrinking_weight', dict(density_weight_multiplier=0.5)),
      ('empty_bins', dict(bins=(0, 4))),
  )
  def testRejects(self, kwargs):
    with self.assertRaises(ValueError):
      placer.PlaceParams(**kwargs)

  def testBinsBecomeTuple(self):
    self.assertEqual(placer.PlaceParams(bins=[4, 2]).bins, (4, 2))


class ConstraintsTest(parameterized.TestCase):

  def testLabels(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 5, 8), [2, 0])
    self.assertEqual(constraints.wm_cells, (0, 2))
    self.assertEqual(
        constraints.labels(design).tolist(),
        [placer.WATERMARK_LABEL, -1, placer.WATERMARK_LABEL, -1])
    self.assertEqual(constraints.rects_of(placer.WATERMARK_LABEL),
                     (Rect(0, 0, 5, 8),))
    self.assertEqual(constraints.rects_of(placer.DEFAULT_LABEL), ())

  def testFixedMembersRejected(self):
    design = _toy()
    with self.assertRaises(ValueError):
      placer.RegionConstraintSet.for_design(design, Rect(0, 0, 5, 8), [3])

  def testWatermarkMustAvoidMacros(self):
    design = _synthetic(n_macros=1)
    m = design.cell_names.index('m0')
    x, y = int(design.init_xs[m]), int(design.init_ys[m])
    with self.assertRaises(ValueError):
      placer.RegionConstraintSet.for_design(design, Rect(x, y, x + 4, y + 4),
                                            [0])

  def testWithWatermarkKeepsFences(self):
    design = _synthetic(n_fences=1)
    base = placer.RegionConstraintSet.for_design(design)
    marked = base.with_watermark(Rect(0, 0, 8, 8), [5])
    self.assertEqual(marked.fences, base.fences)
    self.assertEqual(marked.wm_cells, (5,))
    self.assertIsNone(base.wm_rect)


class FreeSpaceTest(parameterized.TestCase):

  def testFixedCellsCarveRows(self):
    design = _toy()
    levels, segments = placer.free_space(
        design, placer.RegionConstraintSet.for_design(design))
    self.assertEqual(levels, [0, 4])
    self.assertEqual(segments, [[(0, 20, -1)], [(0, 19, -1)]])

  def testRegionsLabelSegments(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(5, 0, 10, 8), [0])
    _, segments = placer.free_space(design, constraints)
    self.assertEqual(segments[0], [(0, 5, -1), (5, 10, -2), (10, 20, -1)])
    self.assertEqual(segments[1], [(0, 5, -1), (5, 10, -2), (10, 19, -1)])

  def testBlockers(self):
    design = _toy()
    _, segments = placer.free_space(
        design, placer.RegionConstraintSet.for_design(design),
        blockers=[(4, 0, 2, 8)])
    self.assertEqual(segments, [[(0, 4, -1), (6, 20, -1)],
                                [(0, 4, -1), (6, 19, -1)]])


class RowOccupancyTest(parameterized.TestCase):

  def testFits(self):
    design = _toy()
    rows = placer.RowOccupancy(design, _toy_placement(design))
    self.assertTrue(rows.fits(0, 3, 0))
    self.assertFalse(rows.fits(0, 5, 0))  # overlaps b
    self.assertFalse(rows.fits(0, 0, 8))  # no row
    self.assertFalse(rows.fits(2, 18, 4))  # overlaps the pad

  def testFitsRespectsClasses(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 5, 8), [0])
    placement = netlist.Placement([0, 6, 10, 19], [0, 0, 4, 7],
                                  netlist.LEGALIZED)
    rows = placer.RowOccupancy(design, placement, constraints)
    self.assertTrue(rows.fits(0, 2, 4))
    self.assertFalse(rows.fits(0, 4, 0))  # crosses into the default class
    self.assertFalse(rows.fits(1, 2, 0))

  def testNearestFreeX(self):
    design = _toy()
    rows = placer.RowOccupancy(design, _toy_placement(design))
    self.assertEqual(rows.nearest_free_x(0, 1, 4), 5)
    self.assertEqual(rows.nearest_free_x(0, 0, 7), 9)

  def testMoveUpdatesIndex(self):
    design = _toy()
    rows = placer.RowOccupancy(design, _toy_placement(design))
    rows.move(0, 10, 4)
    self.assertFalse(rows.fits(2, 9, 4))
    self.assertTrue(rows.fits(1, 0, 0))
    placement = rows.placement(netlist.LEGALIZED)
    self.assertEqual((placement.xs[0], placement.ys[0]), (10, 4))
    self.assertTrue(metrics.check_legal(design, placement).is_legal)

  def testReserve(self):
    design = _toy()
    rows = placer.RowOccupancy(design, _toy_placement(design))
    rows.reserve(0, 12, 15, -1)
    self.assertFalse(rows.fits(0, 13, 0))
    self.assertEqual(rows.nearest_slot(0, 12, 3, placer.DEFAULT_LABEL), 9)


class GlobalPlaceTest(parameterized.TestCase):

  def testInsideDieAndFixedKept(self):
    design = _synthetic(n_ios=4)
    placement = placer.global_place(design, params=PARAMS)
    self.assertEqual(placement.stage, netlist.GLOBAL)
    die = design.die
    self.assertTrue(onp.all(placement.xs >= die.x_lo))
    self.assertTrue(onp.all(placement.ys >= die.y_lo))
    self.assertTrue(onp.all(placement.xs + design.widths <= die.x_hi))
    self.assertTrue(onp.all(placement.ys + design.heights <= die.y_hi))
    fixed = design.fixed_mask
    onp.testing.assert_array_equal(placement.xs[fixed], design.init_xs[fixed])
    onp.testing.assert_array_equal(placement.ys[fixed], design.init_ys[fixed])

  def testDeterministic(self):
    design = _synthetic()
    a = placer.global_place(design, params=PARAMS)
    b = placer.global_place(design, params=PARAMS)
    onp.testing.assert_array_equal(a.xs, b.xs)
    onp.testing.assert_array_equal(a.ys, b.ys)

  def testMoreIterationsNeverWorse(self):
    design = _synthetic()
    placement = placer.global_place(design, params=PARAMS)
    spread = placer.global_place(
        design, params=placer.PlaceParams(max_iterations=1, seed=1))
    self.assertLessEqual(
        metrics.hpwl(design, placement), metrics.hpwl(design, spread))

  def testRegionInfeasible(self):
    design = _synthetic()
    with self.assertRaises(errors.RegionInfeasible) as cm:
      placer.global_place(design,
                          params=placer.PlaceParams(density_target=0.3))
    self.assertEqual(cm.exception.region, 'default')

  def testWatermarkHeldEveryIteration(self):
    design = _synthetic(400)
    _, _, original = placer.run_pipeline(design, params=PARAMS)
    wm = gw.select_region(design, original,
                          gw.GwParams(n_signature_bits=10))
    constraints = placer.RegionConstraintSet.for_design(
        design, wm.region, wm.cells)
    members = onp.zeros((design.n_cells,), bool)
    members[list(wm.cells)] = True
    project = placer._project
    seen = []

    def recording(*args):
      xs, ys = project(*args)
      seen.append((xs.copy(), ys.copy()))
      return xs, ys

    with mock.patch.object(placer, '_project', side_effect=recording):
      placement = placer.global_place(design, constraints, PARAMS)
    self.assertGreater(len(seen), 2)
    r = wm.region
    for xs, ys in seen + [(placement.xs, placement.ys)]:
      cx2 = 2 * xs + design.widths
      cy2 = 2 * ys + design.heights
      inside = ((2 * r.x_lo <= cx2) & (cx2 < 2 * r.x_hi) &
                (2 * r.y_lo <= cy2) & (cy2 < 2 * r.y_hi))
      onp.testing.assert_array_equal(inside & design.movable_mask, members)

  def testWatermarkRegionInfeasible(self):
    design = _synthetic()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 4, 4), range(20))
    with self.assertRaises(errors.RegionInfeasible) as cm:
      placer.global_place(design, constraints, PARAMS)
    self.assertEqual(cm.exception.region, 'watermark')


class LegalizeTest(parameterized.TestCase):

  def testLegalInputIsKept(self):
    design = _toy()
    placement = placer.legalize(design, _toy_placement(design))
    self.assertEqual(placement.stage, netlist.LEGALIZED)
    onp.testing.assert_array_equal(placement.xs, design.init_xs)
    onp.testing.assert_array_equal(placement.ys, design.init_ys)

  def testSnapsOverlaps(self):
    design = _toy()
    placement = netlist.Placement([0, 1, 3, 19], [1, 0, 5, 7],
                                  netlist.GLOBAL)
    legal = placer.legalize(design, placement)
    self.assertTrue(metrics.check_legal(design, legal).is_legal)

  def testWatermarkExclusivity(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 5, 8), [0])
    legal = placer.legalize(design, _toy_placement(design), constraints)
    # c has to leave the watermark region.
    self.assertEqual((legal.xs[2], legal.ys[2]), (5, 4))
    self.assertEqual((legal.xs[0], legal.ys[0]), (0, 0))
    self.assertTrue(metrics.check_legal(design, legal, constraints).is_legal)

  def testPaddingLeavesRoom(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 10, 4), [0, 1])
    placement = netlist.Placement([0, 2, 3, 19], [0, 0, 4, 7],
                                  netlist.GLOBAL)
    packed = placer.legalize(design, placement, constraints)
    padded = placer.legalize(design, placement, constraints,
                             padding={placer.WATERMARK_LABEL: 1})
    self.assertEqual(packed.xs[:2].tolist(), [0, 2])
    self.assertEqual(padded.xs[:2].tolist(), [0, 3])
    self.assertEqual(padded.xs[2:].tolist(), [3, 19])
    self.assertTrue(metrics.check_legal(design, padded, constraints).is_legal)
    # a can only shift once b stops abutting it.
    self.assertNotIn(
        0, dw.select_candidates(design, packed, constraints=constraints,
                                restrict_to=[0, 1]).x_cells)
    self.assertIn(
        0, dw.select_candidates(design, padded, constraints=constraints,
                                restrict_to=[0, 1]).x_cells)

  def testOverflow(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 1, 8), [0])
    with self.assertRaises(errors.LegalizationOverflow) as cm:
      placer.legalize(design, _toy_placement(design), constraints)
    self.assertEqual(cm.exception.cell, 0)

  @parameterized.named_parameters(
      ('plain', dict()),
      ('fences', dict(n_fences=2)),
      ('macros_and_pads', dict(n_macros=2, n_ios=6)),
      ('double_height', dict(double_height_fraction=0.1)),
  )
  def testLegalAfterGlobal(self, kwargs):
    design = _synthetic(300, **kwargs)
    placement = placer.legalize(design,
                                placer.global_place(design, params=PARAMS))
    report = metrics.check_legal(design, placement)
    self.assertTrue(report.is_legal, report)


class DetailedPlaceTest(parameterized.TestCase):

  def testToySlidesTowardsNets(self):
    design = _toy()
    before = _toy_placement(design)
    after = placer.detailed_place(design, before)
    self.assertEqual(after.stage, netlist.DETAILED)
    self.assertLess(metrics.hpwl(design, after), metrics.hpwl(design, before))
    self.assertTrue(metrics.check_legal(design, after).is_legal)
    onp.testing.assert_array_equal(after.ys, before.ys)

  def testNeverWorse(self):
    design = _synthetic(300, n_fences=1)
    legal = placer.legalize(design, placer.global_place(design, params=PARAMS))
    detailed = placer.detailed_place(design, legal, params=PARAMS)
    self.assertLessEqual(metrics.hpwl(design, detailed),
                         metrics.hpwl(design, legal))
    self.assertTrue(metrics.check_legal(design, detailed).is_legal)
    onp.testing.assert_array_equal(detailed.ys, legal.ys)
    again = placer.detailed_place(design, legal, params=PARAMS)
    onp.testing.assert_array_equal(again.xs, detailed.xs)

  def testKeepsWatermarkMembers(self):
    design = _toy()
    constraints = placer.RegionConstraintSet.for_design(
        design, Rect(0, 0, 5, 8), [0])
    legal = placer.legalize(design, _toy_placement(design), constraints)
    detailed = placer.detailed_place(design, legal, constraints)
    self.assertTrue(
        metrics.check_legal(design, detailed, constraints).is_legal)


class PipelineTest(parameterized.TestCase):

  def testStages(self):
    design = _synthetic()
    p_global, p_legal, p_detailed = placer.run_pipeline(design, params=PARAMS)
    self.assertEqual(
        [p.stage for p in (p_global, p_legal, p_detailed)],
        [netlist.GLOBAL, netlist.LEGALIZED, netlist.DETAILED])
    self.assertTrue(metrics.check_legal(design, p_detailed).is_legal)
    self.assertLessEqual(metrics.hpwl(design, p_detailed),
                         metrics.hpwl(design, p_legal))

  def testPlacementFile(self):
    design = _synthetic()
    _, _, placement = placer.run_pipeline(design, params=PARAMS)
    path = os.path.join(self.create_tempdir().full_path, 'placement.pl')
    placer.write_pl(design, placement, path)
    loaded = placer.read_pl(design, path)
    self.assertEqual(loaded.stage, netlist.DETAILED)
    onp.testing.assert_array_equal(loaded.xs, placement.xs)
    onp.testing.assert_array_equal(loaded.ys, placement.ys)


if __name__ == '__main__':
  absltest.main()

# Copyright 2026 The Placemarks Authors.  All rights reserved.
"""Tests for `placemarks.attacks`."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import os

from absl.testing import absltest
from absl.testing import parameterized
import numpy as onp

from placemarks import attacks
from placemarks import gw
from placemarks import icmarks
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils.geometry import Rect

TOY_AUX = os.path.join(os.path.dirname(__file__), 'testdata', 'toy',
                       'toy.aux')

PLACE_PARAMS = placer.PlaceParams(max_iterations=8, seed=3)
SIGNATURE = (1, 0, 1, 1, 0, 0, 1, 0)


def _toy():
  design = netlist.parse_bookshelf(TOY_AUX)
  return design, netlist.Placement(design.init_xs, design.init_ys,
                                   netlist.DETAILED)


def _outcome(wer, pwlr, wer_gw=None, scheme=icmarks.DW, param=0.1, seed=0):
  return attacks.AttackOutcome(None, pwlr, wer_gw, wer, wer, scheme,
                               attacks.SLA, param, seed, attacks.WER_MIN,
                               attacks.PWLR_MAX)


class PerturbationTest(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super(PerturbationTest, cls).setUpClass()
    cls.design = netlist.generate_synthetic(
        netlist.SyntheticConfig(300, 360), 8)
    _, _, cls.placement = placer.run_pipeline(cls.design, params=PLACE_PARAMS)

  def testSwapKeepsPositions(self):
    swapped, n_pairs = attacks.swap_locations(self.design, self.placement,
                                              0.1, 1)
    self.assertEqual(n_pairs, 15)
    self.assertEqual(swapped.stage, netlist.GLOBAL)
    before = sorted(zip(self.placement.xs.tolist(), self.placement.ys.tolist()))
    after = sorted(zip(swapped.xs.tolist(), swapped.ys.tolist()))
    self.assertEqual(before, after)
    changed = ((swapped.xs != self.placement.xs) |
               (swapped.ys != self.placement.ys))
    self.assertEqual(int(changed.sum()), 30)

  def testSwapDeterministic(self):
    a, _ = attacks.swap_locations(self.design, self.placement, 0.1, 1)
    b, _ = attacks.swap_locations(self.design, self.placement, 0.1, 1)
    onp.testing.assert_array_equal(a.xs, b.xs)
    onp.testing.assert_array_equal(a.ys, b.ys)

  def testPerturbIsLegal(self):
    shifted, n_moved = attacks.perturb_cells(self.design, self.placement,
                                             0.05, 2)
    self.assertBetween(n_moved, 1, 15)
    changed = ((shifted.xs != self.placement.xs) |
               (shifted.ys != self.placement.ys))
    self.assertEqual(int(changed.sum()), n_moved)
    self.assertTrue(metrics.check_legal(self.design, shifted).is_legal)

  def testToyWindows(self):
    design, placement = _toy()
    params = gw.GwParams(10, 8, n_signature_bits=2)
    self.assertEqual(attacks.top_windows(design, placement, params, 5),
                     [Rect(0, 0, 10, 8)])
    shifted, n_moved = attacks.shift_windows(design, placement,
                                             [Rect(0, 0, 10, 8)], 0)
    self.assertGreaterEqual(n_moved, 1)
    self.assertTrue(metrics.check_legal(design, shifted).is_legal)
    self.assertEqual(shifted.xs[3], placement.xs[3])


class AttackTest(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super(AttackTest, cls).setUpClass()
    design = netlist.generate_synthetic(netlist.SyntheticConfig(400, 480), 3)
    cls.design, cls.placement, cls.cert = icmarks.watermark(
        design, icmarks.ICMARKS, SIGNATURE, seed=7, place_params=PLACE_PARAMS)

  def testNothingToSwap(self):
    # 0.001 of 400 cells rounds down to no pair at all.
    outcome = attacks.attack_sla(self.design, self.placement, self.cert,
                                 0.001)
    self.assertIs(outcome.placement, self.placement)
    self.assertEqual(outcome.wer, 100.)
    self.assertFalse(outcome.success)

  def testSwapAttackIsLegal(self):
    outcome = attacks.attack_sla(self.design, self.placement, self.cert, 0.02,
                                 seed=1, place_params=PLACE_PARAMS)
    self.assertEqual((outcome.attack, outcome.param, outcome.seed),
                     (attacks.SLA, 0.02, 1))
    self.assertEqual(outcome.placement.stage, netlist.DETAILED)
    self.assertTrue(
        metrics.check_legal(self.design, outcome.placement).is_legal)
    self.assertBetween(outcome.wer, 0., 100.)

  def testPerturbationAttack(self):
    outcome = attacks.attack_cpa(self.design, self.placement, self.cert, 0.05,
                                 seed=3, place_params=PLACE_PARAMS)
    self.assertTrue(
        metrics.check_legal(self.design, outcome.placement).is_legal)
    self.assertEqual(outcome.scheme, icmarks.ICMARKS)

  def testOptimizationAttack(self):
    outcome = attacks.attack_oa(self.design, self.placement, self.cert,
                                PLACE_PARAMS)
    self.assertEqual(outcome.param, 2 * PLACE_PARAMS.detail_passes)
    self.assertIsNone(outcome.seed)
    self.assertLessEqual(
        metrics.hpwl(self.design, outcome.placement),
        metrics.hpwl(self.design, self.placement))

  def testOptimizationFindsNothingToUndo(self):
    outcome = attacks.attack_oa(self.design, self.placement, self.cert,
                                PLACE_PARAMS)
    self.assertEqual(outcome.placement.xs.tolist(), self.placement.xs.tolist())
    self.assertEqual((outcome.wer_gw, outcome.wer_dw), (100., 100.))
    self.assertFalse(outcome.success)

  def testRegionAttack(self):
    outcome = attacks.attack_ara(self.design, self.placement, self.cert,
                                 top_k=2, seed=5, place_params=PLACE_PARAMS)
    self.assertEqual(outcome.param, 2)
    self.assertTrue(
        metrics.check_legal(self.design, outcome.placement).is_legal)

  @parameterized.named_parameters(
      ('sla_too_large', attacks.attack_sla, dict(fraction=0.6)),
      ('cpa_zero', attacks.attack_cpa, dict(fraction=0.)),
      ('ara_no_windows', attacks.attack_ara, dict(top_k=0)),
  )
  def testInvalidParams(self, attack, kwargs):
    with self.assertRaises(errors.InvalidParams):
      attack(self.design, self.placement, self.cert, **kwargs)

  def testUnknownAttack(self):
    with self.assertRaises(ValueError):
      attacks.run_attack(self.design, self.placement, self.cert,
                         attacks.Trial('smudge', None, 0))

  def testTrialsKeepOrderAcrossWorkers(self):
    trials = [attacks.Trial(attacks.SLA, 0.02, s) for s in range(3)]
    serial = attacks.run_trials(self.design, self.placement, self.cert,
                                trials, place_params=PLACE_PARAMS)
    parallel = attacks.run_trials(self.design, self.placement, self.cert,
                                  trials, workers=3,
                                  place_params=PLACE_PARAMS)
    self.assertEqual([o.seed for o in parallel], [0, 1, 2])
    self.assertEqual([o.wer for o in serial], [o.wer for o in parallel])
    self.assertEqual([o.pwlr for o in serial], [o.pwlr for o in parallel])


class RegionAttackTest(parameterized.TestCase):

  @classmethod
  def setUpClass(cls):
    super(RegionAttackTest, cls).setUpClass()
    design = netlist.generate_synthetic(netlist.SyntheticConfig(400, 480), 3)
    cls.design, cls.placement, cls.cert = icmarks.watermark(
        design, icmarks.GW, SIGNATURE, seed=7, place_params=PLACE_PARAMS)

  def testOptimization(self):
    outcome = attacks.attack_oa(self.design, self.placement, self.cert,
                                PLACE_PARAMS)
    self.assertEqual(outcome.wer_gw, 100.)
    self.assertIsNone(outcome.wer_dw)

  def testRestoreOnlyLeavesRegionIntact(self):
    # Legalization and detailed placement alone, as every attack ends.
    restored = attacks._restore(self.design, self.placement, PLACE_PARAMS)
    self.assertEqual(
        gw.extract_gw(self.design, restored, self.cert.gw), 100.)

  def testSingleSwap(self):
    outcome = attacks.attack_sla(self.design, self.placement, self.cert,
                                 0.005, seed=1, place_params=PLACE_PARAMS)
    self.assertTrue(
        metrics.check_legal(self.design, outcome.placement).is_legal)
    self.assertGreaterEqual(outcome.wer_gw, 80.)


class OutcomeTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('removed', 50., 1.001, True),
      ('too_costly', 50., 1.01, False),
      ('survived', 95., 1., False),
      ('at_threshold', 90., 1., False),
  )
  def testSuccess(self, wer, pwlr, expected):
    self.assertEqual(_outcome(wer, pwlr).success, expected)

  def testRow(self):
    row = _outcome(80., 1.002).to_row()
    self.assertEqual(row['wer_gw'], '')
    self.assertEqual(row['wer'], '80.000000')
    self.assertEqual(row['success'], 1)

  def testWriteReadSummarize(self):
    path = os.path.join(self.create_tempdir().full_path, 'outcome.csv')
    attacks.write_outcomes(path, [_outcome(80., 1.002, seed=0),
                                  _outcome(100., 1., seed=1)])
    attacks.write_outcomes(path, [_outcome(60., 1.1, scheme=icmarks.GW)],
                           append=True)
    rows = attacks.read_outcomes(path)
    self.assertLen(rows, 3)
    summary = attacks.summarize_outcomes(rows)
    self.assertEqual(summary, [
        {
            'scheme': 'dw',
            'attack': 'sla',
            'param': '0.1',
            'trials': 2,
            'mean_wer': '90.000000',
            'min_wer': '80.000000',
            'mean_pwlr': '1.001000',
            'successes': 1,
        },
        {
            'scheme': 'gw',
            'attack': 'sla',
            'param': '0.1',
            'trials': 1,
            'mean_wer': '60.000000',
            'min_wer': '60.000000',
            'mean_pwlr': '1.100000',
            'successes': 0,
        },
    ])

  def testRejectsOtherTable(self):
    path = self.create_tempfile('other.csv', 'a,b\n1,2\n').full_path
    with self.assertRaises(errors.CorruptDocument):
      attacks.read_outcomes(path)


if __name__ == '__main__':
  absltest.main()

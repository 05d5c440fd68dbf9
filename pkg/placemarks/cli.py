# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Command line front-end.

Usage:
  placemarks <command> [--flag=value ...]

Commands:
  gen        generate a synthetic design.
  place      run the placement pipeline.
  watermark  insert a watermark with `--scheme`.
  attack     run removal attack trials against a watermarked placement.
  verify     extract a watermark; exits 3 below `--wer_min`.
  report     aggregate outcome and capacity CSVs.
  capacity   sweep signature lengths per scheme.

Every command that writes outputs also writes `<out>/config.resolved`. It is a
flagfile holding the resolved value of every flag, so
`placemarks <command> --flagfile=<out>/config.resolved` repeats the run.

Exit codes: 0 success, 1 pipeline error, 2 usage error, 3 verification below
threshold.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import csv
import io
import os
import sys

from absl import flags
from absl import logging

from placemarks import attacks
from placemarks import dw
from placemarks import gw
from placemarks import icmarks
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import errors
from placemarks.utils import flags as placemarks_flags
from placemarks.utils import utils

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_BELOW_THRESHOLD = 3

SEED_ENV = 'WM_SEED'

PLACEMENT_FILE = 'placement.pl'
CERTIFICATE_FILE = 'cert.wmcert'
OUTCOME_FILE = 'outcome.csv'
CONFIG_FILE = 'config.resolved'
DESIGN_FILE = 'design.json'
REPORT_FILE = 'report.csv'
CAPACITY_FILE = 'capacity.csv'
ATTACK_SUMMARY_FILE = 'attack_summary.csv'
CAPACITY_SUMMARY_FILE = 'capacity_summary.csv'
VERIFY_FILE = 'verify.csv'


class UsageError(Exception):
  """Invalid command line."""


# Flag resolution.


def _seed(fv):
  if fv.seed is not None:
    return fv.seed
  value = os.environ.get(SEED_ENV)
  if value is None:
    return 0
  try:
    seed = int(value)
  except ValueError:
    raise UsageError('{} must be an integer, got {!r}'.format(SEED_ENV,
                                                              value))
  if seed < 0:
    raise UsageError('{} must be non-negative, got {}'.format(SEED_ENV, seed))
  return seed


def _require(fv, *names):
  for name in names:
    if fv[name].value is None:
      raise UsageError('--{} is required'.format(name))


def _out(fv, path):
  _require(fv, 'out')
  return os.path.join(fv.out, path)


def _load_design(fv):
  _require(fv, 'design')
  if fv.design.endswith('.aux'):
    return netlist.parse_bookshelf(fv.design, fv.fences)
  design = netlist.load_design(fv.design)
  if fv.fences:
    design = netlist.parse_fences(fv.fences, design)
  return design


def _place_params(fv, seed):
  return placer.PlaceParams(
      density_target=fv.density_target, max_iterations=fv.max_iterations,
      seed=seed, detail_passes=fv.detail_passes)


def _gw_params(fv, n_bits):
  return gw.GwParams(fv.window, fv.window, fv.stride, fv.alpha, fv.beta,
                     fv.gamma, n_bits)


def _delay_model(fv):
  return metrics.DelayModel(fv.unit_delay, fv.rat)


def _signature(fv, seed):
  if fv.signature is not None:
    try:
      return utils.parse_signature(fv.signature)
    except ValueError as e:
      raise UsageError(str(e))
  return utils.random_signature(fv.bits, seed)


def _echo_config(fv, command, seed):
  """Writes the resolved flags as a flagfile that repeats this run."""
  fv.seed = seed
  with io.open(_out(fv, CONFIG_FILE), 'w', encoding='utf-8') as f:
    f.write(u'# command: {}\n'.format(command))
    f.write(fv.flags_into_string())


def _prepare(fv, command):
  seed = _seed(fv)
  _require(fv, 'out')
  if not os.path.isdir(fv.out):
    os.makedirs(fv.out)
  _echo_config(fv, command, seed)
  return seed


# Commands.


def cmd_gen(fv):
  seed = _prepare(fv, 'gen')
  cfg = netlist.SyntheticConfig(
      fv.n_cells, fv.n_nets, n_macros=fv.n_macros, n_fences=fv.n_fences,
      utilization=fv.utilization, n_ios=fv.n_ios, row_height=fv.row_height)
  design = netlist.generate_synthetic(cfg, seed)
  netlist.save_design(design, _out(fv, DESIGN_FILE))
  netlist.write_bookshelf(design, fv.out)
  print('Generated {} with {} cells and {} nets.'.format(
      design.name, design.n_cells, design.n_nets))
  return EXIT_OK


def cmd_place(fv):
  seed = _prepare(fv, 'place')
  design = _load_design(fv)
  _, _, placement = placer.run_pipeline(design, None,
                                        _place_params(fv, seed))
  placer.write_pl(design, placement, _out(fv, PLACEMENT_FILE))
  report = metrics.evaluate(design, placement, 'none',
                            delay_model=_delay_model(fv))
  metrics.write_reports(_out(fv, REPORT_FILE), [report])
  print('hpwl={}'.format(report.hpwl))
  return EXIT_OK


def _watermark(fv, design, scheme, bits, seed):
  return icmarks.watermark(
      design, scheme, bits, seed, gw_params=_gw_params(fv, len(bits)),
      dw_params=dw.DwParams(fv.d_x, fv.d_y),
      place_params=_place_params(fv, seed), delay_model=_delay_model(fv))


def _evaluate(fv, design, placement, cert):
  extraction = icmarks.extract_certificate(design, placement, cert)
  return metrics.evaluate(design, placement, cert.scheme, cert.baseline_hpwl,
                          extraction.wer, len(cert.signature),
                          delay_model=_delay_model(fv))


def cmd_watermark(fv):
  seed = _prepare(fv, 'watermark')
  design = _load_design(fv)
  bits = _signature(fv, seed)
  design, placement, cert = _watermark(fv, design, fv.scheme, bits, seed)
  netlist.save_design(design, _out(fv, DESIGN_FILE))
  placer.write_pl(design, placement, _out(fv, PLACEMENT_FILE))
  icmarks.save_certificate(cert, _out(fv, CERTIFICATE_FILE))
  report = _evaluate(fv, design, placement, cert)
  metrics.write_reports(_out(fv, REPORT_FILE), [report])
  print('scheme={} bits={} pwlr={:.6f} wer={:.2f}'.format(
      cert.scheme, len(bits), report.pwlr, report.wer))
  return EXIT_OK


def _trial_param(fv):
  if fv.attack in (attacks.SLA, attacks.CPA):
    return fv.fraction
  if fv.attack == attacks.ARA:
    return fv.topk
  return None


def cmd_attack(fv):
  seed = _prepare(fv, 'attack')
  _require(fv, 'placement', 'cert')
  design = _load_design(fv)
  placement = placer.read_pl(design, fv.placement)
  cert = icmarks.load_certificate(fv.cert)
  param = _trial_param(fv)
  trials = [attacks.Trial(fv.attack, param, seed + i)
            for i in range(fv.trials)]
  weights = (fv.alpha, fv.beta, fv.gamma)
  outcomes = attacks.run_trials(
      design, placement, cert, trials, workers=fv.workers,
      gw_params=gw.GwParams(fv.window, fv.window, fv.stride,
                            n_signature_bits=len(cert.signature)),
      weights=weights, place_params=_place_params(fv, seed),
      wer_min=fv.wer_min, pwlr_max=fv.pwlr_max)
  attacks.write_outcomes(_out(fv, OUTCOME_FILE), outcomes)
  placer.write_pl(design, outcomes[0].placement, _out(fv, PLACEMENT_FILE))
  for outcome in outcomes:
    print('{} seed={} wer={:.2f} pwlr={:.6f} success={}'.format(
        outcome.attack, outcome.seed, outcome.wer, outcome.pwlr,
        int(outcome.success)))
  return EXIT_OK


def cmd_verify(fv):
  _prepare(fv, 'verify')
  _require(fv, 'placement', 'cert')
  design = _load_design(fv)
  placement = placer.read_pl(design, fv.placement)
  cert = icmarks.load_certificate(fv.cert)
  extraction = icmarks.extract_certificate(design, placement, cert)
  fmt = lambda v: 'n/a' if v is None else '{:.2f}'.format(v)
  print('wer_gw={} wer_dw={} wer={}'.format(
      fmt(extraction.wer_gw), fmt(extraction.wer_dw), fmt(extraction.wer)))
  _write_rows(_out(fv, VERIFY_FILE), icmarks.Extraction._fields,
              [{k: fmt(v) for k, v in extraction._asdict().items()}])
  if extraction.wer < fv.wer_min:
    return EXIT_BELOW_THRESHOLD
  return EXIT_OK


def _write_rows(path, columns, rows):
  with io.open(path, 'w', newline='', encoding='utf-8') as f:
    writer = csv.DictWriter(f, fieldnames=columns)
    writer.writeheader()
    writer.writerows(rows)


def _header(path):
  if not os.path.exists(path):
    raise errors.MissingFile(path)
  with io.open(path, newline='', encoding='utf-8') as f:
    return tuple(next(csv.reader(f), ()))


def cmd_report(fv):
  _prepare(fv, 'report')
  if not fv.inputs:
    raise UsageError('--inputs is required')
  outcome_rows, eval_rows = [], []
  for path in fv.inputs:
    header = _header(path)
    if header == attacks.OUTCOME_COLUMNS:
      outcome_rows.extend(attacks.read_outcomes(path))
    elif header == metrics.EVAL_COLUMNS:
      eval_rows.extend(metrics.read_reports(path))
    else:
      raise errors.CorruptDocument('{} has unknown columns {}'.format(
          path, header))
  if outcome_rows:
    _write_rows(_out(fv, ATTACK_SUMMARY_FILE), attacks.SUMMARY_COLUMNS,
                attacks.summarize_outcomes(outcome_rows))
  if eval_rows:
    _write_rows(_out(fv, CAPACITY_SUMMARY_FILE), metrics.CAPACITY_COLUMNS,
                metrics.summarize_capacity(eval_rows, fv.pwlr_max,
                                           fv.wer_min))
  print('Aggregated {} outcome rows and {} evaluation rows.'.format(
      len(outcome_rows), len(eval_rows)))
  return EXIT_OK


def cmd_capacity(fv):
  seed = _prepare(fv, 'capacity')
  design = _load_design(fv)
  try:
    lengths = [int(n) for n in fv.lengths]
  except ValueError:
    raise UsageError('--lengths must be integers, got {}'.format(fv.lengths))
  unknown = [s for s in fv.schemes if s not in icmarks.SCHEMES]
  if unknown:
    raise UsageError('unknown schemes {}'.format(unknown))
  reports = []
  for scheme in fv.schemes:
    for n in lengths:
      bits = utils.random_signature(n, seed)
      try:
        marked, placement, cert = _watermark(fv, design, scheme, bits, seed)
      except errors.PlacemarksError as e:
        logging.warning('%s with %d bits failed: %s', scheme, n, e)
        continue
      reports.append(_evaluate(fv, marked, placement, cert))
  metrics.write_reports(_out(fv, CAPACITY_FILE), reports)
  print('Wrote {} capacity rows.'.format(len(reports)))
  return EXIT_OK


COMMANDS = {
    'gen': cmd_gen,
    'place': cmd_place,
    'watermark': cmd_watermark,
    'attack': cmd_attack,
    'verify': cmd_verify,
    'report': cmd_report,
    'capacity': cmd_capacity,
}


def _usage(message):
  print('placemarks: {}'.format(message), file=sys.stderr)
  print('usage: placemarks {{{}}} [--flag=value ...]'.format(
      ','.join(sorted(COMMANDS))), file=sys.stderr)
  return EXIT_USAGE


def main(argv=None):
  """Runs one command and returns its exit code."""
  argv = list(sys.argv if argv is None else argv)
  fv = placemarks_flags.define_flags(flags.FlagValues())
  try:
    rest = fv(argv)
  except flags.Error as e:
    return _usage(str(e))
  commands = rest[1:]
  if len(commands) != 1 or commands[0] not in COMMANDS:
    return _usage('expected exactly one command, got {}'.format(commands))
  logging.set_verbosity(fv.verbosity)
  try:
    return COMMANDS[commands[0]](fv)
  except UsageError as e:
    return _usage(str(e))
  except (errors.PlacemarksError, ValueError) as e:
    logging.error('%s failed: %s', commands[0], e)
    print('placemarks: {}: {}'.format(type(e).__name__, e), file=sys.stderr)
    return EXIT_ERROR


if __name__ == '__main__':
  sys.exit(main())

# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Describes flags used by the placemarks command line."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

from absl import flags

SCHEMES = ('gw', 'dw', 'icmarks', 'row_parity', 'cell_scattering',
           'buffer_insertion')
ATTACKS = ('sla', 'cpa', 'oa', 'ara')
CAPACITY_LENGTHS = ('30', '50', '100', '200', '500', '1000')


def define_flags(fv):
  """Defines every command line flag in the `flags.FlagValues` `fv`."""
  # Inputs and outputs.
  flags.DEFINE_string('design', None,
                      'Bookshelf .aux file or design document (.json).',
                      flag_values=fv)
  flags.DEFINE_string('fences', None, 'Optional fence region sidecar.',
                      flag_values=fv)
  flags.DEFINE_string('placement', None, 'Input placement (.pl).',
                      flag_values=fv)
  flags.DEFINE_string('cert', None, 'Input watermark certificate.',
                      flag_values=fv)
  flags.DEFINE_string('out', None, 'Output directory.', flag_values=fv)
  flags.DEFINE_list('inputs', [], 'CSV files aggregated by `report`.',
                    flag_values=fv)
  flags.DEFINE_integer('seed', None,
                       'Seed of every random choice; falls back to WM_SEED.',
                       lower_bound=0, flag_values=fv)
  flags.DEFINE_integer('verbosity', 0, 'absl logging verbosity.',
                       flag_values=fv)

  # Synthetic designs.
  flags.DEFINE_integer('n_cells', 2000, 'Movable cells.', lower_bound=1,
                       flag_values=fv)
  flags.DEFINE_integer('n_nets', 2400, 'Nets.', lower_bound=1,
                       flag_values=fv)
  flags.DEFINE_integer('n_macros', 0, 'Fixed macros.', lower_bound=0,
                       flag_values=fv)
  flags.DEFINE_integer('n_fences', 0, 'Fence regions.', lower_bound=0,
                       flag_values=fv)
  flags.DEFINE_integer('n_ios', 0, 'Fixed IO pads.', lower_bound=0,
                       flag_values=fv)
  flags.DEFINE_float('utilization', 0.6, 'Movable area over free area.',
                     flag_values=fv)
  flags.DEFINE_integer('row_height', 4, 'Row height.', lower_bound=1,
                       flag_values=fv)

  # Placement.
  flags.DEFINE_integer('max_iterations', 30, 'Global placement iterations.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_float('density_target', 0.9, 'Target bin utilization.',
                     flag_values=fv)
  flags.DEFINE_integer('detail_passes', 5, 'Detailed placement passes.',
                       lower_bound=1, flag_values=fv)

  # Watermarking.
  flags.DEFINE_enum('scheme', 'icmarks', SCHEMES, 'Watermarking scheme.',
                    flag_values=fv)
  flags.DEFINE_string('signature', None,
                      'Signature as a bit string (0b0101) or hex (0x1f).',
                      flag_values=fv)
  flags.DEFINE_integer('bits', 50,
                       'Length of a seeded random signature when '
                       '--signature is not given.', lower_bound=1,
                       flag_values=fv)
  flags.DEFINE_float('alpha', 0.1, 'Region weight of N_w / N_c.',
                     flag_values=fv)
  flags.DEFINE_float('beta', 0.1, 'Region weight of cell area.',
                     flag_values=fv)
  flags.DEFINE_float('gamma', 1.0, 'Region weight of boundary overlap.',
                     flag_values=fv)
  flags.DEFINE_integer('window', None,
                       'Square window side; ten row heights by default.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_integer('stride', None,
                       'Window stride; the window side by default.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_integer('d_x', 1, 'Horizontal displacement step.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_integer('d_y', None,
                       'Vertical displacement step; one row by default.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_float('unit_delay', 1.0, 'Wire delay per unit of HPWL.',
                     flag_values=fv)
  flags.DEFINE_float('rat', None,
                     'Required arrival time of every endpoint net.',
                     flag_values=fv)

  # Attacks and thresholds.
  flags.DEFINE_enum('attack', 'sla', ATTACKS, 'Removal attack.',
                    flag_values=fv)
  flags.DEFINE_float('fraction', 0.001,
                     'Share of movable cells touched by SLA and CPA.',
                     flag_values=fv)
  flags.DEFINE_integer('topk', 1, 'Windows perturbed by ARA.', lower_bound=1,
                       flag_values=fv)
  flags.DEFINE_integer('trials', 1, 'Attack trials on consecutive seeds.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_integer('workers', 1, 'Concurrent attack trials.',
                       lower_bound=1, flag_values=fv)
  flags.DEFINE_float('pwlr_max', 1.005, 'Largest acceptable HPWL ratio.',
                     flag_values=fv)
  flags.DEFINE_float('wer_min', 90.0, 'Smallest passing extraction rate.',
                     flag_values=fv)
  flags.DEFINE_list('lengths', list(CAPACITY_LENGTHS),
                    'Signature lengths of the capacity sweep.',
                    flag_values=fv)
  flags.DEFINE_list('schemes', list(SCHEMES),
                    'Schemes of the capacity sweep.', flag_values=fv)

  flags.register_validator(
      'pwlr_max', lambda v: v > 0, message='--pwlr_max must be positive',
      flag_values=fv)
  flags.register_validator(
      'wer_min', lambda v: v > 0, message='--wer_min must be positive',
      flag_values=fv)
  return fv

# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Combined two-level watermarking, certificates and watermark strength.

`insert_icmarks` selects a global watermark region on the original
placement, places with it as an exclusive region constraint, leaves a
`d_x` gap right of every region cell during legalization, perturbs cells of
the region before detailed placement, signs off like `gw.insert_gw` and
records both watermarks in a `Certificate`. `watermark` builds certificates
for every supported scheme and `extract_certificate` verifies any of them.

The strength functions compute the probability that an unmarked layout shows
the evidence by coincidence. All tails are summed in log space: exact
binomial coefficients for `n <= 64`, log-gamma beyond.

Example:
  >>> placement, cert = icmarks.insert_icmarks(design, bits, seed=7)
  >>> icmarks.save_certificate(cert, '/tmp/out/cert.wmcert')
  >>> icmarks.extract_icmarks(design, placement, cert).wer
  100.0
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections
import math

from absl import logging
import numpy as onp
from scipy.special import comb
from scipy.special import gammaln
from scipy.special import logsumexp
from scipy.special import xlog1py
from scipy.special import xlogy

from placemarks import baselines
from placemarks import dw
from placemarks import gw
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.utils import document
from placemarks.utils import errors

CERTIFICATE_DOCUMENT = 'placemarks-certificate'

GW = 'gw'
DW = 'dw'
ICMARKS = 'icmarks'
ROW_PARITY = baselines.ROW_PARITY
CELL_SCATTERING = baselines.CELL_SCATTERING
BUFFER_INSERTION = baselines.BUFFER_INSERTION
SCHEMES = (GW, DW, ICMARKS, ROW_PARITY, CELL_SCATTERING, BUFFER_INSERTION)

_EXACT_BINOMIAL_LIMIT = 64


class Certificate(
    collections.namedtuple('Certificate', [
        'version', 'scheme', 'seed', 'signature', 'gw', 'dw', 'baseline',
        'params', 'fingerprint', 'baseline_hpwl'
    ])):
  """Everything needed to extract and prove a watermark.

  Attributes:
    version: document format version.
    scheme: one of `SCHEMES`.
    seed: seed of the watermark insertion.
    signature: tuple of signature bits.
    gw: `GwWatermark` or `None`.
    dw: `DwWatermark` or `None`.
    baseline: `BaselineWatermark` or `None`.
    params: JSON-compatible snapshot of the parameters used.
    fingerprint: digest of the watermarked design.
    baseline_hpwl: HPWL of the same-seed unwatermarked placement.
  """

  def to_dict(self):
    return {
        'scheme': self.scheme,
        'seed': self.seed,
        'signature': ''.join(str(b) for b in self.signature),
        'gw': None if self.gw is None else self.gw.to_dict(),
        'dw': None if self.dw is None else self.dw.to_dict(),
        'baseline': (None if self.baseline is None else
                     self.baseline.to_dict()),
        'params': self.params,
        'fingerprint': self.fingerprint,
        'baseline_hpwl': self.baseline_hpwl,
    }

  @classmethod
  def from_dict(cls, d):
    try:
      scheme = d['scheme']
      if scheme not in SCHEMES:
        raise errors.CorruptDocument('unknown scheme {!r}'.format(scheme))
      return cls(
          document.FORMAT_VERSION, scheme, int(d['seed']),
          tuple(int(b) for b in d['signature']),
          None if d['gw'] is None else gw.GwWatermark.from_dict(d['gw']),
          None if d['dw'] is None else dw.DwWatermark.from_dict(d['dw']),
          (None if d['baseline'] is None else
           baselines.BaselineWatermark.from_dict(d['baseline'])),
          d['params'], d['fingerprint'], d['baseline_hpwl'])
    except (KeyError, TypeError, ValueError) as e:
      raise errors.CorruptDocument('malformed certificate: {!r}'.format(e))


Extraction = collections.namedtuple('Extraction', ['wer_gw', 'wer_dw', 'wer'])


def _plain(value):
  """Converts namedtuples and tuples to JSON-compatible dicts and lists."""
  if hasattr(value, '_asdict'):
    return {k: _plain(v) for k, v in value._asdict().items()}
  if isinstance(value, dict):
    return {k: _plain(v) for k, v in value.items()}
  if isinstance(value, (tuple, list)):
    return [_plain(v) for v in value]
  if isinstance(value, onp.generic):
    return value.item()
  return value


def dumps_certificate(cert):
  return document.dumps(CERTIFICATE_DOCUMENT, cert.to_dict())


def loads_certificate(text):
  return Certificate.from_dict(document.loads(text, CERTIFICATE_DOCUMENT))


def save_certificate(cert, path):
  document.save(path, CERTIFICATE_DOCUMENT, cert.to_dict())


def load_certificate(path):
  return Certificate.from_dict(document.load(path, CERTIFICATE_DOCUMENT))


def _certificate(scheme, design, seed, signature, baseline_hpwl, params,
                 gw_wm=None, dw_wm=None, baseline_wm=None):
  return Certificate(document.FORMAT_VERSION, scheme, int(seed),
                     tuple(int(b) for b in signature), gw_wm, dw_wm,
                     baseline_wm, _plain(params), netlist.fingerprint(design),
                     int(baseline_hpwl))


def _legalize_with_room(design, placement, constraints, d_x):
  """Legalizes with `d_x` free sites right of every watermark region cell."""
  try:
    return placer.legalize(design, placement, constraints,
                           padding={placer.WATERMARK_LABEL: d_x})
  except errors.LegalizationOverflow as e:
    logging.warning('No room to pad the watermark region (%s); legalizing '
                    'it packed.', e)
    return placer.legalize(design, placement, constraints)


def insert_icmarks(design, signature, gw_params=None, dw_params=None,
                   place_params=None, seed=0):
  """Inserts the combined region and displacement watermark.

  Args:
    design: a `Design`.
    signature: sequence of bits.
    gw_params: `GwParams`; by default `N_w` is the signature length.
    dw_params: `DwParams`.
    place_params: `PlaceParams` shared with the unwatermarked reference run.
    seed: seed of the displacement candidate shuffle.

  Returns:
    `(placement, certificate)`.

  Raises:
    RegionInfeasible: if the region cannot host its cells.
    InsufficientCandidates: if the region is too small for the signature.
  """
  bits = tuple(int(b) for b in signature)
  gw_params = (gw_params or gw.GwParams(n_signature_bits=len(bits))).resolve(
      design)
  dw_params = (dw_params or dw.DwParams()).resolve(design)
  place_params = place_params or placer.PlaceParams()
  constraints = placer.RegionConstraintSet.for_design(design)

  original = placer.run_pipeline(design, constraints, place_params)[-1]
  region = gw.select_region(design, original, gw_params)
  marked = constraints.with_watermark(region.region, region.cells)
  marked.validate(design)
  p_global = placer.global_place(design, marked, place_params)
  p_legal = _legalize_with_room(design, p_global, marked, dw_params.d_x)
  p_itr, cells = dw.perturb(design, p_legal, bits, dw_params.d_x,
                            dw_params.d_y, seed, marked,
                            restrict_to=region.cells)
  p_wm = placer.detailed_place(design, p_itr, marked, place_params)
  placement, region = gw.sign_off(design, p_wm, region, constraints,
                                  place_params, gw_params.n_signature_bits)
  perturbation = dw.record(p_itr, placement, cells)
  cert = _certificate(
      ICMARKS, design, seed, bits, metrics.hpwl(design, original),
      {'gw': gw_params, 'dw': dw_params, 'place': place_params}, region,
      perturbation)
  logging.info('Inserted %d-bit combined watermark into %s.', len(bits),
               design.name)
  return placement, cert


def watermark(design, scheme, signature, seed=0, gw_params=None,
              dw_params=None, place_params=None, delay_model=None):
  """Watermarks `design` with any supported scheme.

  Returns:
    `(design, placement, certificate)`. The design differs from the input
    only for buffer insertion, which changes the netlist.
  """
  if scheme not in SCHEMES:
    raise ValueError('Unknown scheme {!r}; expected one of {}.'.format(
        scheme, SCHEMES))
  bits = tuple(int(b) for b in signature)
  if scheme == ICMARKS:
    placement, cert = insert_icmarks(design, bits, gw_params, dw_params,
                                     place_params, seed)
    return design, placement, cert

  place_params = place_params or placer.PlaceParams()
  dw_params = (dw_params or dw.DwParams()).resolve(design)
  constraints = placer.RegionConstraintSet.for_design(design)
  _, p_legal, original = placer.run_pipeline(design, constraints,
                                             place_params)
  baseline_hpwl = metrics.hpwl(design, original)
  params = {'place': place_params}
  if scheme == GW:
    gw_params = (gw_params or
                 gw.GwParams(n_signature_bits=len(bits))).resolve(design)
    placement, region = gw.insert_gw(design, gw_params, place_params,
                                     constraints, original)
    params['gw'] = gw_params
    cert = _certificate(scheme, design, seed, bits, baseline_hpwl, params,
                        gw_wm=region)
    return design, placement, cert
  if scheme == DW:
    placement, perturbation = dw.insert_dw(design, p_legal, bits,
                                           dw_params.d_x, dw_params.d_y, seed,
                                           constraints,
                                           place_params=place_params)
    params['dw'] = dw_params
    cert = _certificate(scheme, design, seed, bits, baseline_hpwl, params,
                        dw_wm=perturbation)
    return design, placement, cert
  if scheme == ROW_PARITY:
    placement, wm = baselines.row_parity_insert(design, p_legal, bits, seed,
                                                constraints, place_params)
  elif scheme == CELL_SCATTERING:
    placement, wm = baselines.cell_scattering_insert(
        design, original, bits, seed, dw_params.d_x, dw_params.d_y,
        constraints)
    params['dw'] = dw_params
  else:
    design, placement, wm = baselines.buffer_insertion_insert(
        design, original, bits, seed, delay_model=delay_model,
        place_params=place_params)
  cert = _certificate(scheme, design, seed, bits, baseline_hpwl, params,
                      baseline_wm=wm)
  return design, placement, cert


def _check_fingerprint(design, cert):
  actual = netlist.fingerprint(design)
  if actual != cert.fingerprint:
    raise errors.FingerprintMismatch(cert.fingerprint, actual)


def extract_icmarks(design, placement, cert):
  """Region and displacement extraction rates and their mean.

  Raises:
    FingerprintMismatch: if `cert` was issued for another design.
  """
  _check_fingerprint(design, cert)
  wer_gw = gw.extract_gw(design, placement, cert.gw)
  wer_dw = dw.extract_dw(design, placement, cert.dw)
  return Extraction(wer_gw, wer_dw, (wer_gw + wer_dw) / 2.)


def extract_certificate(design, placement, cert):
  """Extraction rates for a certificate of any scheme.

  Rates a scheme does not carry are `None`; `wer` is always set.
  """
  if cert.scheme == ICMARKS:
    return extract_icmarks(design, placement, cert)
  _check_fingerprint(design, cert)
  if cert.scheme == GW:
    wer = gw.extract_gw(design, placement, cert.gw)
    return Extraction(wer, None, wer)
  if cert.scheme == DW:
    wer = dw.extract_dw(design, placement, cert.dw)
    return Extraction(None, wer, wer)
  return Extraction(None, None,
                    baselines.extract(design, placement, cert.baseline))


# Watermark strength.


def _check_tail(n, x, p):
  if int(n) != n or int(x) != x:
    raise errors.DomainError('counts must be integers, got n={}, x={}'.format(
        n, x))
  if not 0 <= x <= n:
    raise errors.DomainError('threshold {} outside [0, {}]'.format(x, n))
  if not 0. <= p <= 1.:
    raise errors.DomainError('probability {} outside [0, 1]'.format(p))
  return int(n), int(x), float(p)


def _log_comb(n, i):
  """Natural log of `C(n, i)` for an array of `i`."""
  i = onp.asarray(i, onp.int64)
  if n <= _EXACT_BINOMIAL_LIMIT:
    return onp.array([math.log(comb(n, int(k), exact=True)) for k in i],
                     onp.float64)
  return gammaln(n + 1.) - gammaln(i + 1.) - gammaln(n - i + 1.)


def _log_sum(terms):
  terms = onp.asarray(terms, onp.float64)
  if not len(terms) or onp.all(onp.isneginf(terms)):
    return -onp.inf
  return float(logsumexp(terms))


def _exp(value):
  return 0. if value == -onp.inf else math.exp(value)


def log_strength_gw(n, x, p):
  """Log of `P(X >= x)` for `X ~ Binomial(n, p)`."""
  n, x, p = _check_tail(n, x, p)
  if x == 0:
    return 0.
  i = onp.arange(x, n + 1)
  return _log_sum(_log_comb(n, i) + xlogy(i, p) + xlog1py(n - i, -p))


def strength_gw(n, x, p=0.5):
  """Coincidence probability of `x` or more of `n` cells matching.

  Example:
    >>> icmarks.strength_gw(10, 8, 0.5)
    0.0546875
  """
  return _exp(log_strength_gw(n, x, p))


def log_strength_dw(n_x, n_y, x, y, p_x, p_y):
  return log_strength_gw(n_x, x, p_x) + log_strength_gw(n_y, y, p_y)


def strength_dw(n_x, n_y, x, y, p_x, p_y):
  """Product of the horizontal and vertical displacement tails."""
  return _exp(log_strength_dw(n_x, n_y, x, y, p_x, p_y))


def log_strength_combined(p_global, p_detailed):
  for p in (p_global, p_detailed):
    if not 0. <= p <= 1.:
      raise errors.DomainError('probability {} outside [0, 1]'.format(p))
  if p_global == 0. or p_detailed == 0.:
    return -onp.inf
  return math.log(p_global) + math.log(p_detailed)


def strength_combined(p_global, p_detailed):
  return _exp(log_strength_combined(p_global, p_detailed))


def log_strength_empirical(n, x, p):
  """Log of `sum_{i<=x} C(n, i) p^i (1 - p)^(x - i)`.

  This sum is not a probability and can exceed 1; see
  `strength_empirical_corrected` for the binomial lower tail.
  """
  n, x, p = _check_tail(n, x, p)
  i = onp.arange(0, x + 1)
  return _log_sum(_log_comb(n, i) + xlogy(i, p) + xlog1py(x - i, -p))


def strength_empirical(n, x, p):
  return _exp(log_strength_empirical(n, x, p))


def log_strength_empirical_corrected(n, x, p):
  n, x, p = _check_tail(n, x, p)
  i = onp.arange(0, x + 1)
  return _log_sum(_log_comb(n, i) + xlogy(i, p) + xlog1py(n - i, -p))


def strength_empirical_corrected(n, x, p):
  """Binomial lower tail `P(X <= x)` for `X ~ Binomial(n, p)`."""
  return _exp(log_strength_empirical_corrected(n, x, p))


class StrengthQuery(
    collections.namedtuple('StrengthQuery',
                           ['kind', 'n', 'x', 'p', 'n_y', 'y', 'p_y'])):
  """Counts of one strength evaluation.

  Attributes:
    kind: `'gw'`, `'dw'`, `'empirical'` or `'empirical_corrected'`.
    n: population; `|N_o|`, `|C_wx|` or `|C_w|`.
    x: match threshold.
    p: per-trial coincidence probability.
    n_y: `|C_wy|` for `'dw'`.
    y: vertical match threshold for `'dw'`.
    p_y: vertical probability for `'dw'`.
  """

  def __new__(cls, kind, n, x, p=0.5, n_y=0, y=0, p_y=0.5):
    return super(StrengthQuery, cls).__new__(cls, kind, n, x, p, n_y, y, p_y)


def evaluate_strength(query):
  """Log strength of a `StrengthQuery`."""
  if query.kind == 'gw':
    return log_strength_gw(query.n, query.x, query.p)
  if query.kind == 'dw':
    return log_strength_dw(query.n, query.n_y, query.x, query.y, query.p,
                           query.p_y)
  if query.kind == 'empirical':
    return log_strength_empirical(query.n, query.x, query.p)
  if query.kind == 'empirical_corrected':
    return log_strength_empirical_corrected(query.n, query.x, query.p)
  raise ValueError('Unknown strength kind {!r}.'.format(query.kind))

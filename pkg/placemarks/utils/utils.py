# Copyright 2026 The Placemarks Authors.  All rights reserved.
"""General-purpose internal utilities."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import math

from jax import random
import numpy as onp

_MASK31 = 0x7FFFFFFF


def prng_key(seed):
  """Folds a non-negative 64-bit integer seed into a `jax.random.PRNGKey`."""
  seed = int(seed)
  if not 0 <= seed < 2**64:
    raise ValueError('Seeds must be 64-bit unsigned integers, got {}.'.format(
        seed))
  key = random.PRNGKey(seed & _MASK31)
  key = random.fold_in(key, (seed >> 31) & _MASK31)
  return random.fold_in(key, seed >> 62)


def permutation(key, n):
  """A seeded permutation of `range(n)` as a host `int64` array."""
  if n == 0:
    return onp.zeros((0,), onp.int64)
  return onp.asarray(random.permutation(key, n), dtype=onp.int64)


def round_half_up(values):
  return onp.floor(onp.asarray(values, dtype=onp.float64) + 0.5).astype(
      onp.int64)


def round_half_away(value):
  return int(math.copysign(math.floor(abs(value) + 0.5), value))


def parse_signature(text):
  """Parses a bit-string (`0b0101`, `0101`) or hex (`0x1f`) signature.

  Hex digits expand to four bits each, so leading zeros are kept and the
  length is always `4 * len(digits)`.

  Returns:
    A tuple of `0`/`1` integers.
  """
  text = text.strip().lower()
  if text.startswith('0x'):
    digits = text[2:]
    if not digits:
      raise ValueError('Empty hex signature.')
    try:
      bits = ''.join(format(int(c, 16), '04b') for c in digits)
    except ValueError:
      raise ValueError('Invalid hex signature {!r}.'.format(text))
  elif text.startswith('0b'):
    bits = text[2:]
  else:
    bits = text
  if not bits or any(c not in '01' for c in bits):
    raise ValueError('Invalid bit-string signature {!r}.'.format(text))
  return tuple(int(c) for c in bits)


def format_signature(bits):
  return '0b' + ''.join(str(int(b)) for b in bits)


def random_signature(n_bits, seed):
  if n_bits < 1:
    raise ValueError('Signatures need at least one bit, got {}.'.format(
        n_bits))
  key = random.fold_in(prng_key(seed), n_bits)
  draws = onp.asarray(random.bernoulli(key, 0.5, (n_bits,)))
  return tuple(int(b) for b in draws)

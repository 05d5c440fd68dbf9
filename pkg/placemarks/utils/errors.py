# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Exceptions raised by the placement and watermarking pipeline.

Every error carries the offending values as attributes so callers (and the
command line front-end) can report them without parsing messages.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function


class PlacemarksError(Exception):
  """Base class of every error raised by `placemarks`."""


# Netlist ingestion and generation.


class MissingFile(PlacemarksError, IOError):

  def __init__(self, path, reason='file not found'):
    self.path = path
    super(MissingFile, self).__init__('{}: {}'.format(path, reason))


class BookshelfSyntaxError(PlacemarksError):
  """Malformed Bookshelf content, located by file, line and token."""

  def __init__(self, path, line, token, reason):
    self.path = path
    self.line = line
    self.token = token
    self.reason = reason
    super(BookshelfSyntaxError, self).__init__(
        '{}:{}: {} (token {!r})'.format(path, line, reason, token))


class DanglingPinReference(PlacemarksError):

  def __init__(self, net, cell, line=None):
    self.net = net
    self.cell = cell
    self.line = line
    super(DanglingPinReference, self).__init__(
        'net {!r} references unknown cell {!r} (line {})'.format(
            net, cell, line))


class OverlappingRows(PlacemarksError):

  def __init__(self, row_a, row_b):
    self.row_a = row_a
    self.row_b = row_b
    super(OverlappingRows, self).__init__(
        'rows {} and {} overlap'.format(row_a, row_b))


class InfeasibleConfig(PlacemarksError):
  pass


# Metrics.


class InvalidBaseline(PlacemarksError, ZeroDivisionError):
  pass


class CombinationalCycle(PlacemarksError):

  def __init__(self, cycle):
    self.cycle = tuple(cycle)
    super(CombinationalCycle, self).__init__(
        'timing graph has a cycle through cells {}'.format(list(self.cycle)))


# Placement.


class RegionInfeasible(PlacemarksError):

  def __init__(self, region, demand, capacity):
    self.region = region
    self.demand = demand
    self.capacity = capacity
    super(RegionInfeasible, self).__init__(
        'region {} needs {} units of cell area but holds {} at the target '
        'density'.format(region, demand, capacity))


class LegalizationOverflow(PlacemarksError):

  def __init__(self, cell, label):
    self.cell = cell
    self.label = label
    super(LegalizationOverflow, self).__init__(
        'no row segment of class {} can host cell {}'.format(label, cell))


# Watermarking.


class NoValidWindow(PlacemarksError):
  pass


class InvalidParams(PlacemarksError, ValueError):
  pass


class InsufficientCandidates(PlacemarksError):

  def __init__(self, axis, needed, available):
    self.axis = axis
    self.needed = needed
    self.available = available
    super(InsufficientCandidates, self).__init__(
        'need {} candidates along {} but only {} are available'.format(
            needed, axis, available))


class NoTimingMargin(PlacemarksError):

  def __init__(self, margin):
    self.margin = margin
    super(NoTimingMargin, self).__init__(
        'no net has slack of at least {}'.format(margin))


class FingerprintMismatch(PlacemarksError):

  def __init__(self, expected, actual):
    self.expected = expected
    self.actual = actual
    super(FingerprintMismatch, self).__init__(
        'certificate was issued for design {} but got {}'.format(
            expected[:16], actual[:16]))


class DomainError(PlacemarksError, ValueError):
  pass


class VersionMismatch(PlacemarksError):

  def __init__(self, found, supported):
    self.found = found
    self.supported = supported
    super(VersionMismatch, self).__init__(
        'document version {} is not supported (expected {})'.format(
            found, supported))


class CorruptDocument(PlacemarksError):
  pass

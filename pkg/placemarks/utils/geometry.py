# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Axis-aligned rectangles, placement rows and integer interval arithmetic."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import collections


class Rect(collections.namedtuple('Rect', ['x_lo', 'y_lo', 'x_hi', 'y_hi'])):
  """A half-open axis-aligned rectangle `[x_lo, x_hi) x [y_lo, y_hi)`.

  Attributes:
    x_lo: left edge in placement units.
    y_lo: bottom edge in placement units.
    x_hi: right edge, strictly greater than `x_lo`.
    y_hi: top edge, strictly greater than `y_lo`.
  """

  def __new__(cls, x_lo, y_lo, x_hi, y_hi):
    if not (x_lo < x_hi and y_lo < y_hi):
      raise ValueError(
          'Rect needs x_lo < x_hi and y_lo < y_hi, got ({}, {}, {}, {}).'
          .format(x_lo, y_lo, x_hi, y_hi))
    return super(Rect, cls).__new__(cls, x_lo, y_lo, x_hi, y_hi)

  @property
  def width(self):
    return self.x_hi - self.x_lo

  @property
  def height(self):
    return self.y_hi - self.y_lo

  @property
  def area(self):
    return self.width * self.height

  def contains_point(self, x, y):
    return self.x_lo <= x < self.x_hi and self.y_lo <= y < self.y_hi

  def contains_rect(self, other):
    return (self.x_lo <= other.x_lo and other.x_hi <= self.x_hi and
            self.y_lo <= other.y_lo and other.y_hi <= self.y_hi)

  def intersection(self, other):
    """Returns the overlapping `Rect` or `None` when the overlap is empty."""
    x_lo = max(self.x_lo, other.x_lo)
    y_lo = max(self.y_lo, other.y_lo)
    x_hi = min(self.x_hi, other.x_hi)
    y_hi = min(self.y_hi, other.y_hi)
    if x_lo < x_hi and y_lo < y_hi:
      return Rect(x_lo, y_lo, x_hi, y_hi)
    return None

  def overlap_area(self, other):
    common = self.intersection(other)
    return 0 if common is None else common.area

  def intersects(self, other):
    return self.intersection(other) is not None


class Row(collections.namedtuple('Row', ['y', 'x_lo', 'x_hi'])):
  """A placement row starting at height `y` and spanning `[x_lo, x_hi)`."""

  def __new__(cls, y, x_lo, x_hi):
    if not x_lo < x_hi:
      raise ValueError('Row needs x_lo < x_hi, got [{}, {}).'.format(
          x_lo, x_hi))
    return super(Row, cls).__new__(cls, y, x_lo, x_hi)

  @property
  def width(self):
    return self.x_hi - self.x_lo


def cell_rect(x, y, width, height):
  return Rect(x, y, x + width, y + height)


def center_in_rect(x, y, width, height, rect):
  """Whether the center of the box at `(x, y)` lies inside `rect`.

  Doubled coordinates keep the test exact for odd widths and heights.
  """
  cx2 = 2 * x + width
  cy2 = 2 * y + height
  return (2 * rect.x_lo <= cx2 < 2 * rect.x_hi and
          2 * rect.y_lo <= cy2 < 2 * rect.y_hi)


def subtract_interval(intervals, lo, hi):
  """Removes `[lo, hi)` from a sorted list of disjoint `(lo, hi)` intervals."""
  out = []
  for a, b in intervals:
    if b <= lo or hi <= a:
      out.append((a, b))
      continue
    if a < lo:
      out.append((a, lo))
    if hi < b:
      out.append((hi, b))
  return out


def split_intervals(intervals, lo, hi):
  """Splits intervals into the parts inside and outside of `[lo, hi)`."""
  inside, outside = [], []
  for a, b in intervals:
    if b <= lo or hi <= a:
      outside.append((a, b))
      continue
    if a < lo:
      outside.append((a, lo))
    inside.append((max(a, lo), min(b, hi)))
    if hi < b:
      outside.append((hi, b))
  return inside, outside

# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Run independent trials serially or over a pool of workers."""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

from multiprocessing.pool import ThreadPool

from absl import logging


def _serial(trial_fn):

  def serial_fn(items):
    return [trial_fn(item) for item in items]

  serial_fn.workers = 1
  return serial_fn


def _parallel(trial_fn, workers):
  """Maps `trial_fn` over a thread pool of `workers` threads.

  Results come back in input order, so the output does not depend on the pool
  size as long as `trial_fn` is pure.
  """

  def parallel_fn(items):
    items = list(items)
    if len(items) < 2:
      return [trial_fn(item) for item in items]
    pool = ThreadPool(min(workers, len(items)))
    try:
      return pool.map(trial_fn, items)
    finally:
      pool.close()
      pool.join()

  parallel_fn.workers = workers
  return parallel_fn


def batch(trial_fn, workers=1):
  """Returns a function that applies `trial_fn` to a sequence of trials.

  Args:
    trial_fn: a pure function of one trial.
    workers: number of concurrent workers; `1` or less runs serially.

  Returns:
    A function from a sequence of trials to the list of their results, in
    input order.
  """
  if workers is None or workers <= 1:
    return _serial(trial_fn)
  logging.info('Running trials on %d workers.', workers)
  return _parallel(trial_fn, int(workers))

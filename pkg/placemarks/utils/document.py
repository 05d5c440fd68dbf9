# Copyright 2026 The Placemarks Authors.  All rights reserved.

"""Versioned structured-text documents for design dumps and certificates.

A document is a JSON object `{"format": kind, "version": n, "payload": ...}`
written with sorted keys so equal payloads always produce identical bytes.
"""

from __future__ import absolute_import
from __future__ import division
from __future__ import print_function

import io
import json
import os

from placemarks.utils import errors

FORMAT_VERSION = 1


def dumps(kind, payload, version=FORMAT_VERSION):
  document = {'format': kind, 'version': version, 'payload': payload}
  return json.dumps(document, sort_keys=True, indent=1,
                    separators=(',', ': ')) + '\n'


def loads(text, kind):
  """Parses a document of the given `kind` and returns its payload.

  Raises:
    CorruptDocument: if `text` is not a complete document of type `kind`.
    VersionMismatch: if the document was written by another format version.
  """
  try:
    document = json.loads(text)
  except ValueError as e:
    raise errors.CorruptDocument('unreadable {} document: {}'.format(kind, e))

  if not isinstance(document, dict):
    raise errors.CorruptDocument('{} document is not an object'.format(kind))
  missing = [k for k in ('format', 'version', 'payload') if k not in document]
  if missing:
    raise errors.CorruptDocument(
        '{} document lacks fields {}'.format(kind, missing))
  if document['format'] != kind:
    raise errors.CorruptDocument('expected a {} document, found {!r}'.format(
        kind, document['format']))
  if document['version'] != FORMAT_VERSION:
    raise errors.VersionMismatch(document['version'], FORMAT_VERSION)
  return document['payload']


def save(path, kind, payload):
  with io.open(path, 'w', encoding='utf-8') as f:
    f.write(dumps(kind, payload))


def load(path, kind):
  if not os.path.exists(path):
    raise errors.MissingFile(path)
  with io.open(path, 'r', encoding='utf-8') as f:
    return loads(f.read(), kind)

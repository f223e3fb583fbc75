"""
Reading and writing datasets and run artifacts.

A dataset is a JSON sidecar plus a payload file with the same stem:

* ``csv``: one row per matrix with columns ``domain_id``, ``index``,
  ``label`` and the n*n entries in row-major order, each written with
  ``repr`` so floats survive the round trip bit for bit;
* ``binary``: the magic bytes ``SPDT``, then version, dim and count as
  little-endian uint32, then every matrix as little-endian float64.

The sidecar holds the format version, the matrix size, the encoding and,
per domain, its id, item count, label kind and metadata; the binary
encoding also keeps the labels there.
"""
import csv
import hashlib
import json
import logging
import os
import struct

import numpy as np

from spdtransport.domains import LabeledCovarianceSet, check_domains
from spdtransport.exceptions import ArtifactIOError, SpdTransportError

logger = logging.getLogger(__name__)

FORMAT_NAME = 'spdtransport-dataset'
FORMAT_VERSION = 1
MAGIC = b'SPDT'
HEADER = struct.Struct('<4sIII')
ENCODINGS = ('csv', 'binary')
PAYLOAD_EXTENSIONS = {'csv': '.csv', 'binary': '.bin'}

# Relative asymmetry tolerated on load without a warning
ASYMMETRY_TOL = 1e-12


def sidecar_path(path):
    stem, ext = os.path.splitext(path)
    return path if ext == '.json' else stem + '.json'


def sha256_file(path):
    digest = hashlib.sha256()
    try:
        with open(path, 'rb') as f:
            for chunk in iter(lambda: f.read(65536), b''):
                digest.update(chunk)
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=path)
    return digest.hexdigest()


def write_json(path, obj):
    try:
        with open(path, 'w') as f:
            json.dump(obj, f, indent=2, sort_keys=True)
            f.write('\n')
    except (OSError, TypeError, ValueError) as e:
        raise ArtifactIOError(str(e), path=path)
    return path


def read_json(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=path)
    except ValueError as e:
        raise ArtifactIOError('not valid JSON ({})'.format(e), path=path)


def _label_kind(domain):
    return domain.label_kind or 'none'


def _label_dtype(domain):
    # categorical labels come back as strings unless recorded as integers
    if domain.labels is None:
        return None
    if np.issubdtype(domain.labels.dtype, np.integer):
        return 'int'
    if domain.label_kind == 'real':
        return 'float'
    return 'str'


def _label_value(label, dtype):
    if dtype == 'int':
        return int(label)
    if dtype == 'float':
        return float(label)
    return str(label)


def _format_label(label, kind):
    if kind == 'none':
        return ''
    if kind == 'real':
        return repr(float(label))
    return str(label)


def _parse_labels(raw, kind, dtype=None):
    if kind == 'none':
        return None
    if kind == 'real':
        return np.array([float(v) for v in raw])
    if kind == 'categorical':
        return np.array([_label_value(v, dtype or 'str') for v in raw])
    raise ValueError('unknown label kind {!r}'.format(kind))


def write_dataset(path, domains, encoding='csv'):
    """
    Write domains as a sidecar and a payload next to it.

    Parameters
    ----------
    path : str
        Any of the stem, the sidecar path or the payload path.
    domains : list of LabeledCovarianceSet
        Domains of one matrix size.
    encoding : {'csv', 'binary'}

    Returns
    -------
    paths : list of str
        The payload and the sidecar, in that order.
    """
    if encoding not in ENCODINGS:
        raise ArtifactIOError(
            'unknown encoding {!r}'.format(encoding), path=path)
    dim = check_domains(domains)
    sidecar = sidecar_path(path)
    payload = os.path.splitext(sidecar)[0] + PAYLOAD_EXTENSIONS[encoding]

    header = {
        'format': FORMAT_NAME,
        'version': FORMAT_VERSION,
        'dim': dim,
        'encoding': encoding,
        'payload': os.path.basename(payload),
        'domains': [],
    }
    for domain in domains:
        entry = {
            'domain_id': domain.domain_id,
            'count': len(domain),
            'label_kind': _label_kind(domain),
            'metadata': dict(domain.metadata),
        }
        if domain.labels is not None:
            entry['label_dtype'] = _label_dtype(domain)
            if encoding == 'binary':
                entry['labels'] = [_label_value(v, entry['label_dtype'])
                                   for v in domain.labels]
        header['domains'].append(entry)

    try:
        if encoding == 'csv':
            _write_csv_payload(payload, domains, dim)
        else:
            _write_binary_payload(payload, domains, dim)
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=payload)
    write_json(sidecar, header)
    logger.debug('Wrote {} domains to {}'.format(len(domains), sidecar))
    return [payload, sidecar]


def _write_csv_payload(path, domains, dim):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['domain_id', 'index', 'label'] +
                        ['m{}'.format(i) for i in range(dim * dim)])
        for domain in domains:
            kind = _label_kind(domain)
            for i, matrix in enumerate(domain.matrices):
                label = domain.labels[i] if domain.labels is not None else None
                writer.writerow(
                    [domain.domain_id, i, _format_label(label, kind)] +
                    [repr(float(v)) for v in matrix.ravel()])


def _write_binary_payload(path, domains, dim):
    count = sum(len(d) for d in domains)
    stack = np.concatenate([d.matrices for d in domains])
    with open(path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, FORMAT_VERSION, dim, count))
        f.write(np.ascontiguousarray(stack, dtype='<f8').tobytes())


def _symmetrized(matrices, where):
    transposed = np.swapaxes(matrices, -1, -2)
    scale = np.linalg.norm(matrices, axis=(1, 2))
    asymmetry = np.linalg.norm(matrices - transposed, axis=(1, 2))
    bad = asymmetry > ASYMMETRY_TOL * np.where(scale > 0, scale, 1.0)
    for i in np.flatnonzero(bad):
        logger.warning('{}: matrix {} is not symmetric (relative asymmetry '
                       '{:.2e}); symmetrizing'.format(
                           where, int(i), asymmetry[i] / scale[i]))
    return (matrices + transposed) / 2


def read_dataset(path, validate=True):
    """
    Read the domains of a dataset written by :func:`write_dataset`.

    Integer class labels come back as integers. With ``validate=False``
    matrices are symmetrized but not checked for positive definiteness.

    Raises
    ------
    ArtifactIOError
        If a file is missing, unreadable, or disagrees with its sidecar.
    InvalidInput
        If a matrix is non-finite or not positive definite; the message
        names the domain and the index.
    """
    sidecar = sidecar_path(path)
    header = read_json(sidecar)
    try:
        if header.get('format') != FORMAT_NAME:
            raise ValueError('not an spdtransport dataset')
        if header['version'] != FORMAT_VERSION:
            raise ValueError('unsupported version {}'.format(header['version']))
        dim = int(header['dim'])
        entries = header['domains']
        payload = os.path.join(os.path.dirname(sidecar), header['payload'])
        if header['encoding'] == 'csv':
            blocks = _read_csv_payload(payload, dim, entries)
        elif header['encoding'] == 'binary':
            blocks = _read_binary_payload(payload, dim, entries)
        else:
            raise ValueError('unknown encoding {!r}'.format(header['encoding']))
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=sidecar)
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactIOError(str(e), path=sidecar)

    domains = []
    for entry, (matrices, labels) in zip(entries, blocks):
        where = '{} domain {!r}'.format(sidecar, entry['domain_id'])
        domains.append(LabeledCovarianceSet(
            entry['domain_id'], _symmetrized(matrices, where), labels,
            entry.get('metadata', {}), validate))
    return domains


def _read_csv_payload(path, dim, entries):
    rows = {}
    with open(path, 'r', newline='') as f:
        reader = csv.reader(f)
        columns = next(reader)
        if len(columns) != 3 + dim * dim:
            raise ValueError('{} has {} columns, expected {}'.format(
                path, len(columns), 3 + dim * dim))
        for line, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise ValueError('{} line {}: {} fields, expected {}'.format(
                    path, line, len(row), len(columns)))
            rows.setdefault(row[0], []).append(row)

    blocks = []
    for entry in entries:
        block = rows.pop(entry['domain_id'], [])
        if len(block) != entry['count']:
            raise ValueError('domain {!r}: sidecar declares {} items, {} has {}'
                             .format(entry['domain_id'], entry['count'],
                                     path, len(block)))
        matrices = np.array([[float(v) for v in row[3:]] for row in block])
        labels = _parse_labels([row[2] for row in block], entry['label_kind'],
                               entry.get('label_dtype'))
        blocks.append((matrices.reshape(-1, dim, dim), labels))
    if rows:
        raise ValueError('{} holds domains missing from the sidecar: {}'.format(
            path, sorted(rows)))
    return blocks


def _read_binary_payload(path, dim, entries):
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < HEADER.size:
        raise ValueError('{} is truncated'.format(path))
    magic, version, stored_dim, count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError('{} is not a binary spdtransport payload'.format(path))
    if version != FORMAT_VERSION or stored_dim != dim:
        raise ValueError('{}: header disagrees with the sidecar'.format(path))
    if count != sum(e['count'] for e in entries):
        raise ValueError('{} holds {} matrices, sidecar declares {}'.format(
            path, count, sum(e['count'] for e in entries)))
    expected = HEADER.size + 8 * count * dim * dim
    if len(data) != expected:
        raise ValueError('{} has {} bytes, expected {}'.format(
            path, len(data), expected))
    stack = np.frombuffer(data, dtype='<f8', offset=HEADER.size)
    stack = stack.astype(float).reshape(count, dim, dim)

    blocks, start = [], 0
    for entry in entries:
        stop = start + entry['count']
        labels = None
        if entry['label_kind'] != 'none':
            labels = _parse_labels(entry['labels'], entry['label_kind'],
                                   entry.get('label_dtype'))
        blocks.append((stack[start:stop], labels))
        start = stop
    return blocks


def write_features(path, feature_vectors, labels=None):
    """
    Feature vectors as CSV with columns ``index``, ``label``, ``f0`` ...
    """
    feature_vectors = np.asarray(feature_vectors, dtype=float)
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['index', 'label'] + [
                'f{}'.format(i) for i in range(feature_vectors.shape[1])])
            for i, v in enumerate(feature_vectors):
                label = '' if labels is None else labels[i]
                if isinstance(label, (float, np.floating)):
                    label = repr(float(label))
                writer.writerow([i, label] + [repr(float(x)) for x in v])
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=path)
    return path


def read_features(path):
    """
    Returns the label column as strings and the features as an array.
    """
    try:
        with open(path, 'r', newline='') as f:
            reader = csv.reader(f)
            next(reader)
            rows = list(reader)
        labels = [row[1] for row in rows]
        features = np.array([[float(x) for x in row[2:]] for row in rows])
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=path)
    except (StopIteration, ValueError) as e:
        raise ArtifactIOError('malformed feature file ({})'.format(e), path=path)
    return labels, features


def write_rows(path, header, rows):
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ArtifactIOError(e.strerror or str(e), path=path)
    return path


def write_confusion(path, classes, confusion):
    """
    Confusion matrix as CSV: one row per true class, one column per
    predicted class.
    """
    rows = [[str(c)] + [int(v) for v in row]
            for c, row in zip(classes, confusion)]
    return write_rows(path, ['true'] + [str(c) for c in classes], rows)


def load_datasets(paths):
    """
    Read several datasets and return all their domains, in order.
    """
    domains = []
    for path in paths:
        try:
            domains.extend(read_dataset(path))
        except ArtifactIOError:
            raise
        except SpdTransportError as e:
            e.args = ('{}: {}'.format(sidecar_path(path), e),)
            raise
    check_domains(domains)
    return domains

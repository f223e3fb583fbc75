"""
Re-check the invariants of adaptation artifacts written by the ``adapt``
command.
"""
import logging
import os
from dataclasses import asdict, dataclass

import numpy as np

from spdtransport.exceptions import ArtifactIOError, SpdTransportError
from spdtransport.fileformats import read_dataset, read_features, read_json
from spdtransport.mean import MeanConfig, mean_or_warn
from spdtransport.pipeline import (
    MEAN_TRANSPORT,
    PARALLEL_TRANSPORT,
    half_vectorize,
)
from spdtransport.spd import (
    distance,
    is_spd,
    relative_error,
    whitened_tangent,
)
from spdtransport.transport import (
    adapt_map_three_step,
    make_transporter,
    transport_spd,
)

logger = logging.getLogger(__name__)

CONGRUENCE_TOL = 1e-8
ISOMETRY_TOL = 1e-8
CENTROID_TOL = 1e-6
FEATURE_TOL = 1e-10
THREE_STEP_TOL = 1e-8
COINCIDENCE_TOL = 1e-8


@dataclass
class Check:
    name: str
    passed: bool
    max_error: float = 0.0
    tolerance: float = 0.0
    detail: str = ''

    def to_dict(self):
        data = asdict(self)
        if not np.isfinite(self.max_error):
            data['max_error'] = None
        return data


class Artifacts(object):
    """
    The files of one ``adapt`` run directory.
    """

    def __init__(self, run_dir):
        self.run_dir = run_dir
        self.adaptation = read_json(self.path('adaptation.json'))
        self.method = self.adaptation['method']
        self.inputs = read_dataset(self.path('inputs.json'))
        self.transported = read_dataset(self.path('transported.json'),
                                        validate=False)
        centroids = read_dataset(self.path('centroids.json'))[0]
        self.centroids = dict(zip(centroids.labels, centroids.matrices))
        self.hub = None
        if self.method != MEAN_TRANSPORT:
            self.hub = read_dataset(self.path('hub.json'))[0].matrices[0]
        self.features = {}
        for entry in self.adaptation['domains']:
            self.features[entry['domain_id']] = \
                read_features(self.path(entry['features']))[1]
        ids = [d.domain_id for d in self.inputs]
        if ids != [d.domain_id for d in self.transported] or \
                set(ids) != set(self.centroids) or set(ids) != set(self.features):
            raise ArtifactIOError('artifacts disagree on the domain ids',
                                  path=run_dir)

    def path(self, name):
        return os.path.join(self.run_dir, name)

    def pairs(self):
        for original, moved in zip(self.inputs, self.transported):
            yield original, moved, self.centroids[original.domain_id]


def _check(name, errors, tolerance, detail=''):
    max_error = float(max(errors)) if len(errors) else 0.0
    return Check(name, bool(max_error <= tolerance), max_error, tolerance,
                 detail)


def check_spd_validity(artifacts):
    """
    Every transported matrix is positive definite. The error is the
    number of matrices that are not.
    """
    failures = ['{}[{}]'.format(domain.domain_id, i)
                for domain in artifacts.transported
                for i, matrix in enumerate(domain.matrices)
                if not is_spd(matrix)]
    count = sum(len(d) for d in artifacts.transported)
    detail = '{} transported matrices'.format(count)
    if failures:
        detail += '; not positive definite: {}'.format(', '.join(failures))
    return Check('spd_validity', not failures, float(len(failures)), 0.0,
                 detail)


def check_transporter_congruence(artifacts):
    errors = []
    for _, _, centroid in artifacts.pairs():
        T = make_transporter(centroid, artifacts.hub)
        E = T.e_matrix
        errors.append(relative_error(E @ centroid @ E.T, artifacts.hub))
    return _check('transporter_congruence', errors, CONGRUENCE_TOL)


def check_within_domain_isometry(artifacts):
    """
    Distances between consecutive items, and between the first and the
    last, are the same before and after transport.
    """
    errors = []
    for original, moved, _ in artifacts.pairs():
        n = len(original)
        index_pairs = [(i, i + 1) for i in range(n - 1)]
        if n > 2:
            index_pairs.append((0, n - 1))
        for i, j in index_pairs:
            before = distance(original.matrices[i], original.matrices[j])
            after = distance(moved.matrices[i], moved.matrices[j])
            errors.append(abs(after - before) / max(before, 1.0))
    return _check('within_domain_isometry', errors, ISOMETRY_TOL)


def check_transport(artifacts):
    """
    Every transported matrix is E P E^T for its domain's transporter.
    """
    errors = []
    for original, moved, centroid in artifacts.pairs():
        expected = transport_spd(
            make_transporter(centroid, artifacts.hub), original.matrices)
        errors.extend(relative_error(a, b)
                      for a, b in zip(moved.matrices, expected))
    return _check('transport', errors, CONGRUENCE_TOL)


def check_centroid_mapping(artifacts):
    errors = []
    for _, moved, _ in artifacts.pairs():
        mean = mean_or_warn(moved.matrices, MeanConfig()).mean
        errors.append(relative_error(mean, artifacts.hub))
    return _check('centroid_mapping', errors, CENTROID_TOL)


def check_feature_consistency(artifacts):
    errors = []
    for original, moved, centroid in artifacts.pairs():
        if artifacts.method == MEAN_TRANSPORT:
            base = centroid
        else:
            base = artifacts.hub
        expected = half_vectorize(whitened_tangent(base, moved.matrices))
        stored = artifacts.features[original.domain_id]
        if stored.shape != expected.shape:
            errors.append(np.inf)
            continue
        scale = max(np.max(np.abs(expected)), 1.0)
        errors.append(np.max(np.abs(stored - expected)) / scale)
    return _check('feature_consistency', errors, FEATURE_TOL)


def check_three_step(artifacts):
    """
    The closed-form transport matches the log/transport/exp route on the
    first item of each domain.
    """
    errors = []
    for original, moved, centroid in artifacts.pairs():
        three_step = adapt_map_three_step(
            centroid, artifacts.hub, original.matrices[0])
        errors.append(relative_error(moved.matrices[0], three_step))
    return _check('three_step_agreement', errors, THREE_STEP_TOL)


def check_coincidence(artifacts, other):
    """
    Two runs over the same inputs produced the same features, e.g. with
    different hubs when the domain centroids commute.
    """
    errors = []
    for domain_id, features in artifacts.features.items():
        theirs = other.features.get(domain_id)
        if theirs is None or theirs.shape != features.shape:
            return Check('hub_coincidence', False, np.inf, COINCIDENCE_TOL,
                         'domain {!r} differs in shape'.format(domain_id))
        scale = max(np.max(np.abs(features)), 1.0)
        errors.append(np.max(np.abs(features - theirs)) / scale)
    return _check('hub_coincidence', errors, COINCIDENCE_TOL)


def verify_artifacts(run_dir, compare=None):
    """
    Run every check that applies to the artifacts' method.

    Returns
    -------
    checks : list of Check
    """
    artifacts = Artifacts(run_dir)
    checks = [check_spd_validity(artifacts)]
    if artifacts.method == PARALLEL_TRANSPORT:
        steps = (check_transporter_congruence, check_within_domain_isometry,
                 check_transport, check_centroid_mapping,
                 check_feature_consistency, check_three_step)
    else:
        steps = (check_feature_consistency,)
    for step in steps:
        try:
            checks.append(step(artifacts))
        except SpdTransportError as e:
            checks.append(Check(step.__name__[len('check_'):], False,
                                np.inf, detail=str(e)))
    if compare is not None:
        checks.append(check_coincidence(artifacts, Artifacts(compare)))
    for check in checks:
        log = logger.info if check.passed else logger.error
        log('{}: {} (max error {:.2e})'.format(
            check.name, 'ok' if check.passed else 'FAILED', check.max_error))
    return checks

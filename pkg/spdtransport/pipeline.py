"""
Unsupervised alignment of covariance matrices recorded in several
domains, and the feature vectors fed to classifiers.

Three methods share one fit/transform object, :class:`DomainAligner`:

``parallel_transport``
    Each domain is moved along the geodesic from its own Riemannian mean
    to a common hub (by default the Riemannian mean of the domain means)
    and projected onto the tangent space at the hub.
``mean_transport``
    Each domain is projected onto the tangent space at its own mean.
``baseline``
    All domains are projected at the Riemannian mean of the pooled data.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from spdtransport.domains import check_domains
from spdtransport.exceptions import (
    DimensionMismatch,
    InvalidInput,
    InvalidParameter,
)
from spdtransport.mean import mean_or_warn
from spdtransport.spd import (
    check_same_shape,
    check_spd,
    check_sym,
    whitened_tangent,
)
from spdtransport.transport import make_transporter, transport_spd

logger = logging.getLogger(__name__)

BASELINE = 'baseline'
MEAN_TRANSPORT = 'mean_transport'
PARALLEL_TRANSPORT = 'parallel_transport'
METHODS = (BASELINE, MEAN_TRANSPORT, PARALLEL_TRANSPORT)

HUB_MEAN_OF_MEANS = 'mean-of-means'
HUB_IDENTITY = 'identity'


def _weights(n):
    rows, cols = np.triu_indices(n)
    return rows, cols, np.where(rows == cols, 1.0, math.sqrt(2))


def half_vectorize(S):
    """
    Upper triangle of a symmetric matrix, row by row, with off-diagonal
    entries scaled by sqrt(2) so the Euclidean norm of the vector equals
    the Frobenius norm of the matrix.

    Works on a single matrix or on a stack.
    """
    S = check_sym(S, 'tangent matrix')
    rows, cols, weights = _weights(S.shape[-1])
    return S[..., rows, cols] * weights


def unvectorize(v):
    """
    Inverse of :func:`half_vectorize`.

    Raises
    ------
    InvalidInput
        If the length is not a triangular number n(n+1)/2.
    """
    v = np.asarray(v, dtype=float)
    d = v.shape[-1] if v.ndim else 0
    n = int(round((math.sqrt(8 * d + 1) - 1) / 2))
    if d == 0 or n * (n + 1) // 2 != d:
        raise InvalidInput(
            'A feature vector of length {} is not the upper triangle of a '
            'square matrix'.format(d))
    rows, cols, weights = _weights(n)
    S = np.zeros(v.shape[:-1] + (n, n))
    S[..., rows, cols] = v / weights
    S[..., cols, rows] = v / weights
    return S


@dataclass(eq=False)
class DomainAdaptation:
    """
    One domain after alignment. ``transported`` is the input itself for
    methods that move nothing.
    """
    domain_id: str
    centroid: np.ndarray
    transported: np.ndarray
    whitened_tangent: np.ndarray
    feature_vectors: np.ndarray
    labels: np.ndarray = None

    def __len__(self):
        return len(self.feature_vectors)


@dataclass(eq=False)
class AdaptationResult:
    """
    Output of :class:`DomainAligner` over a list of domains, in input
    order. ``grand_mean`` is the common reference point: the hub for
    parallel transport, the pooled mean for the baseline, and None for
    mean transport.
    """
    method: str
    grand_mean: np.ndarray
    per_domain: dict
    warnings: list = field(default_factory=list)

    @property
    def reference(self):
        return self.grand_mean

    @property
    def domain_ids(self):
        return list(self.per_domain)

    def features(self):
        return np.concatenate(
            [d.feature_vectors for d in self.per_domain.values()])

    def labels(self):
        if any(d.labels is None for d in self.per_domain.values()):
            return None
        return np.concatenate([d.labels for d in self.per_domain.values()])

    def item_domains(self):
        return np.concatenate([
            np.repeat(d.domain_id, len(d)) for d in self.per_domain.values()])


def check_method(method):
    if method not in METHODS:
        raise InvalidParameter('Unknown method {!r}; choose one of {}'.format(
            method, ', '.join(METHODS)))
    return method


class DomainAligner(object):
    """
    Learn the unsupervised statistics of a set of training domains with
    :meth:`fit`, then map any domain of the same size, labelled or not,
    into the common feature space with :meth:`transform`.

    ``hub`` applies to parallel transport only: ``'mean-of-means'``,
    ``'identity'`` or an explicit SPD matrix. ``centroids`` maps domain
    ids to Riemannian means already computed; means are looked up by
    domain id.
    """

    def __init__(self, method=PARALLEL_TRANSPORT, cfg=None,
                 hub=HUB_MEAN_OF_MEANS, strict=False, workers=1,
                 centroids=None):
        self.method = check_method(method)
        self.cfg = cfg
        self.hub = hub
        self.strict = strict
        self.workers = max(1, int(workers))
        self.centroids_ = dict(centroids or {})
        self.reference_ = None
        self.dim_ = None
        self.warnings_ = []

    def _mean(self, matrices):
        return mean_or_warn(matrices, self.cfg, self.strict,
                            self.warnings_).mean

    def centroid(self, domain):
        """
        Riemannian mean of a domain, computed once per domain id.
        """
        if domain.domain_id not in self.centroids_:
            self._keep(domain, self._domain_mean(domain))
        return self.centroids_[domain.domain_id]

    def _domain_mean(self, domain):
        found = []
        mean = mean_or_warn(domain.matrices, self.cfg, self.strict, found).mean
        return mean, found

    def _keep(self, domain, outcome):
        mean, found = outcome
        self.centroids_[domain.domain_id] = mean
        self.warnings_.extend(found)

    def _centroids_of(self, domains):
        if self.workers > 1:
            missing = [d for d in domains if d.domain_id not in self.centroids_]
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                # map yields in input order, so warnings follow the domains
                for domain, outcome in zip(
                        missing, pool.map(self._domain_mean, missing)):
                    self._keep(domain, outcome)
        return [self.centroid(d) for d in domains]

    def _resolve_hub(self, centroids):
        if isinstance(self.hub, str):
            if self.hub == HUB_MEAN_OF_MEANS:
                return self._mean(np.array(centroids))
            if self.hub == HUB_IDENTITY:
                return np.eye(self.dim_)
            raise InvalidParameter('Unknown hub {!r}'.format(self.hub))
        hub = check_spd(self.hub, 'hub')
        check_same_shape(hub, centroids[0])
        return hub

    def fit(self, domains):
        self.dim_ = check_domains(domains)
        self.warnings_ = []
        centroids = self._centroids_of(domains)

        if self.method == PARALLEL_TRANSPORT:
            self.reference_ = self._resolve_hub(centroids)
        elif self.method == BASELINE:
            if len(domains) == 1:
                self.reference_ = centroids[0]
            else:
                self.reference_ = self._mean(
                    np.concatenate([d.matrices for d in domains]))
        else:
            self.reference_ = None
        logger.debug('Fitted {} on {} domains'.format(self.method, len(domains)))
        return self

    def transform(self, domain):
        if self.dim_ is None:
            raise InvalidInput('DomainAligner.transform called before fit')
        check_domains([domain])
        if domain.dim != self.dim_:
            raise DimensionMismatch(
                'Domain {!r} holds {}x{} matrices, fitted on {}x{}'.format(
                    domain.domain_id, domain.dim, domain.dim,
                    self.dim_, self.dim_))
        centroid = self.centroid(domain)

        if self.method == PARALLEL_TRANSPORT:
            transported = transport_spd(
                make_transporter(centroid, self.reference_), domain.matrices)
            tangent = whitened_tangent(self.reference_, transported)
        elif self.method == MEAN_TRANSPORT:
            transported = domain.matrices
            tangent = whitened_tangent(centroid, domain.matrices)
        else:
            transported = domain.matrices
            tangent = whitened_tangent(self.reference_, domain.matrices)

        return DomainAdaptation(
            domain.domain_id, centroid, transported, tangent,
            half_vectorize(tangent), domain.labels)

    def fit_transform(self, domains):
        self.fit(domains)
        per_domain = {d.domain_id: self.transform(d) for d in domains}
        return AdaptationResult(self.method, self.reference_, per_domain,
                                list(self.warnings_))


def adapt(domains, cfg=None, hub=HUB_MEAN_OF_MEANS, strict=False, workers=1):
    """
    Move every domain to a common hub by parallel transport and return
    the whitened tangent features at the hub.

    With one domain this is the whitened tangent projection at the
    domain's own mean.
    """
    aligner = DomainAligner(PARALLEL_TRANSPORT, cfg, hub, strict, workers)
    return aligner.fit_transform(domains)


def baseline_no_transport(domains, cfg=None, strict=False, workers=1):
    aligner = DomainAligner(BASELINE, cfg, strict=strict, workers=workers)
    return aligner.fit_transform(domains)


def mean_transport(domains, cfg=None, strict=False, workers=1):
    aligner = DomainAligner(MEAN_TRANSPORT, cfg, strict=strict, workers=workers)
    return aligner.fit_transform(domains)


def method_features(method, domains, cfg=None, **kwargs):
    """
    Run one of ``METHODS`` by name over ``domains``.
    """
    check_method(method)
    if method != PARALLEL_TRANSPORT:
        kwargs.pop('hub', None)
    return DomainAligner(method, cfg, **kwargs).fit_transform(domains)

"""
Classification harness: leave-one-domain-out comparison of the
alignment methods, nearest-neighbour phase matching for the toy
problem, and PCA embeddings of feature vectors.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import StratifiedKFold, cross_val_score
from sklearn.neighbors import NearestCentroid

from spdtransport.domains import check_domains
from spdtransport.exceptions import (
    DegenerateLabels,
    EmptyInput,
    InvalidInput,
    InvalidParameter,
    MissingLabels,
)
from spdtransport.mean import mean_or_warn
from spdtransport.pipeline import (
    HUB_MEAN_OF_MEANS,
    METHODS,
    DomainAligner,
    adapt,
    check_method,
)

logger = logging.getLogger(__name__)

LEAVE_ONE_DOMAIN_OUT = 'leave-one-domain-out'

NEAREST_CENTROID = 'nearest_centroid'
LDA = 'lda'
CLASSIFIERS = (NEAREST_CENTROID, LDA)

# A toy match counts as correct within this phase error
PHASE_MATCH_TOL = math.pi / 36


def make_classifier(name=NEAREST_CENTROID):
    if name == NEAREST_CENTROID:
        return NearestCentroid()
    if name == LDA:
        return LinearDiscriminantAnalysis(solver='lsqr', shrinkage='auto')
    raise InvalidParameter('Unknown classifier {!r}; choose one of {}'.format(
        name, ', '.join(CLASSIFIERS)))


def train_classifier(features, labels, classifier=NEAREST_CENTROID):
    """
    Fit a classifier on feature vectors.

    The default is the Euclidean nearest class centroid; ties go to the
    class that sorts first. ``'lda'`` selects a shrinkage-regularized
    linear discriminant.

    Raises
    ------
    DegenerateLabels
        If the labels hold a single class.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or len(features) == 0:
        raise EmptyInput('No feature vectors to train on')
    labels = np.asarray(labels)
    if len(labels) != len(features):
        raise InvalidInput('{} labels for {} feature vectors'.format(
            len(labels), len(features)))
    if len(np.unique(labels)) < 2:
        raise DegenerateLabels(
            'Training needs at least two classes, got {}'.format(
                np.unique(labels).tolist()))
    return make_classifier(classifier).fit(features, labels)


@dataclass(eq=False)
class MethodReport:
    """
    Pooled confusion matrix of one method over all folds. Rows are true
    classes and columns predictions, both in the order of ``classes``.
    """
    method: str
    classes: list
    confusion: np.ndarray
    per_domain_accuracy: dict = field(default_factory=dict)

    @property
    def total(self):
        return int(self.confusion.sum())

    @property
    def accuracy(self):
        if self.total == 0:
            return 0.0
        return float(np.trace(self.confusion)) / self.total

    def to_dict(self):
        return {
            'method': self.method,
            'accuracy': self.accuracy,
            'classes': [str(c) for c in self.classes],
            'confusion': self.confusion.tolist(),
            'per_domain_accuracy': dict(self.per_domain_accuracy),
        }


@dataclass(eq=False)
class EvaluationReport:
    protocol: str
    classifier: str
    folds: list
    per_method: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def accuracies(self):
        return {name: r.accuracy for name, r in self.per_method.items()}

    def ranking(self):
        """
        Methods from best to worst accuracy; ties keep ``METHODS`` order.
        """
        return sorted(self.per_method,
                      key=lambda name: -self.per_method[name].accuracy)

    def to_dict(self):
        return {
            'protocol': self.protocol,
            'classifier': self.classifier,
            'folds': list(self.folds),
            'ranking': self.ranking(),
            'methods': {name: r.to_dict() for name, r in self.per_method.items()},
            'warnings': list(self.warnings),
        }


def _check_labelled(domains):
    for domain in domains:
        if domain.labels is None:
            raise MissingLabels(
                'Domain {!r} has no labels to evaluate against'.format(
                    domain.domain_id), domain_id=domain.domain_id)


def evaluate_split(train_domains, test_domain, method, cfg=None,
                   classifier=NEAREST_CENTROID, hub=HUB_MEAN_OF_MEANS,
                   strict=False, workers=1, centroids=None, classes=None,
                   warnings=None):
    """
    Fit ``method`` and a classifier on ``train_domains``, then classify
    ``test_domain``. The aligner only ever sees the test domain with its
    labels stripped off.

    Returns
    -------
    confusion : ndarray
        Confusion matrix over ``classes``.
    """
    aligner = DomainAligner(check_method(method), cfg, hub, strict, workers,
                            centroids)
    train = aligner.fit_transform(train_domains)
    model = train_classifier(train.features(), train.labels(), classifier)
    test = aligner.transform(test_domain.unlabeled())
    predicted = model.predict(test.feature_vectors)
    if warnings is not None:
        warnings.extend(w for w in aligner.warnings_ if w not in warnings)
    if classes is None:
        classes = np.unique(np.concatenate(
            [d.labels for d in train_domains] + [test_domain.labels]))
    return confusion_matrix(test_domain.labels, predicted, labels=classes)


def compare_methods(domains, methods=METHODS, cfg=None,
                    classifier=NEAREST_CENTROID, hub=HUB_MEAN_OF_MEANS,
                    strict=False, workers=1):
    """
    Leave-one-domain-out comparison of several methods over the same
    folds. Each domain's Riemannian mean is computed once and shared by
    every fold and method.

    Raises
    ------
    InvalidInput
        With fewer than two domains.
    MissingLabels
        If a domain carries no labels.
    """
    check_domains(domains)
    if len(domains) < 2:
        raise InvalidInput(
            'Leave-one-domain-out needs at least two domains, got {}'.format(
                len(domains)))
    _check_labelled(domains)
    methods = [check_method(m) for m in methods]
    classes = np.unique(np.concatenate([d.labels for d in domains]))

    warnings = []
    centroids = {
        d.domain_id: mean_or_warn(d.matrices, cfg, strict, warnings).mean
        for d in domains}
    report = EvaluationReport(
        LEAVE_ONE_DOMAIN_OUT, classifier,
        [d.domain_id for d in domains], warnings=warnings)

    for method in methods:
        confusion = np.zeros((len(classes), len(classes)), dtype=int)
        per_domain = {}
        for k, test_domain in enumerate(domains):
            train_domains = domains[:k] + domains[k + 1:]
            fold = evaluate_split(
                train_domains, test_domain, method, cfg, classifier, hub,
                strict, workers, centroids, classes, warnings)
            per_domain[test_domain.domain_id] = \
                float(np.trace(fold)) / fold.sum()
            confusion += fold
        report.per_method[method] = MethodReport(
            method, classes.tolist(), confusion, per_domain)
        logger.info('{}: accuracy {:.3f}'.format(
            method, report.per_method[method].accuracy))
    return report


def evaluate_cross_domain(domains, method, cfg=None,
                          protocol=LEAVE_ONE_DOMAIN_OUT, **kwargs):
    if protocol != LEAVE_ONE_DOMAIN_OUT:
        raise InvalidParameter('Unknown protocol {!r}'.format(protocol))
    return compare_methods(domains, [method], cfg, **kwargs)


def within_domain_accuracy(domain, folds=5, classifier=NEAREST_CENTROID,
                           cfg=None):
    """
    Stratified k-fold accuracy inside one domain, on whitened tangent
    features at the domain's own mean.
    """
    _check_labelled([domain])
    result = adapt([domain], cfg)
    scores = cross_val_score(
        make_classifier(classifier), result.features(), domain.labels,
        cv=StratifiedKFold(n_splits=folds))
    return float(np.mean(scores))


class ToyAlignment(NamedTuple):
    mean_abs_phase_error: float
    cross_nn_top1: float


def toy_alignment_score(result, source_id=None, target_id=None):
    """
    Match every item of the target domain to its Euclidean nearest
    neighbour among the source domain's feature vectors and compare
    phases.

    By default the source is the first domain of ``result`` and the
    target the second.

    Returns
    -------
    score : ToyAlignment
        Mean absolute phase error of the matches, and the fraction of
        matches within pi/36 of the true phase.
    """
    ids = result.domain_ids
    if len(ids) < 2 and (source_id is None or target_id is None):
        raise InvalidInput('Phase matching needs two domains')
    source = result.per_domain[source_id or ids[0]]
    target = result.per_domain[target_id or ids[1]]
    for d in (source, target):
        if d.labels is None:
            raise MissingLabels(
                'Domain {!r} has no phase labels'.format(d.domain_id),
                domain_id=d.domain_id)
        if not np.issubdtype(np.asarray(d.labels).dtype, np.floating):
            raise InvalidInput(
                'Domain {!r} carries categorical labels, phase matching '
                'needs real ones'.format(d.domain_id))

    nearest = np.argmin(
        cdist(target.feature_vectors, source.feature_vectors), axis=1)
    errors = np.abs(source.labels[nearest] - target.labels)
    return ToyAlignment(float(np.mean(errors)),
                        float(np.mean(errors <= PHASE_MATCH_TOL)))


@dataclass(eq=False)
class EmbeddingExport:
    coords: np.ndarray
    labels: np.ndarray = None
    domain_ids: np.ndarray = None
    explained_variance_ratio: np.ndarray = None

    def __len__(self):
        return len(self.coords)

    def rows(self):
        labels = self.labels if self.labels is not None else [''] * len(self)
        domains = self.domain_ids if self.domain_ids is not None \
            else [''] * len(self)
        for (x, y), label, domain in zip(self.coords, labels, domains):
            yield float(x), float(y), label, domain


def pca_embed(features, k=2, labels=None, domain_ids=None):
    """
    Project feature vectors onto their first ``k`` principal components.

    Components come from the eigendecomposition of the covariance of the
    centred features; each is signed so its largest-magnitude loading is
    positive.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise InvalidInput('PCA needs at least two feature vectors')
    if not 1 <= k <= X.shape[1]:
        raise InvalidParameter(
            'k must lie in [1, {}], got {!r}'.format(X.shape[1], k))
    for name, values in (('labels', labels), ('domain ids', domain_ids)):
        if values is not None and len(values) != len(X):
            raise InvalidInput('{} {} for {} feature vectors'.format(
                len(values), name, len(X)))

    centred = X - X.mean(axis=0)
    w, V = np.linalg.eigh(centred.T @ centred / (len(X) - 1))
    w, V = np.clip(w[::-1], 0, None), V[:, ::-1]
    components = V[:, :k]
    signs = np.sign(components[np.argmax(np.abs(components), axis=0),
                               np.arange(k)])
    components = components * np.where(signs == 0, 1.0, signs)
    total = w.sum()
    ratio = w[:k] / total if total > 0 else np.zeros(k)
    return EmbeddingExport(
        centred @ components,
        None if labels is None else np.asarray(labels),
        None if domain_ids is None else np.asarray(domain_ids),
        ratio)

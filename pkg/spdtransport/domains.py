"""
Containers for the covariance matrices of one acquisition domain.
"""
from dataclasses import InitVar, dataclass, field

import numpy as np

from spdtransport.exceptions import (
    DimensionMismatch,
    EmptyInput,
    InvalidInput,
)
from spdtransport.spd import check_spd


@dataclass(eq=False)
class LabeledCovarianceSet:
    """
    The SPD matrices recorded in one domain, with optional labels.

    Labels are either categorical (class names or integer classes) or
    real-valued (for instance a hidden phase).

    With ``validate=False`` the matrices are only checked for shape and
    finiteness, so artifacts under verification can hold a matrix that
    is no longer positive definite.
    """
    domain_id: str
    matrices: np.ndarray
    labels: np.ndarray = None
    metadata: dict = field(default_factory=dict)
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        self.domain_id = str(self.domain_id)
        try:
            matrices = np.asarray(self.matrices, dtype=float)
        except (TypeError, ValueError):
            raise InvalidInput(
                'Domain {!r}: matrices are not numeric'.format(self.domain_id))
        if matrices.size == 0:
            raise EmptyInput(
                'Domain {!r} has no matrices'.format(self.domain_id))
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
            raise InvalidInput(
                'Domain {!r}: expected a stack of square matrices, '
                'got shape {}'.format(self.domain_id, matrices.shape))
        finite = np.all(np.isfinite(matrices), axis=(1, 2))
        if not np.all(finite):
            raise InvalidInput(
                'Domain {!r}: matrix {} has non-finite entries'.format(
                    self.domain_id, int(np.argmin(finite))))
        if validate:
            matrices = check_spd(
                matrices, 'Domain {!r}: matrix'.format(self.domain_id))
        self.matrices = matrices

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (len(matrices),):
                raise InvalidInput(
                    'Domain {!r}: {} labels for {} matrices'.format(
                        self.domain_id, labels.size, len(matrices)))
            self.labels = labels
        self.metadata = {str(k): str(v) for k, v in self.metadata.items()}

    def __len__(self):
        return len(self.matrices)

    @property
    def dim(self):
        return self.matrices.shape[-1]

    @property
    def label_kind(self):
        if self.labels is None:
            return None
        if np.issubdtype(self.labels.dtype, np.floating):
            return 'real'
        return 'categorical'

    def unlabeled(self):
        """
        The same matrices with the labels stripped off.
        """
        return LabeledCovarianceSet(
            self.domain_id, self.matrices, None, dict(self.metadata))


def check_domains(domains):
    """
    Check a list of domains is non-empty, every domain has matrices, and
    all matrices share one size. Returns the common size.
    """
    if not domains:
        raise EmptyInput('No domains given')
    for domain in domains:
        if len(domain) == 0:
            raise EmptyInput('Domain {!r} is empty'.format(domain.domain_id))
    dim = domains[0].dim
    for domain in domains[1:]:
        if domain.dim != dim:
            raise DimensionMismatch(
                'Domain {!r} holds {}x{} matrices, expected {}x{}'.format(
                    domain.domain_id, domain.dim, domain.dim, dim, dim))
    ids = [domain.domain_id for domain in domains]
    if len(set(ids)) != len(ids):
        raise InvalidInput('Domain ids must be unique, got {}'.format(ids))
    return dim

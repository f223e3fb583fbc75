"""
Riemannian (Karcher) mean of a set of SPD matrices.
"""
import logging
from dataclasses import dataclass

import numpy as np

from spdtransport.exceptions import (
    DidNotConverge,
    EmptyInput,
    InvalidParameter,
)
from spdtransport.spd import (
    _eigenframe,
    _funm,
    _unwhiten,
    _whiten,
    check_same_shape,
    check_spd,
    symmetrize,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanConfig:
    """
    Stopping rule of the mean iteration: stop once the Frobenius norm of
    the mean tangent vector is at most ``epsilon``, or give up after
    ``max_iterations`` gradient evaluations.
    """
    epsilon: float = 1e-9
    max_iterations: int = 100

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidParameter(
                'epsilon must be positive, got {!r}'.format(self.epsilon))
        if int(self.max_iterations) != self.max_iterations or \
                self.max_iterations < 1:
            raise InvalidParameter(
                'max_iterations must be a positive integer, got {!r}'.format(
                    self.max_iterations))


@dataclass(frozen=True, eq=False)
class MeanResult:
    mean: np.ndarray
    iterations: int
    final_gradient_norm: float
    converged: bool = True


def _stack(matrices):
    if matrices is None or len(matrices) == 0:
        raise EmptyInput('Cannot average an empty set of matrices')
    check_same_shape(*matrices)
    return check_spd(np.asarray(matrices, dtype=float))


def riemannian_mean(matrices, cfg=None):
    r"""
    Riemannian mean of a set of SPD matrices by fixed-point iteration.

    The iteration starts at the arithmetic mean and repeats

    .. math::
        \bar{P} \leftarrow \mathrm{Exp}_{\bar{P}}\Big(\frac{1}{N}
        \sum_i \mathrm{Log}_{\bar{P}}(P_i)\Big)

    with unit step until the mean tangent vector has Frobenius norm at
    most ``cfg.epsilon``.

    Parameters
    ----------
    matrices : sequence of ndarray, shape (N, n, n)
        SPD matrices of one size.
    cfg : MeanConfig, optional
        Stopping rule; defaults to ``MeanConfig()``.

    Returns
    -------
    result : MeanResult
        The mean, the number of gradient evaluations and the final
        gradient norm.

    Raises
    ------
    EmptyInput
        If ``matrices`` is empty.
    DidNotConverge
        If the gradient norm is still above ``epsilon`` after
        ``max_iterations`` evaluations. The exception's ``result`` holds
        the last iterate.
    """
    cfg = cfg or MeanConfig()
    stack = _stack(matrices)
    mean = symmetrize(np.mean(stack, axis=0))
    gradient_norm = np.inf
    for iteration in range(1, cfg.max_iterations + 1):
        frame = _eigenframe(mean)
        # mean of the whitened logarithms; Log_P(P_i) = P^{1/2} L_i P^{1/2}
        whitened = np.mean(_funm(_whiten(frame, stack), np.log), axis=0)
        gradient_norm = float(np.linalg.norm(_unwhiten(frame, whitened)))
        logger.debug('Mean iteration {}: gradient norm {:.3e}'.format(
            iteration, gradient_norm))
        if gradient_norm <= cfg.epsilon:
            return MeanResult(mean, iteration, gradient_norm)
        mean = _unwhiten(frame, _funm(whitened, np.exp))

    result = MeanResult(mean, cfg.max_iterations, gradient_norm,
                        converged=False)
    raise DidNotConverge(
        'Riemannian mean did not converge in {} iterations '
        '(gradient norm {:.3e} > {:.1e})'.format(
            cfg.max_iterations, gradient_norm, cfg.epsilon),
        result=result)


def mean_of_means(centroids, cfg=None):
    """
    Riemannian mean of a set of centroids, each counted once.
    """
    return riemannian_mean(centroids, cfg).mean


def mean_or_warn(matrices, cfg=None, strict=False, warnings=None):
    """
    Like :func:`riemannian_mean`, but a non-converged mean is logged and
    returned unless ``strict`` is set. Warning messages are appended to
    ``warnings`` when a list is given.
    """
    try:
        return riemannian_mean(matrices, cfg)
    except DidNotConverge as e:
        if strict:
            raise
        logger.warning(str(e))
        if warnings is not None:
            warnings.append(str(e))
        return e.result

"""
Riemannian geometry of the cone of symmetric positive-definite matrices.

Every matrix function here goes through one symmetric eigendecomposition
of an explicitly symmetrized input. Points on the cone are plain
``numpy`` arrays validated by :func:`check_spd`; tangent vectors carry
their base point in a :class:`TangentVector`.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigvalsh

from spdtransport.exceptions import (
    BasePointMismatch,
    DimensionMismatch,
    InvalidInput,
    InvalidParameter,
    NotPositiveDefinite,
)

# Smallest eigenvalue must exceed this times max(1, largest eigenvalue)
SPD_TOLERANCE = 1e-10

# Relative tolerances for the eigendecomposition invariants
RECON_TOL = 1e-8
ORTHO_TOL = 1e-8

# Congruences and witnesses above this condition number count as singular
MAX_CONDITION = 1e12


class EigenDecomposition(NamedTuple):
    """
    Eigenvalues in descending order and the matching orthonormal
    eigenvectors, stored as columns.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        V = self.eigenvectors
        return symmetrize((V * self.eigenvalues) @ V.T)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """
    A symmetric matrix ``value`` in the tangent space at ``base_point``.
    """
    base_point: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        base = _frozen(check_sym(self.base_point, 'base point'))
        value = _frozen(check_sym(self.value, 'tangent vector'))
        if base.shape != value.shape:
            raise DimensionMismatch(
                'Tangent vector of shape {} at a base point of shape {}'.format(
                    value.shape, base.shape))
        object.__setattr__(self, 'base_point', base)
        object.__setattr__(self, 'value', value)

    @property
    def dim(self):
        return self.value.shape[0]

    def __neg__(self):
        return TangentVector(self.base_point, -self.value)


def _frozen(A):
    A = np.array(A, dtype=float)
    A.setflags(write=False)
    return A


def symmetrize(A):
    """
    Return (A + A^T) / 2, over the last two axes.
    """
    A = np.asarray(A, dtype=float)
    return (A + np.swapaxes(A, -1, -2)) / 2


def check_sym(A, name='matrix'):
    """
    Validate a real square matrix, or a stack of them, and return its
    symmetrized copy.

    Raises
    ------
    InvalidInput
        If ``A`` is not square, is empty or has non-finite entries.
    """
    try:
        A = np.asarray(A, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput('{} is not a real matrix'.format(name))
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise InvalidInput(
            '{} must be square, got shape {}'.format(name, A.shape))
    if not np.all(np.isfinite(A)):
        raise InvalidInput('{} has non-finite entries'.format(name))
    return symmetrize(A)


def spd_threshold(max_eigenvalue):
    return SPD_TOLERANCE * np.maximum(1.0, max_eigenvalue)


def check_spd(P, name='matrix'):
    """
    Validate a symmetric positive-definite matrix, or a stack of them.

    The smallest eigenvalue must exceed ``SPD_TOLERANCE * max(1, lambda_max)``.
    Degenerate matrices are rejected; see :func:`regularize`.

    Returns
    -------
    P : ndarray, shape (..., n, n)
        The symmetrized input.

    Raises
    ------
    NotPositiveDefinite
        If any matrix fails the eigenvalue test.
    """
    P = check_sym(P, name)
    w = np.linalg.eigvalsh(P)
    ok = w[..., 0] > spd_threshold(w[..., -1])
    if not np.all(ok):
        if P.ndim == 2:
            raise NotPositiveDefinite(
                '{} is not positive definite (smallest eigenvalue {!r})'.format(
                    name, float(w[0])),
                min_eigenvalue=float(w[0]))
        index = tuple(int(i) for i in np.argwhere(~ok)[0])
        bad = float(w[index][0])
        where = index[0] if len(index) == 1 else index
        raise NotPositiveDefinite(
            '{} at index {} is not positive definite '
            '(smallest eigenvalue {!r})'.format(name, where, bad),
            min_eigenvalue=bad)
    return P


def is_spd(P):
    try:
        check_spd(P)
    except InvalidInput:
        return False
    return True


def check_same_shape(*matrices):
    shape = np.shape(matrices[0])[-2:]
    for M in matrices[1:]:
        if np.shape(M)[-2:] != shape:
            raise DimensionMismatch(
                'Expected {0}x{0} matrices, got shape {1}'.format(
                    shape[0], np.shape(M)))


def relative_error(A, B):
    """
    Frobenius norm of A - B relative to the norm of B (absolute when B
    is zero).
    """
    scale = np.linalg.norm(B)
    diff = np.linalg.norm(np.asarray(A) - np.asarray(B))
    return float(diff / scale) if scale > 0 else float(diff)


def regularize(P, epsilon):
    """
    Return P + epsilon * I, for callers repairing a degenerate covariance.
    """
    P = check_sym(P)
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise InvalidParameter('epsilon must be positive, got {!r}'.format(epsilon))
    return P + epsilon * np.eye(P.shape[-1])


def check_invertible(E, dim=None, name='congruence'):
    """
    Validate a real invertible matrix, condition number at most 1e12.
    """
    try:
        E = np.asarray(E, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput('{} is not a real matrix'.format(name))
    if E.ndim != 2 or E.shape[0] != E.shape[1] or \
            (dim is not None and E.shape[0] != dim):
        raise InvalidInput('{} has shape {}'.format(name, E.shape))
    if not np.all(np.isfinite(E)):
        raise InvalidInput('{} has non-finite entries'.format(name))
    if np.linalg.cond(E) > MAX_CONDITION:
        raise InvalidInput('{} is singular'.format(name))
    return E


def _eigh(A):
    w, V = np.linalg.eigh(symmetrize(A))
    return w[..., ::-1], V[..., ::-1]


def _funm(A, func):
    w, V = _eigh(A)
    return symmetrize((V * func(w)[..., None, :]) @ np.swapaxes(V, -1, -2))


def _sqrt_pair(P):
    # square root and inverse square root from the same decomposition
    w, V = _eigh(P)
    Vt = np.swapaxes(V, -1, -2)
    root = np.sqrt(w)[..., None, :]
    return symmetrize((V * root) @ Vt), symmetrize((V / root) @ Vt)


def _eigenframe(base):
    # eigenvectors and square-rooted eigenvalues of a base point
    w, U = _eigh(base)
    return U, np.sqrt(w)


def _whiten(frame, A):
    # B^{-1/2} A B^{-1/2} in the eigenbasis of B
    U, root = frame
    return symmetrize((np.swapaxes(U, -1, -2) @ A @ U)
                      / np.multiply.outer(root, root))


def _unwhiten(frame, X):
    U, root = frame
    return symmetrize(U @ (X * np.multiply.outer(root, root))
                      @ np.swapaxes(U, -1, -2))


def _rotate_back(frame, X):
    U, _ = frame
    return symmetrize(U @ X @ np.swapaxes(U, -1, -2))


def sym_eig(A):
    """
    Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    A : ndarray, shape (n, n)
        Symmetric matrix; it is symmetrized before decomposition.

    Returns
    -------
    eig : EigenDecomposition
        Eigenvalues sorted in descending order and orthonormal
        eigenvectors as columns.
    """
    A = check_sym(A)
    w, V = _eigh(A)
    return EigenDecomposition(w, V)


def spd_power(P, t):
    """
    Matrix power of an SPD matrix, mapping each eigenvalue to lambda**t.

    Parameters
    ----------
    P : ndarray, shape (n, n)
        SPD matrix.
    t : float
        Exponent.

    Returns
    -------
    Pt : ndarray, shape (n, n)
        SPD matrix. ``spd_power(P, 0)`` is the identity and
        ``spd_power(P, 1)`` is ``P``.
    """
    P = check_spd(P)
    if not np.isfinite(t):
        raise InvalidParameter('Exponent must be finite, got {!r}'.format(t))
    if t == 0:
        return np.eye(P.shape[-1])
    if t == 1:
        return P
    return _funm(P, lambda w: w ** t)


def spd_sqrt(P):
    return _funm(check_spd(P), np.sqrt)


def spd_inv_sqrt(P):
    return _funm(check_spd(P), lambda w: 1.0 / np.sqrt(w))


def spd_log(P):
    """
    Matrix logarithm of an SPD matrix; the result is symmetric.

    Raises
    ------
    NotPositiveDefinite
        If ``P`` is not SPD.
    """
    return _funm(check_spd(P), np.log)


def spd_exp(S):
    """
    Matrix exponential of a symmetric matrix; the result is SPD.
    """
    return _funm(check_sym(S), np.exp)


def _as_tangent(base, S):
    if isinstance(S, TangentVector):
        if not same_point(S.base_point, base):
            raise BasePointMismatch(
                'Tangent vector is not based at the given point')
        return S
    return TangentVector(base, S)


def same_point(A, B):
    """
    True when two base points are the same matrix up to round-off.
    """
    if A is B:
        return True
    if np.shape(A) != np.shape(B):
        return False
    return bool(np.array_equal(A, B) or
                np.allclose(A, B, rtol=1e-10, atol=0))


def inner_product(S1, S2):
    r"""
    Affine-invariant inner product of two tangent vectors.

    .. math::
        \langle S_1, S_2 \rangle_P =
        \mathrm{tr}(P^{-1/2} S_1 P^{-1/2} P^{-1/2} S_2 P^{-1/2})

    Parameters
    ----------
    S1, S2 : TangentVector
        Tangent vectors at the same base point.

    Returns
    -------
    value : float

    Raises
    ------
    BasePointMismatch
        If the base points differ.
    """
    if not same_point(S1.base_point, S2.base_point):
        raise BasePointMismatch('Tangent vectors have different base points')
    frame = _eigenframe(check_spd(S1.base_point, 'base point'))
    return float(np.sum(_whiten(frame, S1.value) * _whiten(frame, S2.value)))


def norm(S):
    return float(np.sqrt(max(inner_product(S, S), 0.0)))


def geodesic(P1, P2, t):
    r"""
    Point at position ``t`` on the geodesic from ``P1`` to ``P2``.

    .. math::
        \varphi(t) = P_1^{1/2} (P_1^{-1/2} P_2 P_1^{-1/2})^t P_1^{1/2}

    Parameters
    ----------
    P1, P2 : ndarray, shape (n, n)
        SPD matrices.
    t : float
        Position in [0, 1].

    Returns
    -------
    P : ndarray, shape (n, n)
        SPD matrix; ``P1`` at t=0 and ``P2`` at t=1.

    Raises
    ------
    InvalidParameter
        If ``t`` is outside [0, 1].
    """
    if not (np.isfinite(t) and 0 <= t <= 1):
        raise InvalidParameter('t must lie in [0, 1], got {!r}'.format(t))
    P1 = check_spd(P1)
    P2 = check_spd(P2)
    check_same_shape(P1, P2)
    if t == 0:
        return P1
    if t == 1:
        return P2
    frame = _eigenframe(P1)
    return _unwhiten(frame, _funm(_whiten(frame, P2), lambda w: w ** t))


def distance(P1, P2):
    """
    Riemannian distance between two SPD matrices,
    sqrt(sum(log(lambda_i)^2)) over the eigenvalues of P1 P2^{-1}.

    Raises
    ------
    DimensionMismatch
        If the matrices differ in size.
    """
    check_same_shape(P1, P2)
    P1 = check_spd(P1)
    P2 = check_spd(P2)
    w = eigvalsh(P1, P2)
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def log_map(base, P):
    r"""
    Logarithm map: project ``P`` onto the tangent space at ``base``.

    .. math::
        \mathrm{Log}_B(P) = B^{1/2} \log(B^{-1/2} P B^{-1/2}) B^{1/2}

    Parameters
    ----------
    base : ndarray, shape (n, n)
        SPD base point.
    P : ndarray, shape (n, n)
        SPD matrix.

    Returns
    -------
    S : TangentVector
        Tangent vector at ``base``.
    """
    base = check_spd(base, 'base point')
    P = check_spd(P)
    check_same_shape(base, P)
    frame = _eigenframe(base)
    return TangentVector(
        base, _unwhiten(frame, _funm(_whiten(frame, P), np.log)))


def exp_map(base, S):
    r"""
    Exponential map: the inverse of :func:`log_map` at the same base.

    .. math::
        \mathrm{Exp}_B(S) = B^{1/2} \exp(B^{-1/2} S B^{-1/2}) B^{1/2}

    Parameters
    ----------
    base : ndarray, shape (n, n)
        SPD base point.
    S : TangentVector or ndarray, shape (n, n)
        Tangent vector at ``base``. A bare symmetric matrix is taken to
        be based at ``base``.

    Returns
    -------
    P : ndarray, shape (n, n)
        SPD matrix.

    Raises
    ------
    BasePointMismatch
        If ``S`` is based elsewhere.
    """
    base = check_spd(base, 'base point')
    S = _as_tangent(base, S)
    frame = _eigenframe(base)
    return _unwhiten(frame, _funm(_whiten(frame, S.value), np.exp))


def geodesic_velocity(P1, P2, endpoint='start'):
    """
    Velocity of the geodesic from ``P1`` to ``P2`` at one of its ends.

    ``'start'`` gives Log_{P1}(P2) at P1, ``'end'`` gives
    -Log_{P2}(P1) at P2.
    """
    if endpoint == 'start':
        return log_map(P1, P2)
    if endpoint == 'end':
        return -log_map(P2, P1)
    raise InvalidParameter(
        "endpoint must be 'start' or 'end', got {!r}".format(endpoint))


def whitened_tangent(base, P):
    """
    Whitened tangent projection log(B^{-1/2} P B^{-1/2}).

    Near ``base`` the Frobenius distance between two projections
    approximates their Riemannian distance.

    Parameters
    ----------
    base : ndarray, shape (n, n)
        SPD reference point.
    P : ndarray, shape (n, n) or (N, n, n)
        SPD matrix or stack of SPD matrices.

    Returns
    -------
    S : ndarray, same shape as ``P``
        Symmetric matrices.
    """
    base = check_spd(base, 'base point')
    P = check_spd(P)
    check_same_shape(base, P)
    frame = _eigenframe(base)
    return _rotate_back(frame, _funm(_whiten(frame, P), np.log))

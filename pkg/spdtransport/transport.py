"""
Parallel transport on the SPD cone along the geodesic between two points,
the congruence it induces on SPD matrices, and the machinery for pairs
of points related by a common congruence.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from spdtransport.datagen import make_random_spd, perturb_spd
from spdtransport.exceptions import InvalidInput
from spdtransport.spd import (
    TangentVector,
    _as_tangent,
    _eigenframe,
    _eigh,
    _frozen,
    _funm,
    _whiten,
    check_invertible,
    check_same_shape,
    check_spd,
    exp_map,
    log_map,
    relative_error,
    spd_log,
    symmetrize,
)

logger = logging.getLogger(__name__)

# Decision tolerance of are_equivalent_pairs
EQUIVALENCE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Transporter:
    """
    Parallel transport from ``source`` (B) to ``target`` (A) along their
    geodesic, stored as the matrix E = (A B^{-1})^{1/2} of the congruence
    S -> E S E^T. Build it with :func:`make_transporter`.
    """
    source: np.ndarray
    target: np.ndarray
    e_matrix: np.ndarray

    @property
    def dim(self):
        return self.e_matrix.shape[0]

    def inverse(self):
        """
        The transporter from ``target`` back to ``source``.
        """
        return make_transporter(self.target, self.source)


def make_transporter(B, A):
    r"""
    Parallel transport from ``B`` to ``A``.

    ``E`` is computed through the symmetric matrix
    :math:`B^{-1/2} A B^{-1/2}`, which has the same square root as the
    non-symmetric :math:`A B^{-1}` up to the similarity by
    :math:`B^{1/2}`:

    .. math::
        E = B^{1/2} (B^{-1/2} A B^{-1/2})^{1/2} B^{-1/2}

    Parameters
    ----------
    B, A : ndarray, shape (n, n)
        Source and target SPD matrices.

    Returns
    -------
    T : Transporter
        ``E B E^T = A``. When ``B`` and ``A`` are the same array ``E`` is
        the identity.

    Raises
    ------
    DimensionMismatch
        If the matrices differ in size.
    """
    B = check_spd(B, 'source')
    A = check_spd(A, 'target')
    check_same_shape(B, A)
    if np.array_equal(A, B):
        E = np.eye(B.shape[0])
    else:
        frame = _eigenframe(B)
        U, root = frame
        E = (U * root) @ _funm(_whiten(frame, A), np.sqrt) @ (U / root).T
    return Transporter(_frozen(B), _frozen(A), _frozen(E))


def transport_tangent(T, S):
    """
    Transport a tangent vector at ``T.source`` to ``T.target``: S -> E S E^T.

    A bare symmetric matrix is taken to be based at ``T.source``.

    Raises
    ------
    BasePointMismatch
        If ``S`` is based at another point.
    """
    S = _as_tangent(T.source, S)
    E = T.e_matrix
    return TangentVector(T.target, symmetrize(E @ S.value @ E.T))


def transport_spd(T, P):
    """
    Parallel transport of an SPD matrix: E P E^T.

    ``P`` may be a single matrix or a stack; the result has the same
    shape. ``transport_spd(T, T.source)`` is ``T.target``.
    """
    P = check_spd(P)
    check_same_shape(T.e_matrix, P)
    E = T.e_matrix
    return symmetrize(E @ P @ E.T)


def transport_spd_batch(T, matrices):
    """
    Transport an (N, n, n) stack with the one ``E`` of ``T``.
    """
    matrices = np.asarray(matrices, dtype=float)
    if matrices.ndim != 3:
        raise InvalidInput(
            'Expected a stack of matrices, got shape {}'.format(matrices.shape))
    return transport_spd(T, matrices)


def adapt_map_three_step(B, A, P):
    """
    Move ``P`` from around ``B`` to around ``A`` in three explicit steps:
    project onto the tangent space at ``B``, transport the tangent vector
    to ``A``, and map it back onto the cone at ``A``.

    Agrees with ``transport_spd(make_transporter(B, A), P)``; kept as the
    reference route.
    """
    T = make_transporter(B, A)
    return exp_map(A, transport_tangent(T, log_map(B, P)))


def are_equivalent_pairs(A1, B1, A2, B2, tol=EQUIVALENCE_TOL):
    r"""
    Find an invertible E with A2 = E A1 E^T and B2 = E B1 E^T.

    Whitening each pair by its ``B`` leaves
    :math:`C_k = B_k^{-1/2} A_k B_k^{-1/2}`; a witness exists exactly
    when ``C1`` and ``C2`` share their spectrum, and then

    .. math::
        E = B_2^{1/2} V_2 V_1^T B_1^{-1/2}

    is one, with ``V_k`` the eigenvectors of ``C_k``.

    Parameters
    ----------
    A1, B1, A2, B2 : ndarray, shape (n, n)
        SPD matrices.
    tol : float, default=1e-8
        Relative tolerance on the spectra and on both congruences.

    Returns
    -------
    E : ndarray, shape (n, n) or None
        A witness, or None when the pairs are not equivalent. The witness
        is one of many; ``V_2 V_1^T`` may be replaced by any orthogonal
        matrix mapping ``C1`` to ``C2``.
    """
    A1, B1, A2, B2 = [check_spd(M) for M in (A1, B1, A2, B2)]
    check_same_shape(A1, B1, A2, B2)
    n = A1.shape[0]
    if np.array_equal(A1, A2) and np.array_equal(B1, B2):
        return np.eye(n)

    # eigenvectors of C_k in the eigenbasis of B_k
    frame1, frame2 = _eigenframe(B1), _eigenframe(B2)
    w1, V1 = _eigh(_whiten(frame1, A1))
    w2, V2 = _eigh(_whiten(frame2, A2))
    if np.max(np.abs(w1 - w2)) > tol * max(np.max(w1), np.max(w2)):
        return None

    E = (frame2[0] * frame2[1]) @ V2 @ V1.T @ (frame1[0] / frame1[1]).T
    if relative_error(E @ A1 @ E.T, A2) > tol or \
            relative_error(E @ B1 @ E.T, B2) > tol:
        return None
    return E


def inverse_witness(E):
    """
    Witness that (A2, B2) is equivalent to (A1, B1), given one for the
    opposite direction.
    """
    return np.linalg.inv(check_invertible(E, name='witness'))


def compose_witnesses(E1, E2):
    """
    Witness from the first pair to the third, given E1 (first to second)
    and E2 (second to third).
    """
    E1 = check_invertible(E1, name='witness')
    E2 = check_invertible(E2, E1.shape[0], name='witness')
    return E2 @ E1


def check_commutation(A1, B1, A2, B2, E, samples=100, seed=0):
    """
    Maximum relative error between two routes for random SPD matrices P:
    transport from B1 to A1 then apply the congruence by ``E``, against
    the congruence by ``E`` then transport from B2 to A2.

    For pairs related by ``E`` both routes agree up to round-off.

    Raises
    ------
    InvalidInput
        If ``E`` is non-finite or singular.
    """
    A1, B1, A2, B2 = [check_spd(M) for M in (A1, B1, A2, B2)]
    check_same_shape(A1, B1, A2, B2)
    n = A1.shape[0]
    E = check_invertible(E, n, 'witness')
    if samples < 1:
        raise InvalidInput('samples must be positive')

    T1 = make_transporter(B1, A1)
    T2 = make_transporter(B2, A2)
    rng = np.random.default_rng(seed)
    max_error = 0.0
    for _ in range(samples):
        P = make_random_spd(n, rng, condition=10.0)
        left = E @ transport_spd(T1, P) @ E.T
        right = transport_spd(T2, symmetrize(E @ P @ E.T))
        max_error = max(max_error, relative_error(left, right))
    logger.debug('Commutation error over {} samples: {:.3e}'.format(
        samples, max_error))
    return max_error


def perturbed_pair(A2, B2, rng, magnitude=0.1):
    """
    Replace ``B2`` by a random non-congruent change of relative Frobenius
    magnitude at least ``magnitude``.
    """
    return check_spd(A2), perturb_spd(B2, rng, magnitude)


class GeodesicDiagnostic(NamedTuple):
    on_geodesic: bool
    commutator_norm: float
    t0: Optional[float] = None


def identity_on_geodesic_diagnostic(A, B, tol=1e-8):
    """
    Whether the identity lies strictly inside the geodesic from ``A`` to
    ``B``.

    That happens exactly when log B = -c log A for some c > 0, i.e.
    B = A^{1 - 1/t0}; then ``geodesic(A, B, t0)`` is the identity with
    t0 = 1 / (1 + c). Such matrices commute. The relative commutator
    norm ||AB - BA|| / (||A|| ||B||) is reported either way.

    Returns
    -------
    diagnostic : GeodesicDiagnostic
        ``t0`` is set only when ``on_geodesic`` holds.
    """
    A = check_spd(A)
    B = check_spd(B)
    check_same_shape(A, B)
    commutator = float(np.linalg.norm(A @ B - B @ A) /
                       (np.linalg.norm(A) * np.linalg.norm(B)))

    LA = spd_log(A)
    LB = spd_log(B)
    norm_a = np.linalg.norm(LA)
    norm_b = np.linalg.norm(LB)
    if norm_a <= tol and norm_b <= tol:
        return GeodesicDiagnostic(True, commutator, 0.5)
    if norm_a <= tol or norm_b <= tol:
        return GeodesicDiagnostic(False, commutator)

    c = -float(np.sum(LA * LB)) / norm_a ** 2
    residual = np.linalg.norm(LB + c * LA)
    if c > 0 and residual <= tol * max(norm_b, 1.0):
        return GeodesicDiagnostic(True, commutator, 1.0 / (1.0 + c))
    return GeodesicDiagnostic(False, commutator)

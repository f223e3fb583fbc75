"""
Synthetic covariance data: the two-domain toy problem with a hidden
phase, a multi-domain multi-class generator, and random SPD helpers.

All randomness comes from ``numpy.random.default_rng`` (PCG64) seeded
by the caller, so a seed fixes every output bit for bit.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from spdtransport.domains import LabeledCovarianceSet
from spdtransport.exceptions import InvalidInput, InvalidParameter
from spdtransport.mean import riemannian_mean
from spdtransport.spd import (
    _funm,
    _sqrt_pair,
    check_invertible,
    check_spd,
    relative_error,
    symmetrize,
)

logger = logging.getLogger(__name__)

# Phases closer than this to a zero of cos(phi) make a singular covariance
PHASE_GUARD = 1e-3

# Second-domain mixing relative to the first one
TOY_REFLECTION = 1.5 * np.diag([-1.0, 1.0])


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_orthogonal(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_symmetric(n, rng):
    """
    Symmetric matrix with Gaussian entries, scaled to unit Frobenius norm.
    """
    A = rng.standard_normal((n, n))
    S = symmetrize(A)
    return S / np.linalg.norm(S)


def make_random_spd(n, rng, condition=10.0):
    """
    Random SPD matrix with a random eigenbasis and condition number
    ``condition``.
    """
    rng = _rng(rng)
    if condition < 1:
        raise InvalidParameter('condition must be >= 1')
    w = np.exp(rng.uniform(0, math.log(condition), n))
    if n > 1:
        w[0], w[-1] = 1.0, condition
    Q = random_orthogonal(n, rng)
    return symmetrize((Q * w) @ Q.T)


def make_random_invertible(n, rng, condition=10.0):
    """
    Random invertible matrix with singular values in [1, condition].
    """
    rng = _rng(rng)
    s = np.exp(rng.uniform(0, math.log(condition), n))
    return (random_orthogonal(n, rng) * s) @ random_orthogonal(n, rng).T


def perturb_spd(P, rng, magnitude=0.1):
    """
    Move ``P`` along a random direction of the cone until its relative
    Frobenius change reaches at least ``magnitude``.

    The change is not a congruence shared with any other matrix, which
    makes it a negative control for equivalence checks.
    """
    rng = _rng(rng)
    P = check_spd(P)
    root, _ = _sqrt_pair(P)
    H = random_symmetric(P.shape[-1], rng)
    step = magnitude
    for _ in range(60):
        Q = symmetrize(root @ _funm(step * H, np.exp) @ root)
        if relative_error(Q, P) >= magnitude:
            return Q
        step *= 2
    raise InvalidParameter('Could not perturb the matrix by {}'.format(magnitude))


@dataclass(frozen=True)
class TimeSeries:
    """
    ``values`` holds one row per channel and one column per sample.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInput(
                'A time series is channels x samples, got shape {}'.format(
                    values.shape))
        if not np.all(np.isfinite(values)):
            raise InvalidInput('Time series has non-finite values')
        object.__setattr__(self, 'values', values)

    @property
    def channels(self):
        return self.values.shape[0]

    @property
    def samples(self):
        return self.values.shape[1]


def sample_covariance(x, center=True):
    """
    Sample covariance (1/T) sum_n x[n] x[n]^T of a multichannel series.

    Parameters
    ----------
    x : TimeSeries or ndarray, shape (D, T)
        The series, one row per channel.
    center : bool, default=True
        Subtract the per-channel mean first.

    Returns
    -------
    P : ndarray, shape (D, D)
        SPD covariance matrix.

    Raises
    ------
    NotPositiveDefinite
        When the series is rank deficient; see ``spd.regularize``.
    """
    if not isinstance(x, TimeSeries):
        x = TimeSeries(x)
    values = x.values
    if center:
        values = values - values.mean(axis=1, keepdims=True)
    return check_spd(values @ values.T / x.samples, 'sample covariance')


def toy_population_covariance(phi):
    """
    Exact covariance of the hidden toy sources for phase ``phi``.
    """
    return 0.5 * np.array([[1.0, -math.sin(phi)], [-math.sin(phi), 1.0]])


def toy_sources(phi, f0, n_samples):
    n = np.arange(n_samples)
    theta = 2 * np.pi * f0 * n / n_samples
    return TimeSeries(np.vstack([np.sin(theta), np.cos(theta + phi)]))


def draw_mixing(rng, min_det=0.1):
    """
    2x2 mixing matrix with entries uniform in [-1, 1], redrawn until
    |det| > min_det.
    """
    while True:
        M = rng.uniform(-1.0, 1.0, (2, 2))
        if abs(np.linalg.det(M)) > min_det:
            return M


def draw_phases(rng, n, low, high):
    phases = rng.uniform(low, high, n)
    near_singular = np.abs(np.cos(phases)) < math.sin(PHASE_GUARD)
    while np.any(near_singular):
        phases[near_singular] = rng.uniform(low, high, int(near_singular.sum()))
        near_singular = np.abs(np.cos(phases)) < math.sin(PHASE_GUARD)
    return phases


@dataclass(frozen=True, eq=False)
class ToyConfig:
    """
    Parameters of the two-domain toy problem. ``mixing_1`` is drawn from
    the seed when not given.
    """
    n_series: int = 100
    f0: float = 10.0
    n_samples: int = 500
    phase_range: tuple = (-math.pi / 2, 0.0)
    mixing_1: np.ndarray = None
    seed: int = 0
    center: bool = False

    def __post_init__(self):
        if int(self.n_series) != self.n_series or self.n_series < 1:
            raise InvalidParameter('n_series must be a positive integer')
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise InvalidParameter('The toy series needs at least 2 samples')
        if not 0 < self.f0 < self.n_samples / 2:
            raise InvalidParameter(
                'f0 must lie in (0, n_samples / 2), got {!r}'.format(self.f0))
        low, high = self.phase_range
        if not low < high:
            raise InvalidParameter('phase_range must be increasing')
        if self.mixing_1 is not None:
            object.__setattr__(
                self, 'mixing_1',
                check_invertible(self.mixing_1, 2, 'mixing matrix'))


def generate_toy(cfg=None):
    """
    Two domains observing the same hidden two-channel sources through
    different mixing matrices.

    Source ``i`` is (sin(2 pi f0 n / T), cos(2 pi f0 n / T + phi_i)) with
    phi_i uniform in ``cfg.phase_range``. Domain 1 mixes it with
    ``M1``, domain 2 with ``1.5 diag(-1, 1) M1``. Both domains carry the
    phases as real-valued labels, in the same order.

    Returns
    -------
    domains : list of LabeledCovarianceSet
        The two domains, ids ``'1'`` and ``'2'``.
    """
    cfg = cfg or ToyConfig()
    rng = np.random.default_rng(cfg.seed)
    M1 = cfg.mixing_1 if cfg.mixing_1 is not None else draw_mixing(rng)
    M2 = TOY_REFLECTION @ M1
    phases = draw_phases(rng, cfg.n_series, *cfg.phase_range)
    logger.debug('Toy mixing matrix {}'.format(M1.tolist()))

    domains = []
    for domain_id, M in (('1', M1), ('2', M2)):
        matrices = [
            sample_covariance(M @ toy_sources(phi, cfg.f0, cfg.n_samples).values,
                              center=cfg.center)
            for phi in phases]
        domains.append(LabeledCovarianceSet(
            domain_id, np.array(matrices), phases.copy(),
            metadata={'generator': 'toy', 'seed': cfg.seed}))
    return domains


def _pair_pattern(dim, signs):
    """
    Log-entries ``(+s, -s)`` on each consecutive pair of axes, zero on an
    unpaired last axis.
    """
    pattern = np.zeros(dim)
    pairs = dim // 2
    pattern[0:2 * pairs:2] = signs
    pattern[1:2 * pairs:2] = -np.asarray(signs)
    return pattern


def _turned_frame(U):
    # the frame U turned by 45 degrees inside every pair of axes
    dim = U.shape[0]
    turn = np.eye(dim)
    c = math.sqrt(0.5)
    for i in range(0, dim - 1, 2):
        turn[i:i + 2, i:i + 2] = [[c, -c], [c, c]]
    return U @ turn


def generate_multidomain(n_domains, n_classes, dim, per_class,
                         class_spread=0.1, noise_level=0.3,
                         domain_shift=3.0, anisotropy=3.0,
                         domain_congruences=None, seed=0,
                         return_details=False):
    """
    Multi-class SPD data observed in several domains that differ by a
    congruence P -> E_k P E_k^T.

    Class prototypes are Exp-map steps of length ``class_spread`` from a
    common centre. Items are Exp-map steps of length ``noise_level`` from
    their prototype; every domain draws its own items, ``per_class`` per
    class, ordered by class.

    The centre has log-eigenvalues ``+anisotropy`` and ``-anisotropy`` on
    the diagonals of consecutive pairs of axes of a random frame ``U``.
    Without explicit ``domain_congruences``, domain ``k`` uses
    ``E_k = C^{1/2} U D_k^{1/2} U^T C^{-1/2}`` where ``C`` is the
    Riemannian mean of its items and ``D_k`` has log-entries
    ``(+domain_shift, -domain_shift)`` on each pair of axes, with a sign
    drawn per pair and per domain. All domain centroids then lie in one
    flat of the cone, so transport through the mean of centroids lines
    the domains up, while whitening each domain by its own centroid
    leaves a rotation of up to
    ``atan(tanh(anisotropy / 2) * tanh(domain_shift / 2))`` in every pair
    whose sign changes from domain to domain.

    Returns
    -------
    domains : list of LabeledCovarianceSet
        Ids ``'1'`` to ``str(n_domains)``, labels ``'class-<c>'``.
    details : dict
        Only with ``return_details``: ``congruences``, the matrices
        before congruence (``bases``) and the class ``prototypes``.
    """
    for name, value in (('n_domains', n_domains), ('n_classes', n_classes),
                        ('per_class', per_class)):
        if int(value) != value or value < 1:
            raise InvalidParameter('{} must be >= 1, got {!r}'.format(name, value))
    if int(dim) != dim or dim < 2:
        raise InvalidParameter('dim must be >= 2, got {!r}'.format(dim))
    if domain_congruences is not None:
        if len(domain_congruences) != n_domains:
            raise InvalidInput('Expected {} congruences, got {}'.format(
                n_domains, len(domain_congruences)))
        domain_congruences = [
            check_invertible(E, dim, 'congruence {}'.format(k + 1))
            for k, E in enumerate(domain_congruences)]

    rng = np.random.default_rng(seed)
    U = random_orthogonal(dim, rng)
    V = _turned_frame(U)
    centre = symmetrize(
        (V * np.exp(anisotropy * _pair_pattern(dim, 1.0))) @ V.T)
    centre_root, _ = _sqrt_pair(centre)
    prototypes = [
        symmetrize(centre_root @ _funm(class_spread * random_symmetric(dim, rng),
                                       np.exp) @ centre_root)
        for _ in range(n_classes)]
    prototype_roots = [_sqrt_pair(P)[0] for P in prototypes]
    labels = np.repeat(['class-{}'.format(c) for c in range(n_classes)],
                       per_class)

    domains, bases, congruences = [], [], []
    for k in range(n_domains):
        base = np.array([
            symmetrize(root @ _funm(noise_level * random_symmetric(dim, rng),
                                    np.exp) @ root)
            for root in prototype_roots for _ in range(per_class)])
        if domain_congruences is not None:
            E = domain_congruences[k]
        else:
            C = riemannian_mean(base).mean
            C_root, C_inv_root = _sqrt_pair(C)
            signs = 2.0 * rng.integers(0, 2, dim // 2) - 1.0
            shift = np.exp(0.5 * domain_shift * _pair_pattern(dim, signs))
            E = C_root @ ((U * shift) @ U.T) @ C_inv_root
        matrices = symmetrize(E @ base @ E.T)
        domains.append(LabeledCovarianceSet(
            str(k + 1), matrices, labels.copy(),
            metadata={'generator': 'multidomain', 'seed': seed}))
        bases.append(base)
        congruences.append(E)

    if return_details:
        return domains, {'congruences': congruences, 'bases': bases,
                         'prototypes': prototypes}
    return domains

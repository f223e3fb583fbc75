import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from spdtransport.datagen import (
    make_random_invertible,
    make_random_spd,
    random_symmetric,
)
from spdtransport.exceptions import (
    BasePointMismatch,
    DimensionMismatch,
    InvalidInput,
    InvalidParameter,
    NotPositiveDefinite,
)
from spdtransport.spd import (
    TangentVector,
    check_invertible,
    check_spd,
    distance,
    exp_map,
    geodesic,
    geodesic_velocity,
    inner_product,
    is_spd,
    log_map,
    norm,
    regularize,
    relative_error,
    spd_exp,
    spd_inv_sqrt,
    spd_log,
    spd_power,
    spd_sqrt,
    sym_eig,
    whitened_tangent,
)

DIMS = (2, 3, 8, 16)

CONDITIONS = (10.0, 1e3, 1e6)


def tolerance(condition):
    """
    Relative tolerance for results at a given condition number: 1e-10 up
    to 1e3, growing with the squared condition number beyond.
    """
    return max(1e-10, 1e-16 * condition ** 2)


def random_pairs(count=200, seed=0):
    """
    ``count`` pairs of SPD matrices per size, cycling through the
    condition numbers, with the tolerance for each pair.
    """
    rng = np.random.default_rng(seed)
    for n in DIMS:
        for i in range(count):
            condition = CONDITIONS[i % len(CONDITIONS)]
            yield (make_random_spd(n, rng, condition),
                   make_random_spd(n, rng, condition), tolerance(condition))


class ValidationTest(SimpleTestCase):

    def test_accepts_spd(self):
        P = np.array([[2.0, 0.5], [0.5, 1.0]])
        assert_array_equal(check_spd(P), P)
        self.assertTrue(is_spd(P))

    def test_symmetrizes(self):
        P = np.array([[2.0, 0.5 + 1e-14], [0.5, 1.0]])
        checked = check_spd(P)
        self.assertEqual(checked[0, 1], checked[1, 0])

    def test_rejects_indefinite(self):
        P = np.array([[1.0, 2.0], [2.0, 1.0]])
        with self.assertRaises(NotPositiveDefinite) as context:
            check_spd(P)
        self.assertAlmostEqual(context.exception.min_eigenvalue, -1.0)
        self.assertFalse(is_spd(P))

    def test_threshold_is_relative(self):
        """
        The smallest eigenvalue is compared with the largest one, never
        with less than 1.
        """
        self.assertTrue(is_spd(np.diag([1e-9, 1.0])))
        self.assertFalse(is_spd(np.diag([1e-11, 1e-3])))
        self.assertTrue(is_spd(np.diag([1e-2, 1e7])))
        self.assertFalse(is_spd(np.diag([1e-4, 1e7])))

    def test_stack_names_the_index(self):
        stack = np.array([np.eye(2), np.diag([1.0, -1.0]), np.eye(2)])
        with self.assertRaisesRegex(NotPositiveDefinite, 'index 1'):
            check_spd(stack)

    def test_rejects_malformed(self):
        with self.assertRaises(InvalidInput):
            check_spd(np.ones((2, 3)))
        with self.assertRaises(InvalidInput):
            check_spd(np.array([[1.0, np.nan], [np.nan, 1.0]]))
        with self.assertRaises(InvalidInput):
            check_spd(np.ones(3))

    def test_regularize(self):
        singular = np.array([[1.0, 1.0], [1.0, 1.0]])
        self.assertFalse(is_spd(singular))
        self.assertTrue(is_spd(regularize(singular, 1e-6)))
        with self.assertRaises(InvalidParameter):
            regularize(singular, 0.0)

    def test_check_invertible(self):
        check_invertible(np.eye(3), 3)
        with self.assertRaises(InvalidInput):
            check_invertible(np.diag([1.0, 0.0]))
        with self.assertRaises(InvalidInput):
            check_invertible(np.eye(3), 2)


class MatrixFunctionTest(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(1)

    def test_sym_eig(self):
        for n in DIMS:
            A = random_symmetric(n, self.rng)
            eig = sym_eig(A)
            self.assertTrue(np.all(np.diff(eig.eigenvalues) <= 0))
            V = eig.eigenvectors
            assert_allclose(V.T @ V, np.eye(n), atol=1e-12)
            self.assertLess(relative_error(eig.reconstruct(), A), 1e-12)

    def test_powers(self):
        for n in DIMS:
            P = make_random_spd(n, self.rng, 100.0)
            assert_array_equal(spd_power(P, 0), np.eye(n))
            assert_array_equal(spd_power(P, 1), P)
            self.assertLess(relative_error(spd_sqrt(P) @ spd_sqrt(P), P), 1e-12)
            assert_allclose(spd_inv_sqrt(P) @ P @ spd_inv_sqrt(P), np.eye(n),
                            atol=1e-10)
            product = spd_power(P, 0.3) @ spd_power(P, 1.2)
            self.assertLess(relative_error(product, spd_power(P, 1.5)), 1e-10)

    def test_power_needs_finite_exponent(self):
        with self.assertRaises(InvalidParameter):
            spd_power(np.eye(2), np.inf)

    def test_log_exp(self):
        for n in DIMS:
            P = make_random_spd(n, self.rng, 1e3)
            L = spd_log(P)
            assert_array_equal(L, L.T)
            self.assertLess(relative_error(spd_exp(L), P), 1e-12)
        with self.assertRaises(NotPositiveDefinite):
            spd_log(-np.eye(2))


class GeodesicTest(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(2)
        self.A = make_random_spd(4, rng, 50.0)
        self.B = make_random_spd(4, rng, 50.0)

    def test_endpoints(self):
        assert_array_equal(geodesic(self.A, self.B, 0), check_spd(self.A))
        assert_array_equal(geodesic(self.A, self.B, 1), check_spd(self.B))

    def test_constant_speed(self):
        d = distance(self.A, self.B)
        for t in (0.25, 0.5, 0.8):
            P = geodesic(self.A, self.B, t)
            self.assertAlmostEqual(distance(self.A, P), t * d, places=10)
            self.assertAlmostEqual(distance(P, self.B), (1 - t) * d, places=10)

    def test_t_outside_unit_interval(self):
        for t in (-0.1, 1.5, np.nan):
            with self.assertRaises(InvalidParameter):
                geodesic(self.A, self.B, t)

    def test_velocity_endpoints(self):
        with self.assertRaises(InvalidParameter):
            geodesic_velocity(self.A, self.B, 'middle')
        end = geodesic_velocity(self.A, self.B, 'end')
        assert_array_equal(end.base_point, check_spd(self.B))


class DistanceTest(SimpleTestCase):

    def test_basic_properties(self):
        rng = np.random.default_rng(3)
        A = make_random_spd(5, rng)
        B = make_random_spd(5, rng)
        self.assertAlmostEqual(distance(A, A), 0.0, places=12)
        self.assertAlmostEqual(distance(A, B), distance(B, A), places=10)
        self.assertAlmostEqual(
            distance(np.eye(2), np.diag([np.e, 1 / np.e])), np.sqrt(2))

    def test_size_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            distance(np.eye(2), np.eye(3))

    def test_congruence_invariance(self):
        rng = np.random.default_rng(4)
        for P1, P2, tol in random_pairs(seed=4):
            E = make_random_invertible(P1.shape[0], rng, 10.0)
            before = distance(P1, P2)
            after = distance(E @ P1 @ E.T, E @ P2 @ E.T)
            self.assertLess(abs(after - before) / before, tol)


class TangentSpaceTest(SimpleTestCase):

    def test_round_trip(self):
        for base, P, tol in random_pairs(seed=5):
            back = exp_map(base, log_map(base, P))
            self.assertLess(relative_error(back, P), tol)

    def test_metric_matches_distance(self):
        for base, P, tol in random_pairs(seed=6):
            S = log_map(base, P)
            d = distance(base, P)
            self.assertLess(abs(inner_product(S, S) - d ** 2) / d ** 2, tol)
            self.assertLess(abs(norm(S) - d) / d, tol)

    def test_inner_product_at_identity_is_frobenius(self):
        rng = np.random.default_rng(7)
        S1 = random_symmetric(3, rng)
        S2 = random_symmetric(3, rng)
        value = inner_product(TangentVector(np.eye(3), S1),
                              TangentVector(np.eye(3), S2))
        self.assertAlmostEqual(value, np.sum(S1 * S2), places=12)

    def test_base_points_must_match(self):
        rng = np.random.default_rng(8)
        A = make_random_spd(3, rng)
        B = make_random_spd(3, rng)
        S = log_map(A, B)
        with self.assertRaises(BasePointMismatch):
            inner_product(S, TangentVector(B, S.value))
        with self.assertRaises(BasePointMismatch):
            exp_map(B, S)

    def test_tangent_vector_is_read_only(self):
        S = TangentVector(np.eye(2), np.zeros((2, 2)))
        with self.assertRaises(ValueError):
            S.value[0, 0] = 1.0
        with self.assertRaises(DimensionMismatch):
            TangentVector(np.eye(2), np.zeros((3, 3)))

    def test_whitened_tangent(self):
        rng = np.random.default_rng(9)
        base = make_random_spd(4, rng)
        stack = np.array([make_random_spd(4, rng) for _ in range(6)])
        assert_allclose(whitened_tangent(base, base), np.zeros((4, 4)),
                        atol=1e-12)
        tangents = whitened_tangent(base, stack)
        self.assertEqual(tangents.shape, (6, 4, 4))
        # Frobenius norm of the whitened projection is the distance to base
        for P, S in zip(stack, tangents):
            self.assertAlmostEqual(np.linalg.norm(S), distance(base, P),
                                   places=10)

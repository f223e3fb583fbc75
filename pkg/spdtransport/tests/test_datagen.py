import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from spdtransport.datagen import (
    PHASE_GUARD,
    TOY_REFLECTION,
    TimeSeries,
    ToyConfig,
    draw_mixing,
    draw_phases,
    generate_multidomain,
    generate_toy,
    make_random_spd,
    perturb_spd,
    sample_covariance,
    toy_population_covariance,
    toy_sources,
)
from spdtransport.exceptions import (
    InvalidInput,
    InvalidParameter,
    NotPositiveDefinite,
)
from spdtransport.mean import riemannian_mean
from spdtransport.spd import is_spd, relative_error, spd_inv_sqrt, spd_sqrt
from spdtransport.transport import make_transporter

# Makes both toy domains diagonal, the second 2.25 times the first
STRUCTURED_MIXING = np.array([[0.5, -0.5], [0.25, 0.25]])


class RandomMatrixTest(SimpleTestCase):

    def test_condition_number(self):
        rng = np.random.default_rng(40)
        for condition in (1.0, 10.0, 1e6):
            P = make_random_spd(6, rng, condition)
            w = np.linalg.eigvalsh(P)
            self.assertAlmostEqual(w[-1] / w[0] / condition, 1.0, places=6)
        with self.assertRaises(InvalidParameter):
            make_random_spd(3, rng, 0.5)

    def test_seeded(self):
        assert_array_equal(make_random_spd(4, 7), make_random_spd(4, 7))

    def test_perturb(self):
        rng = np.random.default_rng(41)
        P = make_random_spd(5, rng)
        Q = perturb_spd(P, rng, 0.1)
        self.assertTrue(is_spd(Q))
        self.assertGreaterEqual(relative_error(Q, P), 0.1)


class SampleCovarianceTest(SimpleTestCase):

    def test_toy_sources_have_exact_covariance(self):
        for phi in (-1.2, -0.5, -0.01):
            P = sample_covariance(toy_sources(phi, 10, 500), center=False)
            assert_allclose(P, toy_population_covariance(phi), atol=1e-12)

    def test_centering(self):
        x = np.array([[1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 0.0, 2.0]]) + 5.0
        centred = sample_covariance(x)
        assert_allclose(centred, np.cov(x, bias=True), atol=1e-12)
        self.assertGreater(sample_covariance(x, center=False)[0, 0],
                           centred[0, 0])

    def test_rank_deficient(self):
        x = np.vstack([np.arange(10.0), 2 * np.arange(10.0)])
        with self.assertRaises(NotPositiveDefinite):
            sample_covariance(x)

    def test_toy_sources_over_random_phases_and_frequencies(self):
        n_samples = 500
        bound = 5 / math.sqrt(n_samples)
        within = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            phi = rng.uniform(-math.pi / 2, 0.0)
            f0 = rng.uniform(1.0, 50.0)
            P = sample_covariance(toy_sources(phi, f0, n_samples),
                                  center=False)
            error = np.linalg.norm(P - toy_population_covariance(phi))
            within += error <= bound
        self.assertGreaterEqual(within, 95)

    def test_time_series_shape(self):
        with self.assertRaises(InvalidInput):
            TimeSeries(np.arange(5.0))
        series = TimeSeries(np.zeros((3, 7)))
        self.assertEqual((series.channels, series.samples), (3, 7))


class ToyProblemTest(SimpleTestCase):

    def test_domains(self):
        domains = generate_toy(ToyConfig(n_series=30, seed=3))
        self.assertEqual([d.domain_id for d in domains], ['1', '2'])
        for domain in domains:
            self.assertEqual(domain.matrices.shape, (30, 2, 2))
            self.assertEqual(domain.label_kind, 'real')
            self.assertTrue(np.all(domain.labels >= -math.pi / 2))
            self.assertTrue(np.all(domain.labels <= 0))
        assert_array_equal(domains[0].labels, domains[1].labels)

    def test_second_domain_is_a_congruence_of_the_first(self):
        first, second = generate_toy(ToyConfig(n_series=20, seed=4))
        for P1, P2 in zip(first.matrices, second.matrices):
            expected = TOY_REFLECTION @ P1 @ TOY_REFLECTION.T
            self.assertLess(relative_error(P2, expected), 1e-12)

    def test_structured_mixing(self):
        first, second = generate_toy(
            ToyConfig(n_series=20, mixing_1=STRUCTURED_MIXING))
        for P1, P2 in zip(first.matrices, second.matrices):
            self.assertLess(abs(P1[0, 1]), 1e-12)
            self.assertLess(relative_error(P2, 2.25 * P1), 1e-12)

    def test_seeded(self):
        a = generate_toy(ToyConfig(n_series=10, seed=5))
        b = generate_toy(ToyConfig(n_series=10, seed=5))
        c = generate_toy(ToyConfig(n_series=10, seed=6))
        assert_array_equal(a[1].matrices, b[1].matrices)
        self.assertFalse(np.array_equal(a[1].matrices, c[1].matrices))

    def test_config_validation(self):
        with self.assertRaises(InvalidParameter):
            ToyConfig(f0=300)
        with self.assertRaises(InvalidParameter):
            ToyConfig(n_series=0)
        with self.assertRaises(InvalidParameter):
            ToyConfig(phase_range=(0.0, -1.0))
        with self.assertRaises(InvalidInput):
            ToyConfig(mixing_1=np.ones((2, 2)))

    def test_draws(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            self.assertGreater(abs(np.linalg.det(draw_mixing(rng))), 0.1)
        phases = draw_phases(rng, 500, -math.pi / 2, 0.0)
        self.assertTrue(np.all(np.abs(np.cos(phases)) >= math.sin(PHASE_GUARD)))


class MultidomainTest(SimpleTestCase):

    def test_layout(self):
        domains = generate_multidomain(3, 2, 4, 5, seed=1)
        self.assertEqual([d.domain_id for d in domains], ['1', '2', '3'])
        for domain in domains:
            self.assertEqual(domain.matrices.shape, (10, 4, 4))
            self.assertEqual(list(domain.labels),
                             ['class-0'] * 5 + ['class-1'] * 5)
            self.assertEqual(domain.metadata['generator'], 'multidomain')

    def test_details(self):
        domains, details = generate_multidomain(
            2, 2, 3, 4, seed=2, return_details=True)
        self.assertEqual(len(details['prototypes']), 2)
        for domain, E, base in zip(domains, details['congruences'],
                                   details['bases']):
            for P, Q in zip(domain.matrices, base):
                self.assertLess(relative_error(P, E @ Q @ E.T), 1e-12)

    def test_explicit_congruences(self):
        scalings = [np.eye(3), 2 * np.eye(3)]
        domains, details = generate_multidomain(
            2, 2, 3, 4, domain_congruences=scalings, seed=3,
            return_details=True)
        assert_allclose(domains[1].matrices, 4 * details['bases'][1],
                        rtol=1e-12)
        with self.assertRaises(InvalidInput):
            generate_multidomain(3, 2, 3, 4, domain_congruences=scalings)
        with self.assertRaises(InvalidInput):
            generate_multidomain(2, 2, 3, 4,
                                 domain_congruences=[np.eye(3), np.zeros((3, 3))])

    def test_parameters(self):
        with self.assertRaises(InvalidParameter):
            generate_multidomain(2, 2, 1, 4)
        with self.assertRaises(InvalidParameter):
            generate_multidomain(0, 2, 3, 4)

    def test_seeded(self):
        a = generate_multidomain(2, 2, 3, 4, seed=9)
        b = generate_multidomain(2, 2, 3, 4, seed=9)
        for x, y in zip(a, b):
            assert_array_equal(x.matrices, y.matrices)

    def test_default_congruences(self):
        domains, details = generate_multidomain(
            3, 2, 10, 50, seed=10, return_details=True)
        centroids = [riemannian_mean(d.matrices).mean for d in domains]
        hub = riemannian_mean(centroids).mean
        own, through_hub = [], []
        for centroid, E, base in zip(centroids, details['congruences'],
                                     details['bases']):
            C = riemannian_mean(base).mean
            self.assertLess(relative_error(E @ C @ E.T, centroid), 1e-6)
            # whitening by the own centroid leaves an orthogonal factor
            R = spd_inv_sqrt(centroid) @ E @ spd_sqrt(C)
            assert_allclose(R @ R.T, np.eye(10), atol=1e-6)
            own.append(R)
            T = make_transporter(centroid, hub).e_matrix
            through_hub.append(spd_inv_sqrt(hub) @ T @ E @ spd_sqrt(C))

        def spread(factors):
            return sum(np.linalg.norm(factors[i] - factors[j])
                       for i, j in ((0, 1), (0, 2), (1, 2)))

        # the factor changes from domain to domain unless the domains go
        # through the hub first
        self.assertGreater(spread(own), 1.0)
        self.assertGreater(spread(own), 2 * spread(through_hub))

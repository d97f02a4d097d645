import math
import unittest

import numpy as np
from parameterized import parameterized

from config.exceptions import UnsupportedFamilyException, DomainException, DegenerateMetricException
from geometry import metric_field, perturbations
from geometry.metric_field import PerturbationSpec
from tests import test_utils


class TestPerturbationSpec(unittest.TestCase):
    def test_defaults(self):
        spec = PerturbationSpec()
        self.assertEqual(perturbations.FAMILY_NONE, spec.family)
        self.assertTrue(spec.is_trivial)
        self.assertEqual(((2, 0, 1.0),), spec.b_harmonics)

    def test_zero_amplitude_is_trivial(self):
        self.assertTrue(PerturbationSpec(perturbations.FAMILY_SPHERE_BLOCK, 0.0).is_trivial)

    def test_structure_key_ignores_amplitude(self):
        first = PerturbationSpec(perturbations.FAMILY_GAUGE, 1e-3)
        second = first.with_amplitude(0.5)
        self.assertEqual(first.structure_key(), second.structure_key())
        self.assertEqual(0.5, second.amplitude)
        self.assertEqual(1e-3, first.amplitude)

    @parameterized.expand([
        (perturbations.PROFILE_POWER_EXP, 2.0, (0.0, 0.0), True),
        (perturbations.PROFILE_POWER_EXP, 1.0, (0.0, 1.0), False),
        (perturbations.PROFILE_SATURATED, 2.0, (0.0, 0.0), True),
    ])
    def test_profile_boundary_values(self, kind, power, expected, preserves):
        spec = PerturbationSpec(perturbations.FAMILY_SPHERE_BLOCK, 1e-3, profile_kind=kind, profile_power=power)
        self.assertEqual(expected, spec.profile_boundary_values())
        self.assertEqual(preserves, spec.preserves_boundary())

    def test_unknown_family(self):
        self.assertRaises(UnsupportedFamilyException, PerturbationSpec, 'conformal', 1.0)

    def test_unknown_profile(self):
        self.assertRaises(UnsupportedFamilyException, PerturbationSpec, perturbations.FAMILY_GAUGE, 1.0,
                          profile_kind='gaussian')

    @parameterized.expand([
        ([(1, 2, 1.0)],),
        ([(-1, 0, 1.0)],),
        ([(2, 0)],),
        ([(2, 0, math.inf)],),
    ])
    def test_invalid_harmonics(self, harmonics):
        self.assertRaises(DomainException, PerturbationSpec, perturbations.FAMILY_SPHERE_BLOCK, 1.0,
                          b_harmonics=harmonics)

    def test_describe(self):
        description = PerturbationSpec(perturbations.FAMILY_GAUGE, 1e-3).describe()
        self.assertEqual('gauge', description['family'])
        self.assertEqual([[2, 0, 1.0]], description['b_harmonics'])
        self.assertEqual({'kind': 'power_exp', 'power': 2.0, 'rate': 4.0}, description['profile'])


class TestBackgroundMetric(unittest.TestCase):
    def setUp(self) -> None:
        self.metric = test_utils.background_metric()
        self.model = self.metric.model

    def test_components(self):
        s = np.array([0.0, 0.5, 3.0])
        theta = np.array([0.3, 1.1, 2.0])
        phi = np.array([0.0, 1.0, 4.0])
        g = self.metric.metric_jets(s, theta, phi, order=0)[0]
        r = self.model.r_of_s(s)
        np.testing.assert_allclose(g[:, 0, 0], 1.0)
        np.testing.assert_allclose(g[:, 1, 1], r ** 2, rtol=1e-15)
        np.testing.assert_allclose(g[:, 2, 2], r ** 2 * np.sin(theta) ** 2, rtol=1e-15)
        np.testing.assert_allclose(g[:, 0, 1], 0.0)

    def test_radial_derivative(self):
        s = np.array([0.5, 2.0])
        theta = np.array([1.0, 1.0])
        phi = np.zeros(2)
        dg = self.metric.metric_jets(s, theta, phi, order=1)[1]
        r, p = self.model.radial_state(s)
        np.testing.assert_allclose(dg[:, 0, 1, 1], 2.0 * r * p, rtol=1e-14)

    def test_scalar_curvature(self):
        s, theta, phi = metric_field.probe_points(7, 50)
        np.testing.assert_allclose(self.metric.scalar_curvature(s, theta, phi), -6.0, atol=1e-8)

    def test_scalar_curvature_floor(self):
        floor = metric_field.scalar_curvature_floor(self.metric, metric_field.probe_points(1, 20))
        self.assertAlmostEqual(0.0, floor, places=8)

    def test_metric_at(self):
        jets = self.metric.metric_at(np.array([1.0]), np.array([1.0]), np.array([1.0]))
        self.assertEqual(3, len(jets))

    def test_perturbation_jets_vanish(self):
        jets = self.metric.perturbation_jets(np.array([1.0, 2.0]), np.array([1.0, 2.0]), np.zeros(2), order=2)
        self.assertEqual(3, len(jets))
        for jet in jets:
            self.assertFalse(np.any(jet))

    def test_decay_distance_of_background(self):
        self.assertEqual(0.0, metric_field.decay_distance(self.metric))

    def test_jet_order_out_of_range(self):
        self.assertRaises(DomainException, self.metric.metric_jets, 1.0, 1.0, 1.0, 4)

    def test_boundary_is_minimal(self):
        self.assertLess(metric_field.boundary_minimality_check(self.metric, test_utils.coarse_grid()), 1e-10)

    def test_bianchi(self):
        residual = metric_field.bianchi_residual(self.metric, metric_field.probe_points(2, 20, (0.0, 4.0)))
        self.assertLess(residual, 1e-6)


class TestSphereBlockFamily(unittest.TestCase):
    def test_reduces_to_background_at_zero_amplitude(self):
        metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, 0.0)
        s, theta, phi = metric_field.probe_points(3, 10)
        np.testing.assert_allclose(metric.metric_jets(s, theta, phi, 0)[0],
                                   test_utils.background_metric().metric_jets(s, theta, phi, 0)[0], rtol=1e-13, atol=1e-15)

    def test_vanishes_on_boundary(self):
        metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, 1e-2)
        theta = np.linspace(0.1, 3.0, 5)
        jets = metric.perturbation_jets(np.zeros(5), theta, np.zeros(5), order=1)
        self.assertLess(np.max(np.abs(jets[0])), 1e-15)
        self.assertLess(np.max(np.abs(jets[1])), 1e-15)

    def test_scalar_curvature_linear_in_amplitude(self):
        points = metric_field.probe_points(11, 30, (0.1, 3.0))
        deviations = []
        for amplitude in [1e-3, 1e-4]:
            metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, amplitude)
            deviations.append(np.max(np.abs(metric.scalar_curvature(*points) + 6.0)))
        self.assertAlmostEqual(10.0, deviations[0] / deviations[1], delta=0.1)

    def test_with_amplitude_shares_compiled_jets(self):
        metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, 1e-3)
        scaled = metric.with_amplitude(2e-3)
        s, theta, phi = np.array([0.7]), np.array([0.9]), np.array([0.2])
        first = metric.perturbation_jets(s, theta, phi, order=0)[0]
        second = scaled.perturbation_jets(s, theta, phi, order=0)[0]
        np.testing.assert_allclose(second, 2.0 * first, rtol=1e-14)

    def test_decay_distance_finite(self):
        metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, 1e-3)
        distance = metric_field.decay_distance(metric, s_max=2.0, s_nodes=5, angular_nodes=4)
        self.assertTrue(math.isfinite(distance))
        self.assertGreater(distance, 0.0)

    def test_decay_distance_linear_in_amplitude(self):
        distances = []
        for amplitude in [1e-3, 2e-3]:
            metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, amplitude)
            distances.append(metric_field.decay_distance(metric, s_max=2.0, s_nodes=5, angular_nodes=4))
        self.assertAlmostEqual(2.0, distances[1] / distances[0], places=9)

    def test_broken_boundary(self):
        metric = test_utils.perturbed_metric(perturbations.FAMILY_SPHERE_BLOCK, 1e-2, profile_power=1.0)
        self.assertGreater(metric_field.boundary_minimality_check(metric, test_utils.coarse_grid()), 1e-6)

    def test_degenerate_amplitude(self):
        self.assertRaises(DegenerateMetricException, test_utils.perturbed_metric,
                          perturbations.FAMILY_SPHERE_BLOCK, 1e3)


class TestGaugeFamily(unittest.TestCase):
    def setUp(self) -> None:
        self.metric = test_utils.perturbed_metric(perturbations.FAMILY_GAUGE, 1e-2)

    def test_scalar_curvature_is_hyperbolic(self):
        points = metric_field.probe_points(5, 30, (0.0, 6.0))
        np.testing.assert_allclose(self.metric.scalar_curvature(*points), -6.0, atol=1e-8)

    def test_boundary_is_minimal(self):
        self.assertLess(metric_field.boundary_minimality_check(self.metric, test_utils.coarse_grid()), 1e-10)

    def test_perturbation_is_small(self):
        points = metric_field.probe_points(5, 30, (0.0, 6.0))
        h = self.metric.perturbation_jets(*points, order=0)[0]
        g = test_utils.background_metric().metric_jets(*points, order=0)[0]
        scale = np.sqrt(np.einsum('...ii->...i', g))
        relative = np.abs(h) / (scale[..., :, None] * scale[..., None, :])
        self.assertLess(np.max(relative), 1e-2)


class TestCallableMetric(unittest.TestCase):
    def setUp(self) -> None:
        self.metric = test_utils.callable_background()

    def test_curvature(self):
        points = metric_field.probe_points(4, 10)
        np.testing.assert_allclose(self.metric.scalar_curvature(*points), -6.0, atol=1e-8)

    def test_no_third_derivatives(self):
        self.assertRaises(UnsupportedFamilyException, self.metric.metric_jets, 1.0, 1.0, 1.0, 3)

    def test_no_decay_distance(self):
        self.assertRaises(UnsupportedFamilyException, metric_field.decay_distance, self.metric)


class TestProbePoints(unittest.TestCase):
    def test_reproducible(self):
        first = metric_field.probe_points(42, 5)
        second = metric_field.probe_points(42, 5)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_range(self):
        s, theta, phi = metric_field.probe_points(0, 100, (1.0, 2.0))
        self.assertTrue(np.all((s >= 1.0) & (s <= 2.0)))
        self.assertTrue(np.all((theta >= 0) & (theta <= math.pi)))
        self.assertTrue(np.all((phi >= 0) & (phi <= 2 * math.pi)))

    def test_empty(self):
        self.assertRaises(DomainException, metric_field.probe_points, 0, 0)

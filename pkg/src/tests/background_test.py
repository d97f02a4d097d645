import math
import unittest
import warnings

import numpy as np
from parameterized import parameterized

from config.exceptions import DomainException
from scipy import integrate

from geometry.background import BackgroundModel, horizon_radius
from reporting import background_suite
from reporting.checks import CheckList
from tests import test_utils


class TestHorizonRadius(unittest.TestCase):
    @parameterized.expand([
        (0.5,),
        (1.0,),
        (2.5,),
        (1e-6,),
        (1e6,),
    ])
    def test_root_of_cubic(self, m):
        r0 = horizon_radius(m)
        self.assertGreater(r0, 0)
        self.assertAlmostEqual(0.0, (1.0 + r0 * r0 - 2.0 * m / r0) * r0 / max(1.0, r0 ** 3), places=12)

    def test_unit_mass(self):
        self.assertAlmostEqual(1.0, horizon_radius(1.0), places=14)

    @parameterized.expand([
        (0.0,),
        (-1.0,),
        (math.nan,),
        (math.inf,),
    ])
    def test_invalid_mass(self, m):
        self.assertRaises(DomainException, horizon_radius, m)


class TestBackgroundModel(unittest.TestCase):
    def setUp(self) -> None:
        self.model = test_utils.background(1.0)

    def test_constants(self):
        self.assertAlmostEqual(1.0, self.model.r0, places=14)
        self.assertAlmostEqual(4.0, self.model.k, places=12)

    def test_s_of_horizon(self):
        self.assertEqual(0.0, self.model.s_of_r(self.model.r0))

    def test_s_near_horizon(self):
        s = self.model.s_of_r(1.0 + 1e-4)
        self.assertLess(abs(s - 1e-2) / 1e-2, 1e-3)

    def test_s_below_horizon(self):
        self.assertRaises(DomainException, self.model.s_of_r, 0.5)

    def test_round_trip(self):
        radii = self.model.r0 + np.logspace(-3.0, 3.0, 50)
        recovered = self.model.r_of_s(self.model.s_of_r(radii))
        self.assertLess(np.max(np.abs(recovered - radii) / radii), 1e-9)

    def test_series_near_boundary(self):
        s = np.linspace(0.0, 0.05, 11)
        self.assertLess(np.max(np.abs(self.model.r_series(s) - self.model.r_of_s(s))), 1e-6)

    def test_negative_s_rejected(self):
        self.assertRaises(DomainException, self.model.r_of_s, -0.1)

    def test_radial_state_reflection(self):
        r_plus, p_plus = self.model.radial_state(0.1)
        r_minus, p_minus = self.model.radial_state(-0.1)
        self.assertEqual(float(r_plus), float(r_minus))
        self.assertEqual(float(p_plus), -float(p_minus))

    def test_radial_state_below_collar(self):
        self.assertRaises(DomainException, self.model.radial_state, -0.5)

    def test_radial_state_beyond_table(self):
        self.assertRaises(DomainException, self.model.radial_state, self.model.s_table + 1.0)

    def test_asymptotic_offset(self):
        self.assertAlmostEqual(-0.394, self.model.asymptotic_offset, delta=0.01)

    def test_hyperbolic_growth(self):
        s = 10.0
        ratio = self.model.r_of_s(s) / math.sinh(float(self.model.hyperbolic_distance(s)))
        self.assertAlmostEqual(1.0, ratio, places=8)

    @parameterized.expand([
        (6.0,),
        (8.0,),
    ])
    def test_v_profile_coefficient(self, s):
        coefficient = (self.model.v_profile(s) - 1.0) * math.sinh(float(self.model.hyperbolic_distance(s))) ** 3
        self.assertAlmostEqual(2.0 / 3.0, coefficient, delta=1e-2)

    def test_v_profile_positive(self):
        values = self.model.v_profile(np.linspace(0.05, 20.0, 50))
        self.assertTrue(np.all(values > 0))

    def test_v_profile_at_boundary(self):
        self.assertRaises(DomainException, self.model.v_profile, 0.0)

    def test_mean_curvature_of_boundary(self):
        self.assertEqual(0.0, self.model.mean_curvature_of_s(0.0))

    def test_mean_curvature_matches_radius_form(self):
        s = np.linspace(0.1, 8.0, 20)
        from_r = self.model.coordinate_mean_curvature(self.model.r_of_s(s))
        self.assertLess(np.max(np.abs(self.model.mean_curvature_of_s(s) - from_r)), 1e-8)

    def test_mean_curvature_tends_to_two(self):
        self.assertAlmostEqual(2.0, self.model.mean_curvature_of_s(20.0), places=8)

    def test_boundary_mean_curvature_slope(self):
        self.assertAlmostEqual(4.0, self.model.boundary_mean_curvature_slope(), places=12)

    def test_boundary_slope_against_finite_difference(self):
        step = 1e-4
        difference = (self.model.mean_curvature_of_s(step) - self.model.mean_curvature_of_s(0.0)) / step
        slope = self.model.boundary_mean_curvature_slope()
        self.assertLess(abs(difference - slope) / slope, 1e-4)

    def test_mean_curvature_peaks_at_three_m(self):
        radii = np.linspace(self.model.r0, 9.0, 2001)
        h = self.model.coordinate_mean_curvature(radii)
        self.assertAlmostEqual(3.0, radii[np.argmax(h)], delta=radii[1] - radii[0])
        self.assertTrue(np.all(np.diff(h)[radii[1:] < 2.99] > 0))
        self.assertTrue(np.all(np.diff(h)[radii[:-1] > 3.01] < 0))

    def test_expansion_coefficient(self):
        self.assertAlmostEqual(1.0 / 3.0, self.model.mean_curvature_expansion_residual(4.0), delta=0.05)

    def test_expansion_residual_bounded(self):
        scaled = self.model.mean_curvature_expansion_residual(np.linspace(2.0, 5.0, 13))
        self.assertTrue(np.all(np.isfinite(scaled)))
        self.assertLess(np.max(np.abs(scaled)), 2.0)

    def test_expansion_residual_at_boundary(self):
        self.assertRaises(DomainException, self.model.mean_curvature_expansion_residual, 0.0)

    def test_no_integration_warnings(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            model = BackgroundModel(1.0)
            model.s_of_r(np.logspace(0.0, 3.0, 20))
        self.assertFalse([w for w in caught if issubclass(w.category, integrate.IntegrationWarning)])

    @parameterized.expand([
        (1.0,),
        (1.5,),
        (3.0,),
        (10.0,),
        (100.0,),
    ])
    def test_sphere_hawking_mass(self, r):
        self.assertAlmostEqual(1.0, self.model.sphere_hawking_mass(r), places=8)

    def test_background_curvature(self):
        s = np.array([0.0, 1.0, 4.0])
        r = self.model.r_of_s(s)
        curvature = self.model.background_curvature(s)
        np.testing.assert_allclose(curvature.ric_normal, -2.0 - 2.0 / r ** 3, rtol=1e-14)
        np.testing.assert_allclose(curvature.ric_tangential, -2.0 + 1.0 / r ** 3, rtol=1e-14)
        np.testing.assert_array_equal(curvature.scalar, -6.0)

    @parameterized.expand([
        (2.0, 0, (2.0 - 3.0) / 4.0),
        (2.0, 1, -3.0 / 4.0),
        (3.0, 2, (-6.0 + 2.0 - 2.0) / 9.0),
    ])
    def test_jacobi_spectrum(self, r, l, expected):
        self.assertAlmostEqual(expected, self.model.jacobi_spectrum(r, l), places=14)

    def test_jacobi_spectrum_below_horizon(self):
        self.assertRaises(DomainException, self.model.jacobi_spectrum, 0.5, 1)


class TestMassGeneric(unittest.TestCase):
    @parameterized.expand([
        (0.5,),
        (2.5,),
    ])
    def test_round_trip_and_mass(self, m):
        model = BackgroundModel(m)
        radii = model.r0 + np.logspace(-2.0, 2.0, 10)
        recovered = model.r_of_s(model.s_of_r(radii))
        self.assertLess(np.max(np.abs(recovered - radii) / radii), 1e-9)
        for r in radii:
            self.assertAlmostEqual(m, model.sphere_hawking_mass(r), places=8)

    def test_invalid_series_cutoff(self):
        self.assertRaises(DomainException, BackgroundModel, 1.0, s_series=0.0)


class TestMeanCurvatureChecks(unittest.TestCase):
    def setUp(self) -> None:
        self.model = test_utils.background(1.0)
        self.checks = CheckList()

    def test_profile(self):
        result = background_suite.check_mean_curvature_profile(self.checks, self.model)
        self.assertTrue(self.checks.passed, self.checks.text())
        self.assertTrue(result['rising'])
        self.assertTrue(result['falling'])

    def test_expansion_and_slope(self):
        result = background_suite.check_mean_curvature_expansion(self.checks, self.model)
        self.assertTrue(self.checks.passed, self.checks.text())
        self.assertAlmostEqual(4.0, result['finite_difference'], places=3)

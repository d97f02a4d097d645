import math
import unittest

import numpy as np
from parameterized import parameterized

from config.exceptions import GeometryException
from geometry import graph_geometry
from geometry.graph_geometry import GraphSurface
from tests import test_utils


def _coordinate_sphere(s, grid=None):
    grid = grid or test_utils.coarse_grid()
    surface = GraphSurface(s, grid.zero_field(), test_utils.background_metric())
    return graph_geometry.compute_geometry(surface)


class TestCoordinateSpheres(unittest.TestCase):
    def setUp(self) -> None:
        self.model = test_utils.background()

    @parameterized.expand([
        (0.0,),
        (0.5,),
        (2.0,),
        (4.0,),
    ])
    def test_mean_curvature(self, s):
        geometry = _coordinate_sphere(s)
        expected = self.model.mean_curvature_of_s(s)
        np.testing.assert_allclose(geometry.mean_curvature.values, expected, atol=1e-9)

    @parameterized.expand([
        (0.5,),
        (3.0,),
    ])
    def test_area(self, s):
        r = float(self.model.r_of_s(s))
        self.assertAlmostEqual(1.0, _coordinate_sphere(s).area / (4.0 * math.pi * r * r), places=12)

    @parameterized.expand([
        (0.0,),
        (1.0,),
        (3.0,),
    ])
    def test_hawking_mass(self, s):
        self.assertAlmostEqual(1.0, graph_geometry.hawking_mass(_coordinate_sphere(s)), places=8)

    def test_umbilic(self):
        geometry = _coordinate_sphere(1.0)
        np.testing.assert_allclose(geometry.tracefree_sq.values, 0.0, atol=1e-12)

    def test_normal(self):
        geometry = _coordinate_sphere(1.5)
        self.assertLess(geometry.normal_length_error(), 1e-12)
        np.testing.assert_allclose(geometry.orientation(), 1.0, atol=1e-14)
        np.testing.assert_allclose(geometry.ds_tangential_sq.values, 0.0, atol=1e-14)

    def test_gauss_curvature(self):
        geometry = _coordinate_sphere(1.0)
        r = float(self.model.r_of_s(1.0))
        np.testing.assert_allclose(geometry.gauss_curvature.values, 1.0 / r ** 2, rtol=1e-9)

    def test_ricci_normal(self):
        geometry = _coordinate_sphere(2.0)
        expected = self.model.background_curvature(2.0).ric_normal
        np.testing.assert_allclose(geometry.ricci_normal.values, expected, rtol=1e-9)

    def test_boundary_is_minimal(self):
        boundary = graph_geometry.mean_curvature(0.0, test_utils.coarse_grid().zero_field(),
                                                 test_utils.background_metric())
        self.assertLess(boundary.sup_norm(), 1e-10)

    def test_lemma_residual_decay(self):
        # for coordinate spheres of the background the residual is 32 pi m^2 / r^4 to leading order
        r = float(self.model.r_of_s(3.0))
        residual = graph_geometry.lemma_residual(_coordinate_sphere(3.0), self.model)
        self.assertAlmostEqual(1.0, residual * r ** 4 / (32.0 * math.pi), delta=0.05)


class TestGraphs(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = test_utils.coarse_grid(12)
        coefficients = np.zeros(self.grid.size)
        coefficients[2] = 0.05
        coefficients[6] = 0.03
        coefficients[10] = -0.02
        self.u = self.grid.field_from_coefficients(coefficients)
        self.surface = GraphSurface(1.0, self.u, test_utils.background_metric())
        self.geometry = graph_geometry.compute_geometry(self.surface)

    def test_gauss_equation(self):
        residual = graph_geometry.gauss_equation_residual(self.geometry)
        self.assertLess(residual.sup_norm(), 1e-8)

    def test_gauss_bonnet(self):
        total = self.geometry.integrate(self.geometry.gauss_curvature)
        self.assertAlmostEqual(4.0 * math.pi, total, delta=1e-6)

    def test_normal_is_unit(self):
        self.assertLess(self.geometry.normal_length_error(), 1e-12)
        self.assertTrue(np.all(self.geometry.orientation() > 0))

    def test_tangential_ds_positive(self):
        self.assertGreater(self.geometry.integrate(self.geometry.ds_tangential_sq), 0.0)

    def test_batch_matches_single(self):
        single = graph_geometry.mean_curvature(1.0, self.u, test_utils.background_metric())
        batch = graph_geometry.mean_curvature_batch(1.0, self.u.coefficients[None, :], self.grid,
                                                    test_utils.background_metric())
        np.testing.assert_allclose(batch[0], single.values, atol=1e-14)

    def test_radii(self):
        self.assertLess(self.surface.inner_radius, 1.0)
        self.assertGreater(self.surface.outer_radius, 1.0)


class TestChart(unittest.TestCase):
    def test_below_collar(self):
        grid = test_utils.coarse_grid()
        self.assertRaises(GeometryException, GraphSurface, -0.3, grid.zero_field(), test_utils.background_metric())

    def test_batch_below_collar(self):
        grid = test_utils.coarse_grid()
        coefficients = np.zeros((1, grid.size))
        coefficients[0, 0] = -1.0
        self.assertRaises(GeometryException, graph_geometry.mean_curvature_batch, 0.0, coefficients, grid,
                          test_utils.background_metric())

    def test_beyond_table(self):
        grid = test_utils.coarse_grid()
        metric = test_utils.background_metric()
        self.assertRaises(GeometryException, GraphSurface, metric.model.s_table, grid.zero_field(), metric)

    def test_hawking_mass_value(self):
        self.assertAlmostEqual(1.0, graph_geometry.hawking_mass_value(16.0 * math.pi, 0.0), places=14)

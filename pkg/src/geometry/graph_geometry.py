"""Geometry of graphs S_s(u) = {(s + u(x), x)} over coordinate spheres.

Tangents are E_i = u_i d_s + d_i (i over theta, phi). The unit normal is obtained by raising the covector
n = ds - u_theta dtheta - u_phi dphi, which annihilates both tangents and points to increasing s.
"""
import logging
import math

import numpy as np

from config.exceptions import GeometryException
from geometry import tensor_calculus

LOGGER = logging.getLogger('cmc_foliation.graph_geometry')

SIXTEEN_PI = 16.0 * math.pi


class GraphSurface:
    def __init__(self, s_base, u, metric) -> None:
        self.s_base = float(s_base)
        self.u = u
        self.metric = metric

        values = self.s_values
        lowest = float(np.min(values))
        if lowest <= -metric.model.s_collar:
            raise GeometryException('Surface leaves the chart: inner radius %r below the collar' % lowest)
        if float(np.max(values)) >= metric.model.s_table:
            raise GeometryException('Surface leaves the tabulated range: outer radius %r' % float(np.max(values)))

    @property
    def grid(self):
        return self.u.grid

    @property
    def s_values(self):
        return self.s_base + self.u.values

    @property
    def inner_radius(self):
        return float(np.min(self.s_values))

    @property
    def outer_radius(self):
        return float(np.max(self.s_values))

    def __repr__(self) -> str:
        return 'GraphSurface(s=%r, |u|=%.3e)' % (self.s_base, self.u.sup_norm())


def _tangents(du):
    shape = du.shape[:-1]
    tangents = np.zeros(shape + (2, 3))
    tangents[..., 0, 0] = du[..., 0]
    tangents[..., 1, 0] = du[..., 1]
    tangents[..., 0, 1] = 1.0
    tangents[..., 1, 2] = 1.0
    return tangents


def _extrinsic(s_base, jets, grid, metric, metric_jets=None):
    """Induced metric, normal and second fundamental form for batches of graph functions.

    jets are coordinate jets [u, du, d2u] with leading batch axes over grid points."""
    u, du, d2u = jets[0], jets[1], jets[2]
    s = s_base + u
    theta = np.broadcast_to(grid.theta, s.shape)
    phi = np.broadcast_to(grid.phi, s.shape)

    if metric_jets is None:
        metric_jets = metric.metric_jets(s, theta, phi, order=1)
    g, dg = metric_jets[0], metric_jets[1]
    g_inv = tensor_calculus.inverse(g)
    gamma = tensor_calculus.christoffel(g_inv, dg)

    tangents = _tangents(du)
    induced = np.einsum('...ia,...ab,...jb->...ij', tangents, g, tangents)
    determinant = induced[..., 0, 0] * induced[..., 1, 1] - induced[..., 0, 1] ** 2
    if not np.all(determinant > 0):
        raise GeometryException('Induced metric is degenerate (min det = %r)' % float(np.min(determinant)))
    induced_inverse = np.linalg.inv(induced)

    covector = np.zeros(s.shape + (3,))
    covector[..., 0] = 1.0
    covector[..., 1] = -du[..., 0]
    covector[..., 2] = -du[..., 1]
    length = np.sqrt(np.einsum('...a,...ab,...b->...', covector, g_inv, covector))
    normal_covector = covector / length[..., None]
    normal = np.einsum('...ab,...b->...a', g_inv, normal_covector)

    christoffel_part = np.einsum('...a,...abc,...ib,...jc->...ij', normal_covector, gamma, tangents, tangents)
    second_form = -normal_covector[..., 0, None, None] * d2u - christoffel_part
    mean_curvature = np.einsum('...ij,...ij->...', induced_inverse, second_form)

    return {
        'g': g,
        'g_inv': g_inv,
        'tangents': tangents,
        'induced': induced,
        'induced_inverse': induced_inverse,
        'determinant': determinant,
        'normal': normal,
        'normal_covector': normal_covector,
        'second_form': second_form,
        'mean_curvature': mean_curvature,
    }


def _induced_curvature(jets, tangents, metric_jets):
    """Gaussian curvature of the induced metric from its exact 2-jet"""
    du, d2u, d3u = jets[1], jets[2], jets[3]
    g, dg, d2g = metric_jets

    # d_k E_i = u_ik d_s and d_l d_k E_i = u_ikl d_s
    d_tangents = np.zeros(d2u.shape + (3,))
    d_tangents[..., 0] = d2u
    d2_tangents = np.zeros(d3u.shape + (3,))
    d2_tangents[..., 0] = d3u

    # d/dx^k of g_AB(s + u(x), x) and its second derivative
    g_k = np.einsum('...kc,...cab->...kab', tangents, dg)
    g_kl = (np.einsum('...kc,...ld,...dcab->...lkab', tangents, tangents, d2g)
            + d2u[..., None, None] * dg[..., None, None, 0, :, :])

    induced = np.einsum('...ia,...ab,...jb->...ij', tangents, g, tangents)
    d_induced = (np.einsum('...kia,...ab,...jb->...kij', d_tangents, g, tangents)
                 + np.einsum('...ia,...ab,...kjb->...kij', tangents, g, d_tangents)
                 + np.einsum('...ia,...kab,...jb->...kij', tangents, g_k, tangents))
    d2_induced = (np.einsum('...lkia,...ab,...jb->...lkij', d2_tangents, g, tangents)
                  + np.einsum('...kia,...ab,...ljb->...lkij', d_tangents, g, d_tangents)
                  + np.einsum('...kia,...lab,...jb->...lkij', d_tangents, g_k, tangents)
                  + np.einsum('...lia,...ab,...kjb->...lkij', d_tangents, g, d_tangents)
                  + np.einsum('...ia,...ab,...lkjb->...lkij', tangents, g, d2_tangents)
                  + np.einsum('...ia,...lab,...kjb->...lkij', tangents, g_k, d_tangents)
                  + np.einsum('...lia,...kab,...jb->...lkij', d_tangents, g_k, tangents)
                  + np.einsum('...ia,...kab,...ljb->...lkij', tangents, g_k, d_tangents)
                  + np.einsum('...ia,...lkab,...jb->...lkij', tangents, g_kl, tangents))
    _, _, _, scalar = tensor_calculus.curvature(induced, d_induced, d2_induced)
    return 0.5 * scalar


class SurfaceGeometry:
    def __init__(self, surface, data, metric_jets, ricci, scalar) -> None:
        grid = surface.grid
        self.surface = surface
        self.grid = grid

        self.induced_metric = data['induced']
        self.induced_inverse = data['induced_inverse']
        self.normal = data['normal']
        self.normal_covector = data['normal_covector']
        self.tangents = data['tangents']
        self.second_fundamental_form = data['second_form']

        inverse = self.induced_inverse
        a_squared = np.einsum('...ik,...jl,...ij,...kl->...', inverse, inverse,
                              self.second_fundamental_form, self.second_fundamental_form)
        h = data['mean_curvature']

        self.mean_curvature = grid.field(h)
        self.a_sq = grid.field(a_squared)
        self.tracefree_sq = grid.field(a_squared - 0.5 * h ** 2)
        self.area_weight = grid.field(np.sqrt(data['determinant']) / grid.sin_theta)
        self.area = float(grid.integrate(self.area_weight.values))

        g = data['g']
        self.ds_tangential_sq = grid.field(g[..., 0, 0] - self.normal_covector[..., 0] ** 2)
        self.ricci_normal = grid.field(np.einsum('...a,...ab,...b->...', self.normal, ricci, self.normal))
        self.scalar_curvature = grid.field(scalar)
        self.metric_jets = metric_jets

        self.gauss_curvature = None

    def integrate(self, field_or_values):
        values = field_or_values.values if hasattr(field_or_values, 'values') else field_or_values
        return float(self.grid.integrate(values, self.area_weight.values))

    def normal_length_error(self):
        """max over nodes of |g(N,N) - 1| + |g(N, E_i)|"""
        g = self.metric_jets[0]
        norm = np.einsum('...a,...ab,...b->...', self.normal, g, self.normal)
        orthogonality = np.einsum('...a,...ab,...ib->...i', self.normal, g, self.tangents)
        return float(np.max(np.abs(norm - 1.0)) + np.max(np.abs(orthogonality)))

    def orientation(self):
        """g(N, d_s) per node"""
        return self.normal_covector[..., 0]


def compute_geometry(surface):
    grid = surface.grid
    jets = grid.coordinate_jets(surface.u.coefficients, order=3)
    s = surface.s_base + jets[0]
    metric_jets = surface.metric.metric_jets(s, grid.theta, grid.phi, order=2)

    data = _extrinsic(surface.s_base, jets, grid, surface.metric, metric_jets)
    _, _, ricci, scalar = tensor_calculus.curvature(*metric_jets)

    geometry = SurfaceGeometry(surface, data, metric_jets, ricci, scalar)
    geometry.gauss_curvature = grid.field(_induced_curvature(jets, data['tangents'], metric_jets))
    return geometry


def mean_curvature(s, u, metric):
    """H of S_s(u) as a field on the grid"""
    surface = GraphSurface(s, u, metric)
    jets = u.grid.coordinate_jets(u.coefficients, order=2)
    return u.grid.field(_extrinsic(surface.s_base, jets, u.grid, metric)['mean_curvature'])


def mean_curvature_batch(s, coefficients, grid, metric):
    """H values (B, P) for a batch of graph functions given by coefficients (B, K)"""
    jets = grid.coordinate_jets(coefficients, order=2)
    lowest = float(np.min(s + jets[0]))
    if lowest <= -metric.model.s_collar:
        raise GeometryException('Surface leaves the chart: inner radius %r below the collar' % lowest)
    return _extrinsic(s, jets, grid, metric)['mean_curvature']


def hawking_mass_value(area, h_sq_minus_4_integral):
    return math.sqrt(area / SIXTEEN_PI) * (1.0 - h_sq_minus_4_integral / SIXTEEN_PI)


def hawking_mass(geometry):
    h = geometry.mean_curvature.values
    return hawking_mass_value(geometry.area, geometry.integrate(h ** 2 - 4.0))


def gauss_equation_residual(geometry):
    """2K - (R - 2 Ric(N,N) + H^2 - |A|^2) per node"""
    h = geometry.mean_curvature.values
    extrinsic = (geometry.scalar_curvature.values - 2.0 * geometry.ricci_normal.values
                 + h ** 2 - geometry.a_sq.values)
    return geometry.grid.field(2.0 * geometry.gauss_curvature.values - extrinsic)


def lemma_residual(geometry, model):
    """int (H^2 - 4) - [16 pi - int (8m - 12m |d_s^T|^2) / sinh^3 s_hat + 2 int |A_0|^2]

    s_hat is the hyperbolic distance of each surface point."""
    m = model.m
    h = geometry.mean_curvature.values
    hyperbolic = model.hyperbolic_distance(geometry.surface.s_values)
    mass_term = (8.0 * m - 12.0 * m * geometry.ds_tangential_sq.values) / np.sinh(hyperbolic) ** 3

    left = geometry.integrate(h ** 2 - 4.0)
    right = SIXTEEN_PI - geometry.integrate(mass_term) + 2.0 * geometry.integrate(geometry.tracefree_sq)
    return left - right

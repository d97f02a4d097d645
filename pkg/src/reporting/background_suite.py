"""Invariant checks of the unperturbed Schwarzschild-AdS background, run by verify-background."""
import logging
import math

import numpy as np

from concurrency import worker_pool
from geometry import graph_geometry, metric_field
from geometry.graph_geometry import GraphSurface
from geometry.metric_field import PerturbedMetric
from reporting.checks import CheckList
from solver import cmc_solver
from solver.cmc_solver import CmcSolution

LOGGER = logging.getLogger('cmc_foliation.background_suite')

CURVATURE_TOLERANCE = 1e-8
HAWKING_MASS_TOLERANCE = 1e-8
ROUND_TRIP_TOLERANCE = 1e-9
SERIES_TOLERANCE = 1e-6
JACOBIAN_TOLERANCE = 1e-4
STABILITY_TOLERANCE = 1e-6
V_COEFFICIENT_TOLERANCE = 1e-2
QUADRATURE_TOLERANCE = 1e-12
PARSEVAL_TOLERANCE = 1e-9
GAUSS_TOLERANCE = 1e-6
BIANCHI_TOLERANCE = 1e-6
SLOPE_TOLERANCE = 1e-4
EXPANSION_TOLERANCE = 0.05

SPHERE_COUNT = 20
SPHERE_S_MAX = 4.0
ROUND_TRIP_COUNT = 50
JACOBIAN_DEGREE = 5
STABILITY_RADII = [0.5, 1.0, 2.0, 3.0]
JACOBIAN_RADII = [0.5, 2.0]
V_PROFILE_RADII = [6.0, 8.0]
EXPANSION_RADII = np.linspace(2.0, 5.0, 7)
EXPANSION_REFERENCE_RADIUS = 4.0
SLOPE_STEP = 1e-4
PROFILE_COUNT = 2001


def _relative(value, expected):
    return abs(value - expected) / max(abs(expected), 1e-300)


def _coordinate_sphere(s, metric, grid):
    surface = GraphSurface(s, grid.zero_field(), metric)
    h = graph_geometry.mean_curvature(s, grid.zero_field(), metric)
    return CmcSolution(surface, h.mean(), [h.sup_norm()], True, 0, cmc_solver.MODE_FREE)


def check_scalar_curvature(checks, metric, probe):
    s, theta, phi = probe
    deviation = float(np.max(np.abs(metric.scalar_curvature(s, theta, phi) + 6.0)))
    checks.bound('scalar curvature R = -6 at %d probe points' % len(s), deviation, CURVATURE_TOLERANCE)
    return deviation


def check_frame_ricci(checks, metric, probe):
    model = metric.model
    s, theta, phi = probe
    g = metric.metric_jets(s, theta, phi, order=0)[0]
    ricci = metric.ricci(s, theta, phi)
    expected = model.background_curvature(s)

    normal = float(np.max(np.abs(ricci[:, 0, 0] - expected.ric_normal)))
    tangential = max(float(np.max(np.abs(ricci[:, 1, 1] / g[:, 1, 1] - expected.ric_tangential))),
                     float(np.max(np.abs(ricci[:, 2, 2] / g[:, 2, 2] - expected.ric_tangential))))
    mixed = float(np.max(np.abs([ricci[:, 0, 1], ricci[:, 0, 2], ricci[:, 1, 2]])))

    checks.bound('Ric(d_s, d_s) = -2 - 2m/r^3', normal, CURVATURE_TOLERANCE)
    checks.bound('tangential Ric = -2 + m/r^3', tangential, CURVATURE_TOLERANCE)
    checks.bound('off-diagonal Ric vanishes', mixed, CURVATURE_TOLERANCE)
    return {'normal': normal, 'tangential': tangential, 'mixed': mixed}


def check_bianchi(checks, metric, probe):
    residual = metric_field.bianchi_residual(metric, probe)
    checks.bound('contracted Bianchi identity', residual, BIANCHI_TOLERANCE)
    return residual


def check_coordinate_maps(checks, model):
    radii = model.r0 + np.logspace(-3.0, 3.0, ROUND_TRIP_COUNT)
    recovered = model.r_of_s(model.s_of_r(radii))
    round_trip = float(np.max(np.abs(recovered - radii) / radii))
    checks.bound('r(s(r)) = r on %d radii' % ROUND_TRIP_COUNT, round_trip, ROUND_TRIP_TOLERANCE)
    checks.check('s(r0) = 0', float(model.s_of_r(model.r0)), model.s_of_r(model.r0) == 0.0)

    near = np.linspace(0.0, model.s_series, 11)
    series = float(np.max(np.abs(model.r_series(near) - model.r_of_s(near))))
    checks.bound('boundary series against the radial ODE', series, SERIES_TOLERANCE)

    s_values = np.linspace(0.1, 8.0, 20)
    h_from_r = model.coordinate_mean_curvature(model.r_of_s(s_values))
    h_consistency = float(np.max(np.abs(model.mean_curvature_of_s(s_values) - h_from_r)))
    checks.bound('H_m(s) = 2 rho(r)/r', h_consistency, CURVATURE_TOLERANCE)

    checks.info('horizon radius r0', model.r0)
    checks.info('asymptotic offset', model.asymptotic_offset)
    return {'round_trip': round_trip, 'series': series, 'mean_curvature': h_consistency}


def check_v_profile(checks, model):
    target = 2.0 * model.m / 3.0
    result = {}
    for s in V_PROFILE_RADII:
        coefficient = (model.v_profile(s) - 1.0) * math.sinh(float(model.hyperbolic_distance(s))) ** 3
        result[s] = coefficient
        checks.check('v_m expansion coefficient at s=%g' % s, coefficient,
                     abs(coefficient - target) <= V_COEFFICIENT_TOLERANCE, 'expected %.6g' % target)
    return result


def check_mean_curvature_profile(checks, model):
    """H_m(r) = 2 rho(r)/r rises up to r = 3m and falls after it"""
    peak = 3.0 * model.m
    radii = np.linspace(model.r0, 3.0 * peak, PROFILE_COUNT)
    spacing = radii[1] - radii[0]
    h = model.coordinate_mean_curvature(radii)
    increments = np.diff(h)

    argmax = float(radii[np.argmax(h)])
    checks.check('H_m(r) peaks at r = 3m', argmax, abs(argmax - peak) <= spacing, 'expected %.6g' % peak)

    rising = bool(np.all(increments[radii[1:] < peak - spacing] > 0))
    falling = bool(np.all(increments[radii[:-1] > peak + spacing] < 0))
    unimodal = rising and falling
    checks.check('H_m(r) increases below 3m and decreases above', unimodal, unimodal)
    return {'argmax': argmax, 'rising': rising, 'falling': falling}


def check_mean_curvature_expansion(checks, model):
    m = model.m
    scaled = model.mean_curvature_expansion_residual(EXPANSION_RADII)
    worst = float(np.max(np.abs(scaled)))
    checks.bound('(H_m - 2 coth + 2m / sinh^3) sinh^5 bounded on [%g, %g]'
                 % (EXPANSION_RADII[0], EXPANSION_RADII[-1]), worst, 1.0 + m ** 2)

    reference = model.mean_curvature_expansion_residual(EXPANSION_REFERENCE_RADIUS)
    checks.check('e^-5s coefficient of H_m at s=%g' % EXPANSION_REFERENCE_RADIUS, reference,
                 abs(reference - m / 3.0) <= EXPANSION_TOLERANCE * (1.0 + m ** 2), 'expected %.6g' % (m / 3.0))

    slope = model.boundary_mean_curvature_slope()
    difference = (model.mean_curvature_of_s(SLOPE_STEP) - model.mean_curvature_of_s(0.0)) / SLOPE_STEP
    checks.bound('boundary slope of H_m against a finite difference', _relative(difference, slope), SLOPE_TOLERANCE)
    return {'max_scaled': worst, 'coefficient': reference, 'slope': slope, 'finite_difference': difference}


def check_hawking_masses(checks, metric, grid, workers=None):
    model = metric.model
    s_values = np.linspace(0.0, SPHERE_S_MAX, SPHERE_COUNT)

    def sphere_mass(s):
        geometry = _coordinate_sphere(s, metric, grid).geometry
        return graph_geometry.hawking_mass(geometry)

    masses = np.array(worker_pool.map_ordered(sphere_mass, list(s_values), workers))
    deviation = float(np.max(np.abs(masses - model.m)))
    checks.bound('Hawking mass of %d coordinate spheres equals m' % SPHERE_COUNT, deviation,
                 HAWKING_MASS_TOLERANCE)

    closed_form = np.array([model.sphere_hawking_mass(r) for r in model.r_of_s(s_values)])
    checks.bound('closed-form sphere Hawking mass equals m', float(np.max(np.abs(closed_form - model.m))),
                 HAWKING_MASS_TOLERANCE)
    return deviation


def check_sphere_geometry(checks, metric, grid):
    gauss = 0.0
    bonnet = 0.0
    normal = 0.0
    for s in [0.0, 1.0, 3.0]:
        geometry = _coordinate_sphere(s, metric, grid).geometry
        gauss = max(gauss, graph_geometry.gauss_equation_residual(geometry).sup_norm())
        bonnet = max(bonnet, abs(geometry.integrate(geometry.gauss_curvature) - 4.0 * math.pi))
        normal = max(normal, geometry.normal_length_error())

    checks.bound('Gauss equation on coordinate spheres', gauss, GAUSS_TOLERANCE)
    checks.bound('Gauss-Bonnet on coordinate spheres', bonnet, GAUSS_TOLERANCE)
    checks.bound('unit normal', normal, CURVATURE_TOLERANCE)

    boundary = metric_field.boundary_minimality_check(metric, grid)
    checks.bound('boundary sphere is minimal', boundary, CURVATURE_TOLERANCE)
    return {'gauss': gauss, 'gauss_bonnet': bonnet, 'normal': normal, 'boundary_H': boundary}


def check_stability(checks, metric, grid):
    model = metric.model
    worst = 0.0
    for s in STABILITY_RADII:
        r = float(model.r_of_s(s))
        eigenvalue = _coordinate_sphere(s, metric, grid).stability_eigenvalue
        # lowest zero-mean mode is l = 1
        expected = -model.jacobi_spectrum(r, 1)
        worst = max(worst, _relative(eigenvalue, expected))
    checks.bound('stability eigenvalue of S_r equals 6m/r^3', worst, STABILITY_TOLERANCE)
    return worst


def check_linearization(checks, metric, grid, settings):
    model = metric.model
    worst = 0.0
    off_diagonal = 0.0
    active = grid.l_values <= JACOBIAN_DEGREE
    for s in JACOBIAN_RADII:
        r = float(model.r_of_s(s))
        jacobian = cmc_solver.mean_curvature_jacobian(s, metric, grid.zero_field(), settings)
        expected = np.array([-model.jacobi_spectrum(r, l) for l in grid.l_values[active]])

        diagonal = np.diag(jacobian)[active]
        scale = np.maximum(np.abs(expected), 1.0 / r ** 2)
        worst = max(worst, float(np.max(np.abs(diagonal - expected) / scale)))

        block = jacobian[np.ix_(active, active)]
        off_diagonal = max(off_diagonal, float(np.max(np.abs(block - np.diag(np.diag(block)))) * r ** 2))

    checks.bound('linearized H reproduces (l(l+1) - 2 + 6m/r)/r^2 for l <= %d' % JACOBIAN_DEGREE, worst,
                 JACOBIAN_TOLERANCE)
    checks.bound('linearized H is diagonal in harmonics', off_diagonal, JACOBIAN_TOLERANCE)
    return {'diagonal': worst, 'off_diagonal': off_diagonal}


def check_quadrature(checks, grid, seed):
    area = float(grid.integrate(np.ones(grid.point_count)))
    checks.bound('integral of 1 over S^2 equals 4 pi', abs(area - 4.0 * math.pi), QUADRATURE_TOLERANCE)

    field = grid.random_field(np.random.default_rng(seed))
    energy = float(grid.integrate(field.values ** 2))
    parseval = abs(energy - float(np.sum(field.coefficients ** 2))) / energy
    checks.bound('Parseval identity', parseval, PARSEVAL_TOLERANCE)

    recovered = grid.analyze(grid.synthesize(field.coefficients))
    checks.bound('analyze inverts synthesize', float(np.max(np.abs(recovered - field.coefficients))),
                 PARSEVAL_TOLERANCE)
    return {'area': area, 'parseval': parseval}


def run_background_suite(model, grid, seed=0, probe_count=50, settings=None):
    """All background checks in order; returns the filled CheckList and a report dict"""
    settings = settings or cmc_solver.SolveSettings()
    checks = CheckList()
    metric = PerturbedMetric(model)
    probe = metric_field.probe_points(seed, probe_count)

    LOGGER.info('Running background suite for %r on %r', model, grid)

    report = {
        'mass': model.m,
        'r0': model.r0,
        'asymptotic_offset': model.asymptotic_offset,
        'resolution': grid.degree,
        'quadrature': check_quadrature(checks, grid, seed),
        'coordinate_maps': check_coordinate_maps(checks, model),
        'v_profile': check_v_profile(checks, model),
        'mean_curvature_profile': check_mean_curvature_profile(checks, model),
        'mean_curvature_expansion': check_mean_curvature_expansion(checks, model),
        'scalar_curvature': check_scalar_curvature(checks, metric, probe),
        'frame_ricci': check_frame_ricci(checks, metric, probe),
        'bianchi': check_bianchi(checks, metric, probe),
        'sphere_geometry': check_sphere_geometry(checks, metric, grid),
        'hawking_mass': check_hawking_masses(checks, metric, grid, settings.workers),
        'stability': check_stability(checks, metric, grid),
        'linearization': check_linearization(checks, metric, grid, settings),
    }
    report['passed'] = checks.passed
    report['checks'] = checks.to_list()
    return checks, report

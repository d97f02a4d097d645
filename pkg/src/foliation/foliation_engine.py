"""Continuation in the base radius s producing a foliation by weakly stable CMC spheres."""
import logging
import math

import numpy as np
from scipy import optimize

from concurrency import worker_pool
from config.exceptions import FoliationException, DivergenceException, MatchingException, DomainException, \
    LinearSolveException, GeometryException, DegenerateMetricException, UnsupportedFamilyException, \
    ContinuationException
from geometry import graph_geometry, metric_field
from geometry.graph_geometry import SIXTEEN_PI
from solver import cmc_solver

LOGGER = logging.getLogger('cmc_foliation.foliation_engine')

VARIANT_MINIMAL = 'minimal'
VARIANT_H2 = 'h2'
VARIANTS = [VARIANT_MINIMAL, VARIANT_H2]

STABILITY_TOLERANCE = 1e-9
HYPOTHESIS_TOLERANCE = 1e-9
MAX_STEP = 0.2

SOLVE_FAILURES = (DivergenceException, LinearSolveException, GeometryException, DegenerateMetricException)


class HypothesisFlags:
    def __init__(self, min_r_plus_6, decay_distance, boundary_mean_curvature) -> None:
        self.min_r_plus_6 = min_r_plus_6
        self.decay_distance = decay_distance
        self.boundary_mean_curvature = boundary_mean_curvature

    @property
    def scalar_curvature_ok(self):
        return self.min_r_plus_6 >= -HYPOTHESIS_TOLERANCE

    @property
    def boundary_minimal(self):
        return self.boundary_mean_curvature <= HYPOTHESIS_TOLERANCE

    @property
    def decay_finite(self):
        return self.decay_distance is not None and math.isfinite(self.decay_distance)

    @property
    def satisfied(self):
        return self.scalar_curvature_ok and self.boundary_minimal and self.decay_finite

    def to_dict(self):
        return {
            'min_r_plus_6': self.min_r_plus_6,
            'decay_distance': self.decay_distance,
            'boundary_mean_curvature': self.boundary_mean_curvature,
            'scalar_curvature_ok': self.scalar_curvature_ok,
            'boundary_minimal': self.boundary_minimal,
            'decay_finite': self.decay_finite,
            'satisfied': self.satisfied
        }


def evaluate_hypotheses(metric, grid, probe, decay_s_max=metric_field.DEFAULT_DECAY_S_MAX):
    """Membership checks for the admissible class: R >= -6 on the probe, finite decay distance, minimal boundary"""
    floor = metric_field.scalar_curvature_floor(metric, probe)
    try:
        distance = metric_field.decay_distance(metric, s_max=decay_s_max)
    except (UnsupportedFamilyException, DomainException, GeometryException, DegenerateMetricException) as e:
        LOGGER.warning('Decay distance unavailable: %s', e)
        distance = None
    boundary = metric_field.boundary_minimality_check(metric, grid)

    flags = HypothesisFlags(floor, distance, boundary)
    if not flags.scalar_curvature_ok:
        LOGGER.warning('Scalar curvature hypothesis not met: min(R+6) = %.3e', floor)
    if not flags.boundary_minimal:
        LOGGER.warning('Boundary not minimal: sup|H| = %.3e', boundary)
    return flags


class LeafRecord:
    def __init__(self, index, solution) -> None:
        self.index = index
        self.solution = solution
        self.s_base = solution.s
        self.h_const = solution.h_const
        self.iterations = solution.iterations
        self.unresolved_residual = solution.unresolved_residual

        self.area = None
        self.hawking_mass = None
        self.stability_eigenvalue = None
        self.lapse_min = None
        self.inner_radius = None
        self.outer_radius = None
        self.s_hat = None
        self.sup_w = None
        self.int_ds_tan_sq = None
        self.int_ring_a_sq = None
        self.lemma_residual = None
        self.min_r_plus_6 = None
        self.gauss_residual = None
        self.gauss_bonnet = None
        self.r_plus_6_spread = None
        self.gauss_curvature_spread = None
        self.u_norms = None

        self.mean_lapse = None
        self.int_q = None
        self.int_q_fluctuation = None
        self.first_variation = None
        self.mass_derivative = None

    @property
    def u(self):
        return self.solution.u

    @property
    def geometry(self):
        return self.solution.geometry

    def to_dict(self):
        return {
            't': self.index,
            's_base': self.s_base,
            'H_const': self.h_const,
            'area': self.area,
            'm_H': self.hawking_mass,
            'stability_eig': self.stability_eigenvalue,
            'lapse_min': self.lapse_min,
            's_inner': self.inner_radius,
            's_outer': self.outer_radius,
            's_hat': self.s_hat,
            'sup_w': self.sup_w,
            'int_ds_tan_sq': self.int_ds_tan_sq,
            'int_ring_A_sq': self.int_ring_a_sq,
            'lemma_residual': self.lemma_residual,
            'min_R_plus_6': self.min_r_plus_6,
            'gauss_residual': self.gauss_residual,
            'gauss_bonnet': self.gauss_bonnet,
            'mean_lapse': self.mean_lapse,
            'int_Q': self.int_q,
            'int_Q_fluctuation': self.int_q_fluctuation,
            'first_variation': self.first_variation,
            'mass_derivative': self.mass_derivative,
            'u_norms': self.u_norms,
            'iterations': self.iterations,
            'unresolved_residual': self.unresolved_residual
        }


class FoliationReport:
    def __init__(self, model, metric, variant, step, leaves, hypotheses) -> None:
        self.model = model
        self.metric = metric
        self.variant = variant
        self.step = step
        self.leaves = leaves
        self.hypotheses = hypotheses

    @property
    def boundary_leaf(self):
        return self.leaves[0]

    def s_values(self):
        return np.array([leaf.s_base for leaf in self.leaves])

    def column(self, name):
        return np.array([getattr(leaf, name) for leaf in self.leaves], dtype=float)


def _measure_leaf(record, model):
    geometry = record.geometry
    surface = geometry.surface
    u = record.u

    record.area = geometry.area
    record.hawking_mass = graph_geometry.hawking_mass(geometry)
    record.stability_eigenvalue = record.solution.stability_eigenvalue
    record.inner_radius = surface.inner_radius
    record.outer_radius = surface.outer_radius

    # |Sigma| = 4 pi sinh^2 s_hat
    record.s_hat = math.asinh(math.sqrt(record.area / (4.0 * math.pi)))
    hyperbolic = model.hyperbolic_distance(surface.s_values)
    record.sup_w = float(np.max(np.abs(hyperbolic - record.s_hat)))

    record.int_ds_tan_sq = geometry.integrate(geometry.ds_tangential_sq)
    record.int_ring_a_sq = geometry.integrate(geometry.tracefree_sq)
    record.lemma_residual = graph_geometry.lemma_residual(geometry, model)

    r_plus_6 = geometry.scalar_curvature.values + 6.0
    record.min_r_plus_6 = float(np.min(r_plus_6))
    record.r_plus_6_spread = float(np.max(r_plus_6) - np.min(r_plus_6))
    record.gauss_residual = graph_geometry.gauss_equation_residual(geometry).sup_norm()
    record.gauss_bonnet = geometry.integrate(geometry.gauss_curvature)
    curvature = geometry.gauss_curvature.values
    record.gauss_curvature_spread = float(np.max(curvature) - np.min(curvature))

    jets = u.grid.coordinate_jets(u.coefficients, order=2)
    record.u_norms = [float(np.max(np.abs(jet))) for jet in jets]
    return record


def _radial_position(record):
    return record.s_base + record.u.values


def _attach_lapse(leaves):
    """Discrete lapse g(N, dF/ds) from consecutive leaves and the first-variation quantities"""
    count = len(leaves)
    for index, leaf in enumerate(leaves):
        geometry = leaf.geometry
        normal_s = geometry.normal_covector[..., 0]

        if count > 1:
            if index + 1 < count:
                gap = _radial_position(leaves[index + 1]) - _radial_position(leaf)
                spacing = leaves[index + 1].s_base - leaf.s_base
            else:
                gap = _radial_position(leaf) - _radial_position(leaves[index - 1])
                spacing = leaf.s_base - leaves[index - 1].s_base
            if np.min(gap) <= 0:
                raise FoliationException('Leaves %d and %d cross (min gap %.3e)'
                                         % (index, index + 1, float(np.min(gap))), leaf_index=index)
            forward_lapse = normal_s * gap / spacing
            leaf.lapse_min = float(np.min(forward_lapse))
            if leaf.lapse_min <= 0:
                raise FoliationException('Lapse is not positive on leaf %d' % index, leaf_index=index)

        if 0 < index < count - 1:
            previous, following = leaves[index - 1], leaves[index + 1]
            spacing = following.s_base - previous.s_base
            lapse = normal_s * (_radial_position(following) - _radial_position(previous)) / spacing
            _attach_first_variation(leaf, lapse)
            leaf.mass_derivative = (following.hawking_mass - previous.hawking_mass) / spacing


def _attach_first_variation(leaf, lapse):
    geometry = leaf.geometry
    area = geometry.area
    h = leaf.h_const

    q = (0.5 * (geometry.scalar_curvature.values + 6.0)
         + (4.0 * math.pi / area - geometry.gauss_curvature.values)
         + 0.5 * geometry.tracefree_sq.values)

    mean_lapse = geometry.integrate(lapse) / area
    leaf.mean_lapse = mean_lapse
    leaf.int_q = geometry.integrate(q)
    leaf.int_q_fluctuation = geometry.integrate(q * (lapse - mean_lapse))
    integral = leaf.int_q * mean_lapse + leaf.int_q_fluctuation
    leaf.first_variation = 2.0 * math.sqrt(area) * h * integral / SIXTEEN_PI ** 1.5


def continuation_radii(model, variant, s_max, step):
    if not (0 < step <= MAX_STEP):
        raise DomainException('Continuation step should be in (0, %r], got %r' % (MAX_STEP, step))

    start = 0.0 if variant == VARIANT_MINIMAL else float(model.s_of_r(2.0 * model.m))
    if s_max <= start:
        raise DomainException('s_max=%r should exceed the start radius %r' % (s_max, start))

    count = int(math.floor((s_max - start) / step + 1e-9))
    return start + step * np.arange(count + 1)


def foliate(metric, grid, s_max, step, settings=None, variant=VARIANT_MINIMAL, hypotheses=None):
    """Leaves at s = start, start + step, ..., each solve seeded by the previous graph"""
    if variant not in VARIANTS:
        raise DomainException('Unknown variant: ' + repr(variant))
    settings = settings or cmc_solver.SolveSettings()
    model = metric.model

    if variant == VARIANT_MINIMAL and hypotheses is not None and not hypotheses.boundary_minimal:
        raise FoliationException('Boundary not minimal (sup|H| = %.3e)' % hypotheses.boundary_mean_curvature,
                                 leaf_index=0)

    radii = continuation_radii(model, variant, s_max, step)
    LOGGER.info('Foliating %r with %d leaves on [%r, %r], variant %s',
                metric, len(radii), radii[0], radii[-1], variant)

    solutions = []
    guess = grid.zero_field()
    for index, s in enumerate(radii):
        try:
            if index == 0 and variant == VARIANT_H2:
                solution = cmc_solver.solve_prescribed_cmc(s, metric, settings, target=2.0, u0=guess)
            else:
                solution = cmc_solver.solve_with_homotopy(s, metric, guess, settings)
            eigenvalue = solution.stability_eigenvalue
        except SOLVE_FAILURES as e:
            LOGGER.error('Solve failed on leaf %d (s=%r): %s', index, s, e)
            partial = FoliationReport(model, metric, variant, step, _measured_leaves(solutions, model, settings),
                                      hypotheses)
            raise ContinuationException('Leaf %d (s=%.6g): %s: %s' % (index, s, type(e).__name__, e),
                                        leaf_index=index, s=float(s), report=partial,
                                        residual_history=getattr(e, 'residual_history', None)) from e

        if eigenvalue < -STABILITY_TOLERANCE:
            raise FoliationException('Leaf %d (s=%r) is not weakly stable: eigenvalue %.3e'
                                     % (index, s, eigenvalue), leaf_index=index)
        if variant == VARIANT_MINIMAL and index > 0 and solution.h_const <= 0:
            raise FoliationException('Leaf %d (s=%r) has non-positive mean curvature %r'
                                     % (index, s, solution.h_const), leaf_index=index)

        LOGGER.info('Leaf %d: s=%.4f H=%.12f stability=%.6e iterations=%d',
                    index, s, solution.h_const, eigenvalue, solution.iterations)
        solutions.append(solution)
        guess = solution.u

    leaves = [LeafRecord(index, solution) for index, solution in enumerate(solutions)]
    worker_pool.map_ordered(lambda leaf: _measure_leaf(leaf, model), leaves, settings.workers)
    _attach_lapse(leaves)

    for leaf in leaves:
        LOGGER.debug('Leaf %d: area=%r m_H=%r lapse_min=%r', leaf.index, leaf.area, leaf.hawking_mass, leaf.lapse_min)

    return FoliationReport(model, metric, variant, step, leaves, hypotheses)


def _measured_leaves(solutions, model, settings):
    """Records of the leaves solved before a failure; the lapse is left out where it cannot be formed"""
    leaves = [LeafRecord(index, solution) for index, solution in enumerate(solutions)]
    try:
        worker_pool.map_ordered(lambda leaf: _measure_leaf(leaf, model), leaves, settings.workers)
        _attach_lapse(leaves)
    except (FoliationException, GeometryException, DegenerateMetricException) as e:
        LOGGER.warning('Partial foliation measured incompletely: %s', e)
    return leaves


class MatchingPoint:
    def __init__(self, s, s_tilde, h_const, distance, prescribed_iterations) -> None:
        self.s = s
        self.s_tilde = s_tilde
        self.h_const = h_const
        self.distance = distance
        self.prescribed_iterations = prescribed_iterations

    def to_dict(self):
        return {
            's': self.s,
            's_tilde': self.s_tilde,
            'H_const': self.h_const,
            'distance': self.distance,
            'prescribed_iterations': self.prescribed_iterations
        }


def matching_radius(model, h_value):
    """s~ > s(3m) with H_m(s~) = h_value; H_m decreases there"""
    lower = float(model.s_of_r(3.0 * model.m * (1.0 + cmc_solver.RESONANCE_GUARD)))
    upper = model.s_table - 1.0

    def difference(s):
        return model.mean_curvature_of_s(s) - h_value

    low_value, high_value = difference(lower), difference(upper)
    if low_value * high_value > 0:
        raise MatchingException('H=%r is outside the matching range (%r, %r)'
                                % (h_value, model.mean_curvature_of_s(upper), model.mean_curvature_of_s(lower)))
    return optimize.brentq(difference, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def match_point(s, metric, seed, settings=None):
    """Free leaf at s, seeded by `seed`, against the prescribed-H leaf over S_s~ solved from the coordinate sphere"""
    settings = settings or cmc_solver.SolveSettings()
    free = cmc_solver.solve_with_homotopy(s, metric, seed, settings)

    s_tilde = matching_radius(metric.model, free.h_const)
    recentred = free.u.values + (s - s_tilde)
    prescribed = cmc_solver.solve_prescribed_cmc(s_tilde, metric, settings, u0=seed.grid.zero_field())

    distance = float(np.max(np.abs(recentred - prescribed.u.values)))
    LOGGER.info('Matching at s=%.4f: s~=%.10f distance=%.3e', s, s_tilde, distance)
    return MatchingPoint(s, s_tilde, free.h_const, distance, prescribed.iterations)


def matching_check(metric, report, window, settings=None):
    """Free leaves recentred over S_s~ against prescribed-H leaves at the window points"""
    settings = settings or cmc_solver.SolveSettings()
    model = metric.model
    lower_bound = float(model.s_of_r(3.0 * model.m * (1.0 + cmc_solver.RESONANCE_GUARD)))
    s_values = report.s_values()

    for s in window:
        if s <= lower_bound or s > s_values[-1]:
            raise MatchingException('Window point %r is outside (%r, %r]' % (s, lower_bound, s_values[-1]))

    points = []
    for s in window:
        nearest = min(report.leaves, key=lambda leaf: abs(leaf.s_base - s))
        points.append(match_point(s, metric, nearest.u, settings))
    return points

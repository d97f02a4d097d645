"""Checks over a completed foliation: Hawking-mass monotonicity, mass limit, decay rates, Penrose verdicts."""
import logging
import math

import numpy as np
from scipy import optimize

from config.exceptions import EstimateUnavailableException
from foliation.foliation_engine import VARIANT_MINIMAL, VARIANT_H2
from geometry.graph_geometry import SIXTEEN_PI

LOGGER = logging.getLogger('cmc_foliation.diagnostics')

MONOTONICITY_TOLERANCE = 1e-8
PENROSE_TOLERANCE = 1e-6
MASS_LIMIT_TOLERANCE = 1e-4
ASYMPTOTIC_RADIUS = 5.0
MIN_TAIL_LEAVES = 5
EXACT_FLOOR = 1e-13
ROUND_OFF = 1e-13
MIN_RESOLVED_LEAVES = 3
FIRST_VARIATION_NOISE = 1e-10

VERDICT_PASS = 'PASS'
VERDICT_FAIL = 'FAIL'
VERDICT_HYPOTHESES_NOT_MET = 'hypotheses not met'


def _hypotheses_satisfied(report):
    return report.hypotheses is None or report.hypotheses.satisfied


def monotonicity_report(report, tolerance=MONOTONICITY_TOLERANCE):
    masses = report.column('hawking_mass')
    increments = np.diff(masses)
    worst = float(np.min(increments)) if increments.size else 0.0
    monotone = worst >= -tolerance

    first_variation = first_variation_check(report)
    result = {
        'increments': increments.tolist(),
        'min_increment': worst,
        'monotone': monotone,
        'first_variation': first_variation,
        'hypotheses_satisfied': _hypotheses_satisfied(report)
    }

    if monotone:
        result['verdict'] = VERDICT_PASS
    elif not result['hypotheses_satisfied']:
        result['verdict'] = VERDICT_HYPOTHESES_NOT_MET
    else:
        # a decrease with the hypotheses in place points to resolution, not to the inequality
        result['verdict'] = VERDICT_FAIL
        result['note'] = 'numerical resolution failure: refine the sphere grid or the continuation step'
        LOGGER.warning('Hawking mass decreases by %.3e with hypotheses satisfied', -worst)

    return result


def first_variation_check(report):
    """Centered difference of m_H against the first-variation prediction, per interior leaf"""
    residuals = []
    for leaf in report.leaves:
        if leaf.first_variation is None or leaf.mass_derivative is None:
            continue
        residuals.append({
            's': leaf.s_base,
            'predicted': leaf.first_variation,
            'measured': leaf.mass_derivative,
            'residual': leaf.mass_derivative - leaf.first_variation,
            'mean_lapse': leaf.mean_lapse,
            'int_Q': leaf.int_q,
            'int_Q_fluctuation': leaf.int_q_fluctuation
        })

    absolute = [abs(entry['residual']) for entry in residuals]
    return {
        'leaves': residuals,
        'max_residual': max(absolute) if absolute else None
    }


def richardson_ratio(coarse, fine):
    """Ratio of first-variation residuals at common radii for step and step / 2; about 4 for a second-order scheme"""
    fine_by_s = {round(entry['s'], 9): entry['residual'] for entry in first_variation_check(fine)['leaves']}

    pairs = []
    for entry in first_variation_check(coarse)['leaves']:
        key = round(entry['s'], 9)
        if key in fine_by_s:
            pairs.append((abs(entry['residual']), abs(fine_by_s[key])))

    if not pairs:
        raise EstimateUnavailableException('No common radii between the two foliations')

    coarse_error = max(pair[0] for pair in pairs)
    fine_error = max(pair[1] for pair in pairs)
    if coarse_error <= first_variation_floor(coarse) or fine_error <= first_variation_floor(fine):
        LOGGER.info('First-variation residuals at round-off: %.3e, %.3e', coarse_error, fine_error)
        return None
    return coarse_error / fine_error


def first_variation_floor(report):
    """Round-off level of the centered m_H difference: Newton-level noise in m_H divided by the step"""
    scale = max([1.0] + [abs(leaf.hawking_mass) for leaf in report.leaves if leaf.hawking_mass is not None])
    return FIRST_VARIATION_NOISE * scale / report.step


def _tail(report, minimum_leaves=MIN_TAIL_LEAVES):
    tail = [leaf for leaf in report.leaves if leaf.inner_radius >= ASYMPTOTIC_RADIUS]
    if len(tail) < minimum_leaves:
        raise EstimateUnavailableException('%d leaves with inner radius >= %r, %d required'
                                           % (len(tail), ASYMPTOTIC_RADIUS, minimum_leaves))
    return tail


def mass_limit_estimate(report):
    """Fit m_H = m_inf + c exp(-s_inner) on the asymptotic tail"""
    tail = _tail(report)
    radii = np.array([leaf.inner_radius for leaf in tail])
    masses = np.array([leaf.hawking_mass for leaf in tail])

    design = np.column_stack([np.ones_like(radii), np.exp(-radii)])
    (limit, coefficient), _, _, _ = np.linalg.lstsq(design, masses, rcond=None)
    fit_residual = float(np.sqrt(np.mean((design @ [limit, coefficient] - masses) ** 2)))

    m = report.model.m
    bound = max(MASS_LIMIT_TOLERANCE, 10.0 * fit_residual)
    result = {
        'limit': float(limit),
        'coefficient': float(coefficient),
        'fit_residual': fit_residual,
        'error_bound': bound,
        'deviation': float(limit - m),
        'passed': abs(limit - m) <= bound,
        'free_exponent': _free_exponent_fit(radii, masses, limit, coefficient)
    }
    LOGGER.info('Mass limit: %.12f (m=%r, fit residual %.3e)', limit, m, fit_residual)
    return result


def _free_exponent_fit(radii, masses, limit, coefficient):
    if np.max(np.abs(masses - limit)) <= EXACT_FLOOR:
        return None

    def model(s, m_inf, c, rate):
        return m_inf + c * np.exp(-rate * (s - radii[0]))

    try:
        parameters, _ = optimize.curve_fit(model, radii, masses,
                                           p0=[limit, coefficient * math.exp(-radii[0]), 1.0], maxfev=10000)
    except (RuntimeError, optimize.OptimizeWarning) as e:
        LOGGER.warning('Free-exponent mass fit failed: %s', e)
        return None
    return {'limit': float(parameters[0]), 'rate': float(parameters[2])}


def _slope(radii, values, floors):
    """Log-linear fit over the leaves where the value stands above its round-off floor"""
    values = np.abs(np.asarray(values, dtype=float))
    resolved = values > np.asarray(floors, dtype=float)
    if np.count_nonzero(resolved) < MIN_RESOLVED_LEAVES:
        return {'slope': None, 'resolved': False, 'resolved_leaves': int(np.count_nonzero(resolved)),
                'constant': None}

    slope, intercept = np.polyfit(radii[resolved], np.log(values[resolved]), 1)
    return {'slope': float(slope), 'resolved': True, 'resolved_leaves': int(np.count_nonzero(resolved)),
            'constant': float(math.exp(intercept))}


def decay_diagnostics(report):
    """Log-linear rates of sup|w|, int |d_s^T|^2 and int |A_0|^2 in the inner radius"""
    tail = _tail(report, minimum_leaves=2)
    radii = np.array([leaf.inner_radius for leaf in tail])
    areas = np.array([leaf.area for leaf in tail])
    h_squared = np.array([leaf.h_const ** 2 for leaf in tail])

    result = {
        'sup_w': _slope(radii, [leaf.sup_w for leaf in tail], ROUND_OFF * np.maximum(radii, 1.0)),
        'int_ds_tan_sq': _slope(radii, [leaf.int_ds_tan_sq for leaf in tail], ROUND_OFF * areas),
        'int_ring_A_sq': _slope(radii, [leaf.int_ring_a_sq for leaf in tail], ROUND_OFF * areas * h_squared),
    }

    bounds = {'sup_w': -0.5, 'int_ds_tan_sq': -1.5, 'int_ring_A_sq': -3.5}
    for name, bound in bounds.items():
        entry = result[name]
        entry['bound'] = bound
        entry['passed'] = not entry['resolved'] or entry['slope'] <= bound

    result['sup_w_split'] = _split_constants(radii, [leaf.sup_w for leaf in tail])
    result['lemma_scaled'] = _lemma_growth(tail, radii, areas)
    return result


def _lemma_growth(tail, radii, areas):
    """|residual| / (|Sigma| exp(-4 s_inner)) on leaves above the round-off floor of int (H^2 - 4).

    The scaled residual is bounded when its maximum over the outer half of the resolved tail stays within a
    fixed factor of the maximum over the inner half."""
    residuals = np.abs([leaf.lemma_residual for leaf in tail])
    scaled = residuals / (areas * np.exp(-4.0 * radii))
    resolved = residuals > ROUND_OFF * areas

    result = {
        'max': float(np.max(scaled)),
        'min': float(np.min(scaled)),
        'resolved_leaves': int(np.count_nonzero(resolved)),
        'ratio': None
    }
    values = scaled[resolved]
    if values.size >= 2 * MIN_RESOLVED_LEAVES:
        half = values.size // 2
        inner = float(np.max(values[:half]))
        if inner > 0:
            result['ratio'] = float(np.max(values[half:])) / inner
    return result


def _split_constants(radii, values):
    """C in sup|w| <= C exp(-s_inner), fitted separately on both halves of the tail"""
    values = np.abs(np.asarray(values, dtype=float))
    if np.max(values) <= EXACT_FLOOR or len(values) < 4:
        return None
    scaled = values * np.exp(radii)
    half = len(values) // 2
    first, second = float(np.max(scaled[:half])), float(np.max(scaled[half:]))
    return {'first_half': first, 'second_half': second, 'ratio': max(first, second) / min(first, second)}


def outermost_check(report):
    """Interior leaves have H > 0 (H > 2 for the H=2 boundary)"""
    threshold = 0.0 if report.variant == VARIANT_MINIMAL else 2.0
    interior = report.leaves[1:]
    violations = [leaf.index for leaf in interior if not leaf.h_const > threshold]
    return {
        'threshold': threshold,
        'min_interior_H': min((leaf.h_const for leaf in interior), default=None),
        'violations': violations,
        'passed': not violations
    }


def penrose_report(report, mass_limit=None):
    boundary = report.boundary_leaf
    m = report.model.m
    scaled_area = boundary.area / SIXTEEN_PI

    if report.variant == VARIANT_H2:
        lhs = math.sqrt(scaled_area)
    else:
        lhs = math.sqrt(scaled_area) + 4.0 * scaled_area ** 1.5

    reference = m if mass_limit is None else mass_limit
    holds = lhs <= reference + PENROSE_TOLERANCE
    gap = m - lhs

    if not _hypotheses_satisfied(report):
        verdict = VERDICT_HYPOTHESES_NOT_MET
    else:
        verdict = VERDICT_PASS if holds else VERDICT_FAIL

    equality = abs(gap) <= 1e-10
    LOGGER.info('Penrose (%s): LHS=%.12f m=%r gap=%.6g verdict=%s', report.variant, lhs, m, gap, verdict)
    return {
        'variant': report.variant,
        'boundary_area': boundary.area,
        'boundary_H': boundary.h_const,
        'lhs': lhs,
        'mass': m,
        'mass_limit': mass_limit,
        'gap': gap,
        'inequality_holds': holds,
        'equality': equality,
        'verdict': verdict
    }


def rigidity_diagnostics(report, tolerance=MONOTONICITY_TOLERANCE):
    """Informational near-equality record; never an assertion"""
    increments = np.diff(report.column('hawking_mass'))
    flat = bool(np.all(np.abs(increments) <= tolerance))
    return {
        'max_int_ring_A_sq': float(np.max(report.column('int_ring_a_sq'))),
        'max_r_plus_6_spread': float(np.max(report.column('r_plus_6_spread'))),
        'max_gauss_curvature_spread': float(np.max(report.column('gauss_curvature_spread'))),
        'mass_increments_flat': flat,
        'near_rigid': flat
    }


def leaf_parametrisation(report):
    """Range of l = H_const over the asymptotic tail"""
    try:
        tail = _tail(report, minimum_leaves=1)
    except EstimateUnavailableException:
        return None
    values = [leaf.h_const for leaf in tail]
    return {'min': min(values), 'max': max(values)}

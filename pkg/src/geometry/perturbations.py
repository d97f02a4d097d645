"""Closed-form metric families on [-collar, inf) x S^2, differentiated exactly with sympy.

A family is written as g = g_m + h in coordinates (s, theta, phi) through the radial state (r, P) of the
background, where dr/ds = P and dP/ds = r + m/r^2. Total derivatives apply that closure, so every jet is
exact even though r(s) itself is only known numerically. Radial profiles are evaluated at a = |s| with the
sign symbol `sgn` (da/ds = sgn), which realises the even reflection through the boundary.
"""
import itertools
import logging
import threading

import numpy as np
import sympy as sp

from config.exceptions import UnsupportedFamilyException

LOGGER = logging.getLogger('cmc_foliation.perturbations')

FAMILY_NONE = 'none'
FAMILY_SPHERE_BLOCK = 'sphere_block'
FAMILY_GAUGE = 'gauge'
FAMILIES = [FAMILY_NONE, FAMILY_SPHERE_BLOCK, FAMILY_GAUGE]

PROFILE_POWER_EXP = 'power_exp'
PROFILE_SATURATED = 'saturated'
PROFILES = [PROFILE_POWER_EXP, PROFILE_SATURATED]

JET_METRIC = 'metric'
JET_BACKGROUND = 'background'
JET_PERTURBATION = 'perturbation'

# radial shifts of the gauge family stay below 1e-3, so r(s + d) is resolved to round-off by this order
GAUGE_SERIES_ORDER = 6

S, THETA, PHI = sp.symbols('s theta phi', real=True)
ABS_S = sp.Symbol('a', nonnegative=True)
SIGN_S = sp.Symbol('sgn', real=True)
EPS = sp.Symbol('eps', real=True)
MASS = sp.Symbol('m', positive=True)
RADIUS = sp.Symbol('r', positive=True)
RADIUS_RATE = sp.Symbol('P', real=True)

COORDINATES = (S, THETA, PHI)
ARGUMENTS = [S, THETA, PHI, ABS_S, SIGN_S, EPS, MASS, RADIUS, RADIUS_RATE]


def total_derivative(expression, axis):
    """Coordinate derivative of an expression in (s, theta, phi, |s|, sgn, r, P)"""
    result = sp.diff(expression, COORDINATES[axis])
    if axis == 0:
        result += (sp.diff(expression, ABS_S) * SIGN_S
                   + sp.diff(expression, RADIUS) * RADIUS_RATE
                   + sp.diff(expression, RADIUS_RATE) * (RADIUS + MASS / RADIUS ** 2))
    return result


def real_harmonic_expression(l, k):
    """Unit-norm real spherical harmonic Y_{l,k}(theta, phi) without the Condon-Shortley phase"""
    order = abs(k)
    x = sp.Symbol('x', real=True)
    legendre = sp.diff(sp.legendre(l, x), x, order).subs(x, sp.cos(THETA)) * sp.sin(THETA) ** order
    norm = sp.sqrt(sp.Rational(2 * l + 1, 4) / sp.pi * sp.factorial(l - order) / sp.factorial(l + order))

    if k == 0:
        return norm * legendre
    if k > 0:
        return sp.sqrt(2) * norm * legendre * sp.cos(order * PHI)
    return sp.sqrt(2) * norm * legendre * sp.sin(order * PHI)


def angular_factor(harmonics):
    expression = sp.Integer(0)
    for l, k, weight in harmonics:
        expression += sp.nsimplify(weight) * real_harmonic_expression(l, k)
    return expression


def radial_profile(kind, power, rate):
    a = ABS_S
    if kind == PROFILE_POWER_EXP:
        return a ** sp.nsimplify(power) * sp.exp(-sp.nsimplify(rate) * a)
    if kind == PROFILE_SATURATED:
        return (1 - sp.exp(-a)) ** 2 * sp.exp(-sp.nsimplify(rate) * a)
    raise UnsupportedFamilyException('Unknown radial profile: ' + repr(kind))


def profile_boundary_values(kind, power, rate):
    """(w(0), w'(0)) of a radial profile"""
    profile = radial_profile(kind, power, rate)
    value = sp.limit(profile, ABS_S, 0, '+')
    slope = sp.limit(sp.diff(profile, ABS_S), ABS_S, 0, '+')
    return float(value), float(slope)


def background_components():
    metric = sp.zeros(3, 3)
    metric[0, 0] = sp.Integer(1)
    metric[1, 1] = RADIUS ** 2
    metric[2, 2] = RADIUS ** 2 * sp.sin(THETA) ** 2
    return metric


def _radius_increment(shift):
    """r(s + shift) - r(s) as a Taylor polynomial in the shift, coefficients from the radial closure"""
    increment = sp.Integer(0)
    coefficient = RADIUS
    for n in range(1, GAUGE_SERIES_ORDER + 1):
        coefficient = total_derivative(coefficient, 0)
        increment += coefficient * shift ** n / sp.factorial(n)
    return increment


def perturbation_components(spec):
    if spec.family == FAMILY_NONE:
        return sp.zeros(3, 3)

    profile = radial_profile(spec.profile_kind, spec.profile_power, spec.profile_rate)
    perturbation = sp.zeros(3, 3)

    if spec.family == FAMILY_SPHERE_BLOCK:
        a_factor = angular_factor(spec.a_harmonics)
        b_factor = angular_factor(spec.b_harmonics)
        c_factor = angular_factor(spec.c_harmonics)

        perturbation[0, 0] = EPS * profile * a_factor
        for i, coordinate in ((1, THETA), (2, PHI)):
            cross = EPS * profile * RADIUS * sp.diff(c_factor, coordinate)
            perturbation[0, i] = cross
            perturbation[i, 0] = cross
        perturbation[1, 1] = EPS * profile * b_factor * RADIUS ** 2
        perturbation[2, 2] = EPS * profile * b_factor * RADIUS ** 2 * sp.sin(THETA) ** 2
        return perturbation

    if spec.family == FAMILY_GAUGE:
        # pull-back of g_m by (s, x) -> (s + eps w(s) beta(x), x), written so that every term carries eps
        shift = profile * angular_factor(spec.b_harmonics)
        shift_differential = [total_derivative(shift, axis) for axis in range(3)]
        increment = _radius_increment(EPS * shift)
        block_change = increment * (2 * RADIUS + increment)

        for i in range(3):
            for j in range(3):
                value = EPS ** 2 * shift_differential[i] * shift_differential[j]
                if i == 0:
                    value += EPS * shift_differential[j]
                if j == 0:
                    value += EPS * shift_differential[i]
                perturbation[i, j] = value
        perturbation[1, 1] += block_change
        perturbation[2, 2] += block_change * sp.sin(THETA) ** 2
        return perturbation

    raise UnsupportedFamilyException('Unknown perturbation family: ' + repr(spec.family))


class CompiledJets:
    """numpy evaluator of d^0..d^order of a symmetric 3x3 tensor field, one compiled function per field.

    Only the unique components (symmetric pair, sorted derivative multi-index) are compiled."""

    def __init__(self, components, order) -> None:
        self.order = order
        self.slots = []
        expressions = []

        cache = {}
        pairs = [(i, j) for i in range(3) for j in range(i, 3)]
        for level in range(order + 1):
            for derivatives in itertools.combinations_with_replacement(range(3), level):
                for pair in pairs:
                    if level == 0:
                        expression = components[pair[0], pair[1]]
                    else:
                        expression = total_derivative(cache[(derivatives[:-1], pair)], derivatives[-1])
                    cache[(derivatives, pair)] = expression
                    self.slots.append((level, derivatives, pair))
                    expressions.append(expression)

        self._function = sp.lambdify(ARGUMENTS, expressions, modules='numpy', cse=True)

    def evaluate(self, background, s, theta, phi, amplitude):
        s, theta, phi = np.broadcast_arrays(np.asarray(s, dtype=float),
                                            np.asarray(theta, dtype=float),
                                            np.asarray(phi, dtype=float))
        shape = s.shape
        r, p = background.radial_state(s)
        sign = np.where(s >= 0, 1.0, -1.0)

        values = self._function(s, theta, phi, np.abs(s), sign, float(amplitude), background.m, r, p)

        jets = [np.empty(shape + (3,) * level + (3, 3)) for level in range(self.order + 1)]
        for (level, derivatives, (i, j)), value in zip(self.slots, values):
            value = np.broadcast_to(np.asarray(value, dtype=float), shape)
            for permutation in set(itertools.permutations(derivatives)):
                jets[level][(Ellipsis,) + permutation + (i, j)] = value
                jets[level][(Ellipsis,) + permutation + (j, i)] = value
        return jets


_COMPILED = {}
_COMPILED_LOCK = threading.Lock()


def compiled_jets(spec, kind, order):
    """Compiled evaluators are cached per family structure; the amplitude stays a runtime argument"""
    key = (spec.structure_key() if kind != JET_BACKGROUND else None, kind, order)
    with _COMPILED_LOCK:
        compiled = _COMPILED.get(key)
        if compiled is not None:
            return compiled

        if kind == JET_METRIC:
            components = background_components() + perturbation_components(spec)
        elif kind == JET_BACKGROUND:
            components = background_components()
        elif kind == JET_PERTURBATION:
            components = perturbation_components(spec)
        else:
            raise ValueError('Unknown jet kind: ' + kind)

        LOGGER.debug('Compiling %s jets of order %d for %s', kind, order, spec)
        compiled = CompiledJets(components, order)
        _COMPILED[key] = compiled
        return compiled

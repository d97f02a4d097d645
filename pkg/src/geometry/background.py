import logging
import math
from collections import namedtuple

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import BPoly

from config.exceptions import DomainException

LOGGER = logging.getLogger('cmc_foliation.background')

DEFAULT_S_TABLE = 60.0
DEFAULT_S_COLLAR = 0.2
DEFAULT_S_SERIES = 0.05
DEFAULT_TABLE_STEP = 0.01

BackgroundCurvature = namedtuple('BackgroundCurvature', ['ric_normal', 'ric_tangential', 'scalar'])


def horizon_radius(m):
    """Unique positive root of 1 + r^2 - 2m/r, i.e. of the increasing cubic r^3 + r - 2m"""
    if not (m > 0) or not math.isfinite(m):
        raise DomainException('Mass should be positive, but was ' + repr(m))

    def cubic(r):
        return r ** 3 + r - 2.0 * m

    # r0 <= min(2m, (2m)^(1/3)) and r0 = 2m / (1 + r0^2) give a safe bracket
    upper = min(2.0 * m, (2.0 * m) ** (1.0 / 3.0))
    lower = 2.0 * m / (1.0 + upper ** 2)

    root = optimize.brentq(cubic, lower, upper, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)

    for _ in range(2):
        derivative = 3.0 * root ** 2 + 1.0
        root = root - cubic(root) / derivative

    return root


class BackgroundModel:
    """Schwarzschild anti-de Sitter geometry of mass m on [0, inf) x S^2, g_m = ds^2 + r(s)^2 g_0.

    s is the distance to the horizon sphere {r = r0}. The radial profile r(s) solves r'' = r + m/r^2 with
    r(0) = r0, r'(0) = 0; the solution is even in s, which gives the doubled manifold used by the collar."""

    def __init__(self, m, *,
                 s_table=DEFAULT_S_TABLE,
                 s_collar=DEFAULT_S_COLLAR,
                 s_series=DEFAULT_S_SERIES,
                 table_step=DEFAULT_TABLE_STEP) -> None:
        self.m = float(m)
        self.r0 = horizon_radius(self.m)
        self.k = 2.0 * self.r0 + 2.0 * self.m / self.r0 ** 2

        if s_series <= 0:
            raise DomainException('Series cutoff should be > 0, but was ' + repr(s_series))

        self.s_table = float(s_table)
        self.s_collar = float(s_collar)
        self.s_series = float(s_series)

        self._r_poly, self._p_poly = self._tabulate_radial_profile(table_step)
        self.asymptotic_offset = self._compute_asymptotic_offset()

        LOGGER.debug('Background m=%r: r0=%r, k=%r, asymptotic offset=%r',
                     self.m, self.r0, self.k, self.asymptotic_offset)

    def _tabulate_radial_profile(self, table_step):
        m = self.m

        def rhs(_, y):
            r, p = y
            return [p, r + m / r ** 2]

        solution = integrate.solve_ivp(
            rhs, (0.0, self.s_table), [self.r0, 0.0],
            method='DOP853', rtol=1e-13, atol=1e-14, dense_output=True)

        if not solution.success:
            raise DomainException('Radial profile integration failed: ' + solution.message)

        node_count = int(math.ceil(self.s_table / table_step)) + 1
        nodes = np.linspace(0.0, self.s_table, node_count)
        r, p = solution.sol(nodes)
        r[0] = self.r0
        p[0] = 0.0
        acceleration = r + m / r ** 2

        # quintic Hermite pieces: the table carries r, dr/ds and d2r/ds2 exactly
        r_poly = BPoly.from_derivatives(nodes, np.column_stack([r, p, acceleration]))
        return r_poly, r_poly.derivative()

    def _compute_asymptotic_offset(self):
        m = self.m
        anchor = 2.0 * self.r0 + 1.0

        def difference(r):
            hyperbolic = math.sqrt(1.0 + r * r)
            rho = math.sqrt(1.0 + r * r - 2.0 * m / r)
            return (2.0 * m / r) / (rho * hyperbolic * (hyperbolic + rho))

        tail, _ = integrate.quad(difference, anchor, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        return float(self.s_of_r(anchor)) - math.asinh(anchor) + tail

    def rho_squared(self, r):
        r = np.asarray(r, dtype=float)
        # (r - r0) factored out exactly, so the value stays accurate next to the horizon
        return (r - self.r0) * (r + self.r0 + 2.0 * self.m / (r * self.r0))

    def rho(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r0):
            raise DomainException('Radius below the horizon: min r = %r < r0 = %r' % (np.min(r), self.r0))
        return np.sqrt(np.maximum(self.rho_squared(r), 0.0))

    def s_of_r(self, r):
        r_array = np.asarray(r, dtype=float)
        if np.any(r_array < self.r0):
            raise DomainException('s(r) needs r >= r0 = %r, got %r' % (self.r0, np.min(r_array)))

        k = self.k
        r0 = self.r0
        m = self.m

        def speed(tau):
            # r = r0 + k tau^2 / 4 removes the square-root singularity of 1/rho at the horizon
            radius = r0 + k * tau * tau / 4.0
            return math.sqrt(k / (radius + r0 + 2.0 * m / (radius * r0)))

        def single(radius):
            tau_end = 2.0 * math.sqrt((radius - r0) / k)
            if tau_end == 0.0:
                return 0.0
            value, _ = integrate.quad(speed, 0.0, tau_end, epsabs=0.0, epsrel=1e-13, limit=400)
            return value

        result = np.vectorize(single, otypes=[float])(r_array)
        return result if result.ndim else float(result)

    def radial_state(self, s):
        """r(s) and P(s) = dr/ds on [-s_collar, s_table]; r is even and P is odd in s"""
        s_array = np.asarray(s, dtype=float)
        if np.any(s_array < -self.s_collar - 1e-12):
            raise DomainException('s = %r is below the collar (-%r)' % (np.min(s_array), self.s_collar))
        if np.any(s_array > self.s_table):
            raise DomainException('s = %r is beyond the tabulated range %r' % (np.max(s_array), self.s_table))

        distance = np.abs(s_array)
        r = self._r_poly(distance)
        p = np.sign(s_array) * self._p_poly(distance)
        return r, p

    def r_of_s(self, s):
        s_array = np.asarray(s, dtype=float)
        if np.any(s_array < 0):
            raise DomainException('r(s) needs s >= 0, got ' + repr(np.min(s_array)))

        r, _ = self.radial_state(s_array)
        return r if r.ndim else float(r)

    def r_series(self, s):
        s = np.asarray(s, dtype=float)
        quartic = (1.0 - 2.0 * self.m / self.r0 ** 3) * self.k / 48.0
        return self.r0 + self.k * s ** 2 / 4.0 + quartic * s ** 4

    def hyperbolic_distance(self, s):
        """Coordinate in which r = sinh(.)(1 + O(e^-3s)); differs from s by the asymptotic offset"""
        return np.asarray(s, dtype=float) - self.asymptotic_offset

    def coordinate_mean_curvature(self, r):
        r_array = np.asarray(r, dtype=float)
        result = 2.0 * self.rho(r_array) / r_array
        return result if result.ndim else float(result)

    def mean_curvature_of_s(self, s):
        r, p = self.radial_state(s)
        result = 2.0 * p / r
        return result if np.ndim(result) else float(result)

    def boundary_mean_curvature_slope(self):
        return (6.0 * self.m / self.r0 - 2.0) / self.r0 ** 2

    def mean_curvature_expansion_residual(self, s):
        """(H_m(s) - 2 coth s_hat + 2m / sinh^3 s_hat) sinh^5 s_hat; tends to m/3.

        Round-off is amplified by sinh^5, so values beyond s = 5 carry no information."""
        s_array = np.asarray(s, dtype=float)
        if np.any(s_array <= 0):
            raise DomainException('Expansion residual is defined for s > 0, got ' + repr(np.min(s_array)))

        hyperbolic = self.hyperbolic_distance(s_array)
        sinh = np.sinh(hyperbolic)
        leading = 2.0 / np.tanh(hyperbolic) - 2.0 * self.m / sinh ** 3
        result = (self.mean_curvature_of_s(s_array) - leading) * sinh ** 5
        return result if result.ndim else float(result)

    def background_curvature(self, s):
        s_array = np.asarray(s, dtype=float)
        if np.any(s_array < 0):
            raise DomainException('Curvature is evaluated for s >= 0, got ' + repr(np.min(s_array)))

        r = np.asarray(self.r_of_s(s_array))
        mass_term = self.m / r ** 3
        return BackgroundCurvature(ric_normal=-2.0 - 2.0 * mass_term,
                                   ric_tangential=-2.0 + mass_term,
                                   scalar=np.full_like(r, -6.0))

    def jacobi_spectrum(self, r, l):
        if r < self.r0:
            raise DomainException('Jacobi spectrum needs r >= r0, got ' + repr(r))
        if l < 0:
            raise DomainException('Degree should be >= 0, got ' + repr(l))

        return (-l * (l + 1) + 2.0 - 6.0 * self.m / r) / r ** 2

    def v_profile(self, s):
        s_array = np.asarray(s, dtype=float)
        if np.any(s_array <= 0):
            raise DomainException('v_m is defined for s > 0, got ' + repr(np.min(s_array)))

        r = np.asarray(self.r_of_s(s_array))
        result = (r / np.sinh(self.hyperbolic_distance(s_array))) ** 2
        return result if result.ndim else float(result)

    def sphere_hawking_mass(self, r):
        h = self.coordinate_mean_curvature(r)
        return (r / 2.0) * (1.0 - (r ** 2 / 4.0) * (h ** 2 - 4.0))

    def __repr__(self) -> str:
        return 'BackgroundModel(m=%r, r0=%r)' % (self.m, self.r0)

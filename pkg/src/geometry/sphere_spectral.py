import logging
import math

import numpy as np

from config.exceptions import DomainException

LOGGER = logging.getLogger('cmc_foliation.sphere_spectral')

DEFAULT_DEGREE = 15


def harmonic_index(l, k):
    """Position of the real harmonic Y_{l,k} (-l <= k <= l) in a coefficient vector"""
    if abs(k) > l:
        raise DomainException('Harmonic order %r exceeds degree %r' % (k, l))
    return l * l + l + k


def harmonic_degrees(degree):
    """(l, k) pairs in coefficient order"""
    return [(l, k) for l in range(degree + 1) for k in range(-l, l + 1)]


def normalized_legendre(degree, theta):
    """Associated Legendre functions of cos(theta), without the Condon-Shortley phase,
    normalized so that the real harmonics built from them have unit L2 norm on S^2.

    Returns arrays p, dp, d2p, d3p of shape (degree+1, degree+1, n): theta derivatives up to third order.
    """
    theta = np.asarray(theta, dtype=float)
    cos = np.cos(theta)
    sin = np.sin(theta)
    n = theta.shape[0]

    p = np.zeros((degree + 1, degree + 1, n))
    p[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for k in range(1, degree + 1):
        p[k, k] = math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin * p[k - 1, k - 1]
    for k in range(0, degree):
        p[k + 1, k] = math.sqrt(2.0 * k + 3.0) * cos * p[k, k]
    for k in range(0, degree + 1):
        for l in range(k + 2, degree + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - k * k))
            b = math.sqrt(((l - 1.0) ** 2 - k * k) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, k] = a * (cos * p[l - 1, k] - b * p[l - 2, k])

    dp = np.zeros_like(p)
    for l in range(1, degree + 1):
        for k in range(0, l + 1):
            lower = p[l - 1, k] if k <= l - 1 else 0.0
            factor = math.sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (l * l - k * k))
            dp[l, k] = (l * cos * p[l, k] - factor * lower) / sin

    # higher derivatives from the associated Legendre equation
    cot = cos / sin
    inv_sin2 = 1.0 / sin ** 2
    d2p = np.zeros_like(p)
    d3p = np.zeros_like(p)
    for l in range(0, degree + 1):
        eigen = l * (l + 1.0)
        for k in range(0, l + 1):
            potential = eigen - k * k * inv_sin2
            d2p[l, k] = -cot * dp[l, k] - potential * p[l, k]
            d3p[l, k] = (-cot * d2p[l, k] + inv_sin2 * dp[l, k] - potential * dp[l, k]
                         - 2.0 * k * k * cos * inv_sin2 / sin * p[l, k])

    return p, dp, d2p, d3p


class SphereGrid:
    """Gauss-Legendre colatitudes times equispaced longitudes, with real harmonic transforms.

    Points are stored flat (theta-major). The quadrature is exact for band-limited integrands up to
    degree 2L, which makes analyze/synthesize exact inverses on band-limited fields."""

    def __init__(self, degree=DEFAULT_DEGREE, theta_nodes=None, phi_nodes=None) -> None:
        if degree < 1:
            raise DomainException('Harmonic degree should be >= 1, but was ' + repr(degree))

        if theta_nodes is None:
            theta_nodes = int(math.ceil(1.5 * degree)) + 1
        if phi_nodes is None:
            phi_nodes = 2 * theta_nodes

        if theta_nodes < degree + 1:
            raise DomainException('Need at least %d colatitude nodes for degree %d' % (degree + 1, degree))
        if phi_nodes < 2 * degree + 1:
            raise DomainException('Need at least %d longitude nodes for degree %d' % (2 * degree + 1, degree))

        self.degree = degree
        self.theta_nodes = theta_nodes
        self.phi_nodes = phi_nodes
        self.size = (degree + 1) ** 2

        x, gauss_weights = np.polynomial.legendre.leggauss(theta_nodes)
        order = np.argsort(-x)
        theta_1d = np.arccos(x[order])
        phi_1d = 2.0 * math.pi * np.arange(phi_nodes) / phi_nodes

        self.theta = np.repeat(theta_1d, phi_nodes)
        self.phi = np.tile(phi_1d, theta_nodes)
        self.weights = np.repeat(gauss_weights[order], phi_nodes) * (2.0 * math.pi / phi_nodes)
        self.sin_theta = np.sin(self.theta)
        self.point_count = self.theta.shape[0]

        self.degrees = harmonic_degrees(degree)
        self.l_values = np.array([l for l, _ in self.degrees])
        self.eigenvalues = -self.l_values * (self.l_values + 1.0)

        self._build_basis(theta_1d)

    def _build_basis(self, theta_1d):
        p_tables = normalized_legendre(self.degree, theta_1d)
        # (theta order, phi order) -> matrix of shape (points, harmonics)
        derivatives = {}
        for theta_order in range(4):
            for phi_order in range(4 - theta_order):
                derivatives[(theta_order, phi_order)] = np.empty((self.point_count, self.size))

        for index, (l, k) in enumerate(self.degrees):
            order = abs(k)
            scale = 1.0 if k == 0 else math.sqrt(2.0)
            for theta_order in range(4):
                legendre = np.repeat(p_tables[theta_order][l, order], self.phi_nodes)
                for phi_order in range(4 - theta_order):
                    angular = _trig_derivative(k, self.phi, phi_order)
                    derivatives[(theta_order, phi_order)][:, index] = scale * legendre * angular

        self.basis = derivatives[(0, 0)]
        self._d1 = np.stack([derivatives[(1, 0)], derivatives[(0, 1)]])
        self._d2 = np.empty((2, 2, self.point_count, self.size))
        self._d3 = np.empty((2, 2, 2, self.point_count, self.size))
        for i in range(2):
            for j in range(2):
                self._d2[i, j] = derivatives[(2 - i - j, i + j)]
                for l in range(2):
                    self._d3[i, j, l] = derivatives[(3 - i - j - l, i + j + l)]

    def analyze(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.point_count:
            raise ValueError('Expected %d grid values, got %d' % (self.point_count, values.shape[-1]))
        return (values * self.weights) @ self.basis

    def synthesize(self, coefficients):
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape[-1] != self.size:
            raise ValueError('Expected %d coefficients, got %d' % (self.size, coefficients.shape[-1]))
        return coefficients @ self.basis.T

    def coordinate_jets(self, coefficients, order=2):
        """Values and coordinate (theta, phi) derivatives of band-limited fields up to `order` (<= 3).

        For coefficients of shape (..., K) returns [u (..., P), du (..., P, 2), d2u (..., P, 2, 2), ...]."""
        coefficients = np.asarray(coefficients, dtype=float)
        jets = [coefficients @ self.basis.T]
        if order >= 1:
            jets.append(np.einsum('...k,ipk->...pi', coefficients, self._d1))
        if order >= 2:
            jets.append(np.einsum('...k,ijpk->...pij', coefficients, self._d2))
        if order >= 3:
            jets.append(np.einsum('...k,ijlpk->...pijl', coefficients, self._d3))
        return jets

    def integrate(self, values, weight=None):
        values = np.asarray(values, dtype=float)
        if weight is not None:
            values = values * weight
        return values @ self.weights

    def mean(self, values):
        return self.integrate(values) / (4.0 * math.pi)

    def field(self, values):
        return SphereField(self, values=values)

    def field_from_coefficients(self, coefficients):
        return SphereField(self, coefficients=coefficients)

    def zero_field(self):
        return SphereField(self, coefficients=np.zeros(self.size))

    def harmonic(self, l, k, weight=1.0):
        coefficients = np.zeros(self.size)
        coefficients[harmonic_index(l, k)] = weight
        return SphereField(self, coefficients=coefficients)

    def random_field(self, rng, degree=None, scale=1.0):
        degree = self.degree if degree is None else degree
        coefficients = np.zeros(self.size)
        active = self.l_values <= degree
        coefficients[active] = scale * rng.standard_normal(np.count_nonzero(active))
        return SphereField(self, coefficients=coefficients)

    def __repr__(self) -> str:
        return 'SphereGrid(L=%d, %dx%d)' % (self.degree, self.theta_nodes, self.phi_nodes)


def _trig_derivative(k, phi, order):
    """order-th derivative of cos(k phi) (k >= 0) or sin(|k| phi) (k < 0)"""
    if k == 0:
        return np.ones_like(phi) if order == 0 else np.zeros_like(phi)

    n = abs(k)
    # d/dphi rotates the (cos, sin) pair by a quarter turn and scales by n
    shift = order * math.pi / 2.0
    if k > 0:
        return n ** order * np.cos(n * phi + shift)
    return n ** order * np.sin(n * phi + shift)


class SphereField:
    """Scalar function on S^2, held as grid samples and real harmonic coefficients (kept lazily in sync)"""

    def __init__(self, grid, values=None, coefficients=None) -> None:
        if (values is None) == (coefficients is None):
            raise ValueError('Exactly one of values or coefficients should be given')

        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coefficients = None if coefficients is None else np.asarray(coefficients, dtype=float)

        if self._values is not None and self._values.shape != (grid.point_count,):
            raise ValueError('Expected %d values, got shape %s' % (grid.point_count, self._values.shape))
        if self._coefficients is not None and self._coefficients.shape != (grid.size,):
            raise ValueError('Expected %d coefficients, got shape %s' % (grid.size, self._coefficients.shape))

    @property
    def values(self):
        if self._values is None:
            self._values = self.grid.synthesize(self._coefficients)
        return self._values

    @property
    def coefficients(self):
        if self._coefficients is None:
            self._coefficients = self.grid.analyze(self._values)
        return self._coefficients

    def mean_free(self):
        coefficients = self.coefficients.copy()
        coefficients[0] = 0.0
        return SphereField(self.grid, coefficients=coefficients)

    def mean(self):
        return self.grid.mean(self.values)

    def integrate(self, weight=None):
        weight_values = weight.values if isinstance(weight, SphereField) else weight
        return self.grid.integrate(self.values, weight_values)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def laplace0(self):
        return SphereField(self.grid, coefficients=self.coefficients * self.grid.eigenvalues)

    def grad0(self):
        """Components of the round gradient in the orthonormal frame (e_theta, e_phi), shape (P, 2)"""
        _, du = self.grid.coordinate_jets(self.coefficients, order=1)
        return np.stack([du[:, 0], du[:, 1] / self.grid.sin_theta], axis=-1)

    def hessian0(self):
        """Round covariant Hessian in the orthonormal frame (e_theta, e_phi), shape (P, 2, 2)"""
        _, du, d2u = self.grid.coordinate_jets(self.coefficients, order=2)
        sin = self.grid.sin_theta
        cos = np.cos(self.grid.theta)
        result = np.empty((self.grid.point_count, 2, 2))
        result[:, 0, 0] = d2u[:, 0, 0]
        result[:, 0, 1] = (d2u[:, 0, 1] - cos / sin * du[:, 1]) / sin
        result[:, 1, 0] = result[:, 0, 1]
        result[:, 1, 1] = (d2u[:, 1, 1] + sin * cos * du[:, 0]) / sin ** 2
        return result

    def __add__(self, other):
        if isinstance(other, SphereField):
            return SphereField(self.grid, coefficients=self.coefficients + other.coefficients)
        return SphereField(self.grid, values=self.values + other)

    def __sub__(self, other):
        if isinstance(other, SphereField):
            return SphereField(self.grid, coefficients=self.coefficients - other.coefficients)
        return SphereField(self.grid, values=self.values - other)

    def __mul__(self, scalar):
        return SphereField(self.grid, coefficients=self.coefficients * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return 'SphereField(sup=%.3e)' % self.sup_norm()

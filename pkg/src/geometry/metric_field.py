import logging
import math

import numpy as np

from concurrency import worker_pool
from config.exceptions import UnsupportedFamilyException, DomainException
from geometry import perturbations, tensor_calculus
from geometry.perturbations import FAMILY_NONE, PROFILE_POWER_EXP, JET_METRIC, JET_BACKGROUND, JET_PERTURBATION

LOGGER = logging.getLogger('cmc_foliation.metric_field')

DEFAULT_B_HARMONICS = ((2, 0, 1.0),)
DEFAULT_PROFILE_POWER = 2.0
DEFAULT_PROFILE_RATE = 4.0

DEFAULT_DECAY_S_MAX = 8.0
DECAY_WEIGHT = 4.0

_PROBE_S = np.linspace(-0.2, 12.0, 62)
_PROBE_ANGLES = 9
_CHUNK_SIZE = 4096


def _normalize_harmonics(harmonics, name):
    result = []
    for entry in harmonics:
        if len(entry) != 3:
            raise DomainException('%s entries should be (l, k, weight), got %r' % (name, entry))
        l, k, weight = int(entry[0]), int(entry[1]), float(entry[2])
        if l < 0 or abs(k) > l:
            raise DomainException('%s: invalid harmonic degree (l=%d, k=%d)' % (name, l, k))
        if not math.isfinite(weight):
            raise DomainException('%s: weight should be finite, got %r' % (name, weight))
        result.append((l, k, weight))
    return tuple(result)


class PerturbationSpec:
    def __init__(self,
                 family=FAMILY_NONE,
                 amplitude=0.0,
                 a_harmonics=(),
                 b_harmonics=DEFAULT_B_HARMONICS,
                 c_harmonics=(),
                 profile_kind=PROFILE_POWER_EXP,
                 profile_power=DEFAULT_PROFILE_POWER,
                 profile_rate=DEFAULT_PROFILE_RATE) -> None:

        if family not in perturbations.FAMILIES:
            raise UnsupportedFamilyException('Unknown perturbation family: ' + repr(family))
        if profile_kind not in perturbations.PROFILES:
            raise UnsupportedFamilyException('Unknown radial profile: ' + repr(profile_kind))
        if not math.isfinite(amplitude):
            raise DomainException('Amplitude should be finite, got ' + repr(amplitude))
        if profile_power < 0:
            raise DomainException('Profile power should be >= 0, got ' + repr(profile_power))

        self.family = family
        self.amplitude = float(amplitude)
        self.a_harmonics = _normalize_harmonics(a_harmonics, 'a_harmonics')
        self.b_harmonics = _normalize_harmonics(b_harmonics, 'b_harmonics')
        self.c_harmonics = _normalize_harmonics(c_harmonics, 'c_harmonics')
        self.profile_kind = profile_kind
        self.profile_power = float(profile_power)
        self.profile_rate = float(profile_rate)

    @staticmethod
    def background():
        return PerturbationSpec(family=FAMILY_NONE)

    @property
    def is_trivial(self):
        return self.family == FAMILY_NONE or self.amplitude == 0.0

    def structure_key(self):
        if self.family == FAMILY_NONE:
            return (FAMILY_NONE,)
        return (self.family, self.a_harmonics, self.b_harmonics, self.c_harmonics,
                self.profile_kind, self.profile_power, self.profile_rate)

    def profile_boundary_values(self):
        if self.family == FAMILY_NONE:
            return 0.0, 0.0
        return perturbations.profile_boundary_values(self.profile_kind, self.profile_power, self.profile_rate)

    def preserves_boundary(self):
        """w(0) = w'(0) = 0, i.e. the boundary stays a minimal sphere"""
        value, slope = self.profile_boundary_values()
        return value == 0.0 and slope == 0.0

    def with_amplitude(self, amplitude):
        return PerturbationSpec(self.family, amplitude,
                                self.a_harmonics, self.b_harmonics, self.c_harmonics,
                                self.profile_kind, self.profile_power, self.profile_rate)

    def describe(self):
        return {
            'family': self.family,
            'amplitude': self.amplitude,
            'a_harmonics': [list(h) for h in self.a_harmonics],
            'b_harmonics': [list(h) for h in self.b_harmonics],
            'c_harmonics': [list(h) for h in self.c_harmonics],
            'profile': {'kind': self.profile_kind, 'power': self.profile_power, 'rate': self.profile_rate}
        }

    def __repr__(self) -> str:
        if self.family == FAMILY_NONE:
            return 'PerturbationSpec(none)'
        return 'PerturbationSpec(%s, eps=%r, b=%r, %s p=%r rate=%r)' % (
            self.family, self.amplitude, self.b_harmonics, self.profile_kind, self.profile_power, self.profile_rate)


class MetricField:
    """Common curvature evaluation for metrics given by their coordinate jets in (s, theta, phi)"""

    analytic = False

    def __init__(self, model) -> None:
        self.model = model

    def metric_jets(self, s, theta, phi, order=2):
        raise NotImplementedError()

    def metric_at(self, s, theta, phi):
        """(g, dg, d2g) at the given points; raises DegenerateMetricException where g is not SPD"""
        jets = self.metric_jets(s, theta, phi, order=2)
        tensor_calculus.check_positive_definite(jets[0])
        return tuple(jets)

    def christoffel(self, s, theta, phi):
        g, dg = self.metric_jets(s, theta, phi, order=1)
        return tensor_calculus.christoffel(tensor_calculus.inverse(g), dg)

    def curvature(self, s, theta, phi):
        return tensor_calculus.curvature(*self.metric_jets(s, theta, phi, order=2))

    def ricci(self, s, theta, phi):
        return self.curvature(s, theta, phi)[2]

    def scalar_curvature(self, s, theta, phi):
        return self.curvature(s, theta, phi)[3]

    def _check_probe(self):
        s, theta, phi = _probe_mesh()
        g = self.metric_jets(s, theta, phi, order=0)[0]
        smallest = tensor_calculus.check_positive_definite(g, 'Metric on the probe grid')
        LOGGER.debug('Probe grid smallest metric eigenvalue: %r', smallest)


class PerturbedMetric(MetricField):
    """g = g_m + h for a built-in closed-form family; amplitude 0 gives g_m"""

    analytic = True

    def __init__(self, model, spec=None, *, check=True) -> None:
        super().__init__(model)
        self.spec = PerturbationSpec.background() if spec is None else spec
        if check:
            self._check_probe()

    @property
    def amplitude(self):
        return self.spec.amplitude

    def _evaluate(self, kind, s, theta, phi, order):
        if order < 0 or order > 3:
            raise DomainException('Jet order should be in [0, 3], got ' + repr(order))
        compiled = perturbations.compiled_jets(self.spec, kind, 2 if order <= 2 else 3)
        return compiled.evaluate(self.model, s, theta, phi, self.spec.amplitude)[:order + 1]

    def metric_jets(self, s, theta, phi, order=2):
        kind = JET_BACKGROUND if self.spec.family == FAMILY_NONE else JET_METRIC
        return self._evaluate(kind, s, theta, phi, order)

    def background_jets(self, s, theta, phi, order=3):
        return self._evaluate(JET_BACKGROUND, s, theta, phi, order)

    def perturbation_jets(self, s, theta, phi, order=3):
        if self.spec.family == FAMILY_NONE:
            shape = np.broadcast(np.asarray(s), np.asarray(theta), np.asarray(phi)).shape
            return [np.zeros(shape + (3,) * level + (3, 3)) for level in range(order + 1)]
        return self._evaluate(JET_PERTURBATION, s, theta, phi, order)

    def with_amplitude(self, amplitude):
        return PerturbedMetric(self.model, self.spec.with_amplitude(amplitude), check=False)

    def __repr__(self) -> str:
        return 'PerturbedMetric(m=%r, %r)' % (self.model.m, self.spec)


def _probe_mesh():
    theta = np.linspace(0.05, math.pi - 0.05, _PROBE_ANGLES)
    phi = np.linspace(0.0, 2.0 * math.pi, _PROBE_ANGLES, endpoint=False)
    return [axis.ravel() for axis in np.meshgrid(_PROBE_S, theta, phi, indexing='ij')]


def probe_points(seed, count, s_range=(0.0, 8.0)):
    """Reproducible sample points, uniform in s and uniform on the sphere"""
    if count <= 0:
        raise DomainException('Probe count should be > 0, got ' + repr(count))
    rng = np.random.default_rng(seed)
    s = rng.uniform(s_range[0], s_range[1], count)
    theta = np.arccos(rng.uniform(-1.0, 1.0, count))
    phi = rng.uniform(0.0, 2.0 * math.pi, count)
    return s, theta, phi


def scalar_curvature_floor(metric, points):
    """min(R + 6) over the given points"""
    s, theta, phi = points
    return float(np.min(metric.scalar_curvature(s, theta, phi) + 6.0))


def _decay_chunk(metric, points):
    s, theta, phi = points
    h_jet = metric.perturbation_jets(s, theta, phi, order=3)
    background_jet = metric.background_jets(s, theta, phi, order=3)
    gamma_jet = tensor_calculus.christoffel_jet(background_jet)
    g_inv = tensor_calculus.inverse(background_jet[0])

    total = tensor_calculus.tensor_norm(h_jet[0], g_inv)
    current = h_jet
    for _ in range(3):
        current = tensor_calculus.covariant_derivative_jet(current, gamma_jet)
        total = total + tensor_calculus.tensor_norm(current[0], g_inv)

    return float(np.max(np.exp(DECAY_WEIGHT * s) * total))


def decay_distance(metric, s_max=DEFAULT_DECAY_S_MAX, s_nodes=None, angular_nodes=8):
    """sup of e^{4s} (|h| + |D h| + |D^2 h| + |D^3 h|), h = g - g_m, norms and D taken in g_m"""
    if not metric.analytic:
        raise UnsupportedFamilyException('Decay distance needs third derivatives of a built-in family')
    if metric.spec.is_trivial:
        return 0.0

    if s_nodes is None:
        s_nodes = int(round(s_max * 10)) + 1
    s_axis = np.linspace(0.0, s_max, s_nodes)
    nodes, _ = np.polynomial.legendre.leggauss(angular_nodes)
    theta_axis = np.arccos(nodes)
    phi_axis = np.linspace(0.0, 2.0 * math.pi, 2 * angular_nodes, endpoint=False)
    s, theta, phi = [axis.ravel() for axis in np.meshgrid(s_axis, theta_axis, phi_axis, indexing='ij')]

    chunks = list(zip(worker_pool.chunked(s, _CHUNK_SIZE),
                      worker_pool.chunked(theta, _CHUNK_SIZE),
                      worker_pool.chunked(phi, _CHUNK_SIZE)))
    maxima = worker_pool.map_ordered(lambda chunk: _decay_chunk(metric, chunk), chunks)
    return max(maxima)


def bianchi_residual(metric, points):
    s, theta, phi = points
    jets = metric.metric_jets(s, theta, phi, order=3)
    return float(np.max(tensor_calculus.bianchi_residual(jets)))


def boundary_minimality_check(metric, grid):
    """sup |H| of the boundary sphere {s = 0}"""
    from geometry import graph_geometry

    h = graph_geometry.mean_curvature(0.0, grid.zero_field(), metric)
    return h.sup_norm()

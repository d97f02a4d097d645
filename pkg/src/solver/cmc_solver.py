"""Newton solvers for constant mean curvature graphs over coordinate spheres.

Unknowns are the real harmonic coefficients of the graph function u. The free solve works on the zero-mean
subspace and drives the non-constant part of H to zero; the prescribed solve works on the full space and
drives H to a given constant. Residuals are Galerkin projections of the nodal mean curvature.
"""
import logging
import math
from collections import namedtuple

import numpy as np
from scipy import linalg

from concurrency import worker_pool
from config.exceptions import DivergenceException, LinearSolveException, ResonanceException, DomainException, \
    GeometryException
from geometry import graph_geometry
from geometry.graph_geometry import GraphSurface

LOGGER = logging.getLogger('cmc_foliation.cmc_solver')

MODE_FREE = 'free'
MODE_PRESCRIBED = 'prescribed'

RESONANCE_GUARD = 0.1
BOUNDARY_MINIMALITY_TOLERANCE = 1e-9

_SQRT_4PI = math.sqrt(4.0 * math.pi)
_JACOBIAN_CHUNK = 32

JacobiForms = namedtuple('JacobiForms', ['quadratic', 'mass'])


class SolveSettings:
    def __init__(self,
                 tolerance=1e-10,
                 max_iterations=12,
                 fd_step=1e-6,
                 max_halvings=5,
                 homotopy_stages=4,
                 workers=None) -> None:

        if not (tolerance > 0):
            raise DomainException('Tolerance should be > 0, but was ' + repr(tolerance))
        if max_iterations < 1:
            raise DomainException('Max iterations should be >= 1, but was ' + repr(max_iterations))
        if not (fd_step > 0):
            raise DomainException('Finite-difference step should be > 0, but was ' + repr(fd_step))
        if max_halvings < 0:
            raise DomainException('Max halvings should be >= 0, but was ' + repr(max_halvings))
        if homotopy_stages < 1:
            raise DomainException('Homotopy stages should be >= 1, but was ' + repr(homotopy_stages))

        self.tolerance = float(tolerance)
        self.max_iterations = int(max_iterations)
        self.fd_step = float(fd_step)
        self.max_halvings = int(max_halvings)
        self.homotopy_stages = int(homotopy_stages)
        self.workers = workers


class CmcSolution:
    def __init__(self, surface, h_const, residual_history, converged, iterations, mode,
                 unresolved_residual=0.0, target=None) -> None:
        self.surface = surface
        self.h_const = h_const
        self.residual_history = residual_history
        self.converged = converged
        self.iterations = iterations
        self.mode = mode
        self.unresolved_residual = unresolved_residual
        self.target = target
        self._stability_eigenvalue = None
        self._geometry = None

    @property
    def u(self):
        return self.surface.u

    @property
    def s(self):
        return self.surface.s_base

    @property
    def geometry(self):
        if self._geometry is None:
            self._geometry = graph_geometry.compute_geometry(self.surface)
        return self._geometry

    @property
    def stability_eigenvalue(self):
        if self._stability_eigenvalue is None:
            self._stability_eigenvalue = stability_eigenvalue(self)
        return self._stability_eigenvalue

    def __repr__(self) -> str:
        return 'CmcSolution(%s, s=%r, H=%r, iterations=%d, residual=%.3e)' % (
            self.mode, self.s, self.h_const, self.iterations, self.residual_history[-1])


class _Residual:
    """Galerkin residual of one solve mode as a function of the free coefficients"""

    def __init__(self, s, metric, grid, mode, target, settings) -> None:
        self.s = s
        self.metric = metric
        self.grid = grid
        self.mode = mode
        self.target = target
        self.settings = settings
        self.offset = 1 if mode == MODE_FREE else 0

    def full_coefficients(self, unknowns):
        unknowns = np.asarray(unknowns, dtype=float)
        if self.offset == 0:
            return unknowns
        shape = unknowns.shape[:-1] + (self.grid.size,)
        coefficients = np.zeros(shape)
        coefficients[..., 1:] = unknowns
        return coefficients

    def unknowns(self, coefficients):
        return np.asarray(coefficients, dtype=float)[..., self.offset:]

    def project(self, h_values):
        projected = self.grid.analyze(h_values)
        if self.mode == MODE_PRESCRIBED:
            projected = projected.copy()
            projected[..., 0] -= self.target * _SQRT_4PI
        return projected[..., self.offset:]

    def evaluate(self, unknowns):
        h_values = graph_geometry.mean_curvature_batch(self.s, self.full_coefficients(unknowns),
                                                       self.grid, self.metric)
        return self.project(h_values), h_values

    def sup_norm(self, residual):
        return float(np.max(np.abs(self.grid.synthesize(self.full_coefficients(residual)))))

    def jacobian(self, unknowns, base_residual):
        count = unknowns.shape[-1]
        step = self.settings.fd_step * max(1.0, float(np.max(np.abs(unknowns), initial=0.0)))
        directions = unknowns[None, :] + step * np.eye(count)

        def columns(chunk):
            residual, _ = self.evaluate(chunk)
            return (residual - base_residual[None, :]) / step

        blocks = worker_pool.map_ordered(columns, worker_pool.chunked(directions, _JACOBIAN_CHUNK),
                                         self.settings.workers)
        return np.concatenate(blocks, axis=0).T


def _factorize(matrix):
    lu, pivots = linalg.lu_factor(matrix, check_finite=True)
    diagonal = np.abs(np.diag(lu))
    if diagonal.size and (np.min(diagonal) <= 1e-14 * np.max(diagonal) or not np.all(np.isfinite(diagonal))):
        raise LinearSolveException('Jacobian is numerically singular (pivot ratio %.3e)'
                                   % (np.min(diagonal) / max(np.max(diagonal), 1e-300)))
    return lu, pivots


def _newton(residual, u0, settings):
    unknowns = residual.unknowns(u0.coefficients).copy()
    current, h_values = residual.evaluate(unknowns)
    norm = residual.sup_norm(current)
    history = [norm]
    iterations = 0

    while norm > settings.tolerance:
        if iterations >= settings.max_iterations:
            raise DivergenceException('Newton did not converge in %d iterations at s=%r (residual %.3e)'
                                      % (settings.max_iterations, residual.s, norm),
                                      residual_history=history)

        factors = _factorize(residual.jacobian(unknowns, current))
        step = linalg.lu_solve(factors, -current)

        scale = 1.0
        for halving in range(settings.max_halvings + 1):
            trial = unknowns + scale * step
            try:
                trial_residual, trial_h = residual.evaluate(trial)
                trial_norm = residual.sup_norm(trial_residual)
            except GeometryException as e:
                LOGGER.debug('Newton trial left the chart at s=%r: %s', residual.s, e)
                trial_norm = math.inf

            if trial_norm < norm or trial_norm <= settings.tolerance:
                break
            if halving == settings.max_halvings:
                raise DivergenceException('Damping failed at s=%r after %d halvings (residual %.3e)'
                                          % (residual.s, settings.max_halvings, norm),
                                          residual_history=history)
            scale *= 0.5
            LOGGER.debug('Damping Newton step at s=%r: scale %r', residual.s, scale)

        unknowns, current, h_values, norm = trial, trial_residual, trial_h, trial_norm
        history.append(norm)
        iterations += 1

    LOGGER.debug('Newton %s at s=%r: residuals %s', residual.mode, residual.s,
                 ', '.join('%.2e' % value for value in history))

    coefficients = residual.full_coefficients(unknowns)
    resolved = residual.grid.synthesize(residual.grid.analyze(h_values))
    unresolved = float(np.max(np.abs(h_values - resolved)))
    return coefficients, h_values, history, iterations, unresolved


def solve_free_cmc(s, metric, u0=None, settings=None, grid=None):
    """Zero-mean graph over S_s with constant mean curvature; H_const is the mean of H"""
    settings = settings or SolveSettings()
    if s < 0:
        raise DomainException('Free solve needs s >= 0, got ' + repr(s))
    grid = _grid_of(u0, grid)
    if u0 is None:
        u0 = grid.zero_field()

    if s == 0:
        boundary_h = graph_geometry.mean_curvature(0.0, grid.zero_field(), metric)
        if boundary_h.sup_norm() <= BOUNDARY_MINIMALITY_TOLERANCE:
            surface = GraphSurface(0.0, grid.zero_field(), metric)
            return CmcSolution(surface, boundary_h.mean(), [boundary_h.sup_norm()], True, 0, MODE_FREE)

    residual = _Residual(s, metric, grid, MODE_FREE, None, settings)
    coefficients, h_values, history, iterations, unresolved = _newton(residual, u0.mean_free(), settings)

    surface = GraphSurface(s, grid.field_from_coefficients(coefficients), metric)
    h_const = float(grid.mean(h_values))
    return CmcSolution(surface, h_const, history, True, iterations, MODE_FREE, unresolved)


def resonance_check(model, s):
    r = model.r_of_s(s)
    if abs(r - 3.0 * model.m) < RESONANCE_GUARD * 3.0 * model.m:
        raise ResonanceException('Prescribed solve at r=%r is too close to the resonance r=3m=%r'
                                 % (r, 3.0 * model.m))


def solve_prescribed_cmc(s, metric, settings=None, target=None, u0=None, grid=None):
    """Graph over S_s with mean curvature equal to target (default H_m(s))"""
    settings = settings or SolveSettings()
    if s < 0:
        raise DomainException('Prescribed solve needs s >= 0, got ' + repr(s))
    model = metric.model
    resonance_check(model, s)

    if target is None:
        target = model.mean_curvature_of_s(s)

    grid = _grid_of(u0, grid)
    if u0 is None:
        u0 = grid.zero_field()

    residual = _Residual(s, metric, grid, MODE_PRESCRIBED, float(target), settings)
    coefficients, _, history, iterations, unresolved = _newton(residual, u0, settings)

    surface = GraphSurface(s, grid.field_from_coefficients(coefficients), metric)
    return CmcSolution(surface, float(target), history, True, iterations, MODE_PRESCRIBED, unresolved,
                       target=float(target))


def solve_with_homotopy(s, metric, u0=None, settings=None, grid=None):
    """Free solve; on divergence, walks the amplitude from 0 to its value in equal stages"""
    settings = settings or SolveSettings()
    try:
        return solve_free_cmc(s, metric, u0, settings, grid)
    except (DivergenceException, LinearSolveException) as e:
        if not hasattr(metric, 'with_amplitude') or metric.amplitude == 0:
            raise
        LOGGER.info('Direct solve failed at s=%r (%s), continuing in amplitude', s, e)

    solution = None
    guess = u0
    for stage in range(1, settings.homotopy_stages + 1):
        fraction = stage / settings.homotopy_stages
        staged_metric = metric if stage == settings.homotopy_stages else metric.with_amplitude(
            fraction * metric.amplitude)
        solution = solve_free_cmc(s, staged_metric, guess, settings, grid)
        guess = solution.u
    return solution


def mean_curvature_jacobian(s, metric, u, settings=None):
    """Finite-difference matrix of d(analyze H)/d(coefficients) at S_s(u), shape (K, K)"""
    settings = settings or SolveSettings()
    residual = _Residual(s, metric, u.grid, MODE_PRESCRIBED, 0.0, settings)
    unknowns = u.coefficients.copy()
    base, _ = residual.evaluate(unknowns)
    return residual.jacobian(unknowns, base)


def jacobi_matrix(solution):
    """Quadratic form of -L and the mass matrix on harmonic fields j >= 1 made dSigma-mean free"""
    geometry = solution.geometry
    grid = geometry.grid
    weight = grid.weights * geometry.area_weight.values

    basis = np.eye(grid.size)[1:]
    values, gradients = grid.coordinate_jets(basis, order=1)
    means = values @ weight / geometry.area
    values = values - means[:, None]

    potential = geometry.ricci_normal.values + geometry.a_sq.values
    dirichlet = np.einsum('jpa,pab,kpb,p->jk', gradients, geometry.induced_inverse, gradients, weight)
    quadratic = dirichlet - np.einsum('jp,p,kp->jk', values, potential * weight, values)
    mass = np.einsum('jp,p,kp->jk', values, weight, values)
    return JacobiForms(0.5 * (quadratic + quadratic.T), 0.5 * (mass + mass.T))


def stability_eigenvalue(solution):
    forms = jacobi_matrix(solution)
    try:
        eigenvalues = linalg.eigh(forms.quadratic, forms.mass, eigvals_only=True)
    except linalg.LinAlgError as e:
        raise LinearSolveException('Stability eigenproblem failed: ' + str(e)) from e
    return float(eigenvalues[0])


def _grid_of(u0, grid):
    if u0 is not None:
        return u0.grid
    if grid is None:
        raise DomainException('Initial guess or grid is required to fix the resolution')
    return grid

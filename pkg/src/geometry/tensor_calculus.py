"""Coordinate tensor calculus on batches of points.

Conventions: derivative axes come first after the batch axes, so dg[..., c, a, b] = d_c g_ab and
d2g[..., c, d, a, b] = d_c d_d g_ab. Christoffel symbols are G[..., a, b, c] = Gamma^a_bc and
dG[..., e, a, b, c] = d_e Gamma^a_bc. Works in any dimension (the ambient 3-metric and induced 2-metrics).
"""
import itertools

import numpy as np

from config.exceptions import DegenerateMetricException

_DERIVATIVE_LETTERS = 'ijklmn'
_TENSOR_LETTERS = 'pqrstu'


def inverse(g):
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError as e:
        raise DegenerateMetricException('Metric is not invertible') from e


def check_positive_definite(g, what='metric'):
    eigenvalues = np.linalg.eigvalsh(g)
    smallest = float(np.min(eigenvalues))
    if not np.isfinite(smallest) or smallest <= 0:
        raise DegenerateMetricException('%s is not positive definite (smallest eigenvalue %r)' % (what, smallest))
    return smallest


def _lowered_christoffel(dg):
    # Gamma_dbc = 1/2 (d_b g_dc + d_c g_db - d_d g_bc), indexed [d, b, c]
    return 0.5 * (np.swapaxes(dg, -3, -2) + np.einsum('...cdb->...dbc', dg) - dg)


def _lowered_christoffel_derivative(d2g):
    # d_e Gamma_dbc, indexed [e, d, b, c]
    return 0.5 * (np.einsum('...ebdc->...edbc', d2g)
                  + np.einsum('...ecdb->...edbc', d2g)
                  - d2g)


def christoffel(g_inv, dg):
    return np.einsum('...ad,...dbc->...abc', g_inv, _lowered_christoffel(dg))


def inverse_derivative(g_inv, dg):
    """d_e g^ab = -g^ap d_e g_pq g^qb, indexed [e, a, b]"""
    return -np.einsum('...ap,...epq,...qb->...eab', g_inv, dg, g_inv)


def christoffel_derivative(g_inv, dg, d2g):
    d_inv = inverse_derivative(g_inv, dg)
    return (np.einsum('...ead,...dbc->...eabc', d_inv, _lowered_christoffel(dg))
            + np.einsum('...ad,...edbc->...eabc', g_inv, _lowered_christoffel_derivative(d2g)))


def ricci(gamma, d_gamma):
    """R_bd = d_a G^a_db - d_d G^a_ab + G^a_ae G^e_db - G^a_de G^e_ab"""
    return (np.einsum('...aadb->...db', d_gamma)
            - np.einsum('...daab->...db', d_gamma)
            + np.einsum('...aae,...edb->...db', gamma, gamma)
            - np.einsum('...ade,...eab->...db', gamma, gamma))


def scalar_curvature(g_inv, ric):
    return np.einsum('...ab,...ab->...', g_inv, ric)


def curvature(g, dg, d2g):
    """(g_inv, Gamma, Ricci, scalar curvature) from a metric 2-jet"""
    g_inv = inverse(g)
    gamma = christoffel(g_inv, dg)
    ric = ricci(gamma, christoffel_derivative(g_inv, dg, d2g))
    return g_inv, gamma, ric, scalar_curvature(g_inv, ric)


def christoffel_jet(metric_jet):
    """[Gamma, dGamma, d2Gamma] (as far as the metric jet allows, at most second order)"""
    g, dg = metric_jet[0], metric_jet[1]
    g_inv = inverse(g)
    lowered = _lowered_christoffel(dg)
    jet = [np.einsum('...ad,...dbc->...abc', g_inv, lowered)]
    if len(metric_jet) < 3:
        return jet

    d2g = metric_jet[2]
    d_inv = inverse_derivative(g_inv, dg)
    d_lowered = _lowered_christoffel_derivative(d2g)
    jet.append(np.einsum('...ead,...dbc->...eabc', d_inv, lowered)
               + np.einsum('...ad,...edbc->...eabc', g_inv, d_lowered))
    if len(metric_jet) < 4:
        return jet

    d3g = metric_jet[3]
    # d_f d_e g^ad
    d2_inv = -(np.einsum('...fap,...epq,...qb->...feab', d_inv, dg, g_inv)
               + np.einsum('...ap,...fepq,...qb->...feab', g_inv, d2g, g_inv)
               + np.einsum('...ap,...epq,...fqb->...feab', g_inv, dg, d_inv))
    # d_f d_e Gamma_dbc from third derivatives of g, indexed [f, e, d, b, c]
    d2_lowered = 0.5 * (np.einsum('...febdc->...fedbc', d3g)
                        + np.einsum('...fecdb->...fedbc', d3g)
                        - d3g)
    jet.append(np.einsum('...fead,...dbc->...feabc', d2_inv, lowered)
               + np.einsum('...ead,...fdbc->...feabc', d_inv, d_lowered)
               + np.einsum('...fad,...edbc->...feabc', d_inv, d_lowered)
               + np.einsum('...ad,...fedbc->...feabc', g_inv, d2_lowered))
    return jet


def covariant_derivative_jet(tensor_jet, gamma_jet):
    """Jet of the covariant derivative of a covariant tensor.

    tensor_jet[i] holds the i-th partial derivatives of a rank-k tensor, shape (..., n^i, n^k). The result
    holds the partial derivatives of (nabla T)_{a b1..bk} up to order len(tensor_jet) - 2, using
    d^i(Gamma T) = sum over subsets of the derivative slots (Leibniz rule)."""
    order = len(tensor_jet) - 2
    if order < 0:
        raise ValueError('Tensor jet should contain at least first derivatives')
    if len(gamma_jet) < order + 1:
        raise ValueError('Christoffel jet of order %d required' % order)

    rank = tensor_jet[0].ndim - _batch_ndim(tensor_jet, gamma_jet)
    tensor_letters = _TENSOR_LETTERS[:rank]

    result = []
    for i in range(order + 1):
        derivative_letters = _DERIVATIVE_LETTERS[:i]
        value = tensor_jet[i + 1].copy()
        output = '...' + derivative_letters + 'a' + tensor_letters

        for subset_size in range(i + 1):
            for subset in itertools.combinations(range(i), subset_size):
                gamma_letters = ''.join(derivative_letters[j] for j in subset)
                rest_letters = ''.join(derivative_letters[j] for j in range(i) if j not in subset)
                for slot in range(rank):
                    slot_letter = tensor_letters[slot]
                    contracted = tensor_letters[:slot] + 'z' + tensor_letters[slot + 1:]
                    subscripts = ('...' + gamma_letters + 'za' + slot_letter + ','
                                  + '...' + rest_letters + contracted + '->' + output)
                    value -= np.einsum(subscripts, gamma_jet[subset_size], tensor_jet[i - subset_size])

        result.append(value)

    return result


def _batch_ndim(tensor_jet, gamma_jet):
    # Gamma has three tensor axes and no derivative axes
    return gamma_jet[0].ndim - 3


def tensor_norm(tensor, g_inv):
    """|T| for a covariant tensor, indices raised with g_inv"""
    rank = tensor.ndim - (g_inv.ndim - 2)
    if rank == 0:
        return np.abs(tensor)

    lower = _TENSOR_LETTERS[:rank]
    upper = 'abcdef'[:rank]
    operands = [tensor, tensor] + [g_inv] * rank
    subscripts = '...' + lower + ',...' + upper + ''.join(',...' + lower[j] + upper[j] for j in range(rank)) + '->...'
    squared = np.einsum(subscripts, *operands)
    return np.sqrt(np.maximum(squared, 0.0))


def ricci_jet(gamma_jet):
    """[Ric, dRic] from a Christoffel jet with at least second derivatives"""
    gamma, d_gamma, d2_gamma = gamma_jet[0], gamma_jet[1], gamma_jet[2]
    ric = ricci(gamma, d_gamma)
    d_ric = (np.einsum('...faadb->...fdb', d2_gamma)
             - np.einsum('...fdaab->...fdb', d2_gamma)
             + np.einsum('...faae,...edb->...fdb', d_gamma, gamma)
             + np.einsum('...aae,...fedb->...fdb', gamma, d_gamma)
             - np.einsum('...fade,...eab->...fdb', d_gamma, gamma)
             - np.einsum('...ade,...feab->...fdb', gamma, d_gamma))
    return [ric, d_ric]


def bianchi_residual(metric_jet):
    """Pointwise |div Ric - dR/2| from a metric 3-jet; vanishes identically for any smooth metric"""
    g, dg = metric_jet[0], metric_jet[1]
    g_inv = inverse(g)
    gamma_jet = christoffel_jet(metric_jet)
    ric, d_ric = ricci_jet(gamma_jet)

    nabla_ric = covariant_derivative_jet([ric, d_ric], gamma_jet)[0]
    divergence = np.einsum('...ab,...abc->...c', g_inv, nabla_ric)
    d_scalar = (np.einsum('...cab,...ab->...c', inverse_derivative(g_inv, dg), ric)
                + np.einsum('...ab,...cab->...c', g_inv, d_ric))

    residual = divergence - 0.5 * d_scalar
    return np.sqrt(np.einsum('...a,...ab,...b->...', residual, g_inv, residual))

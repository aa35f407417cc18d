"""Quadrature rules, Lagrange bases, and the 1D operator matrices.

Everything downstream (element kernels, meshes, limiter) is built from the
two node families supported here: Legendre-Gauss and Legendre-Gauss-Lobatto.
Nodes are found by Newton iteration on the Legendre recurrences, so the
package carries no quadrature dependency and produces identical rules on
every platform.

The staggered ("complementary") grid of a rule has N+2 points whose spacings
are the quadrature weights; it hosts the subcell interface fluxes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBasisError,
    InconsistentRuleError,
    InvalidDegreeError,
    OperatorConstructionError,
)

GAUSS = "gauss"
GAUSS_LOBATTO = "gauss-lobatto"

MAX_DEGREE = 15

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes, weights and staggered grid of a 1D reference element.

    Attributes:
        kind: GAUSS or GAUSS_LOBATTO.
        degree: polynomial degree N (N+1 nodes).
        nodes: strictly increasing points in [-1, 1], shape (N+1,).
        weights: positive quadrature weights summing to 2, shape (N+1,).
        staggered: complementary grid, shape (N+2,), from -1 to +1 with
            spacings equal to the weights.
    """

    kind: str
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    staggered: np.ndarray


@dataclass(frozen=True)
class Operators1D:
    """Dense operator matrices of one rule.

    M is the reference-element mass matrix diag(w); element Jacobians are
    applied separately. D is the nodal derivative matrix, Vf the 2x(N+1)
    interpolation to the faces -1/+1, B = diag(-1, +1), and
    S = 2 M D - Vf^T B Vf is the skew-symmetric volume operator that drives
    the flux-differencing kernels.
    """

    rule: QuadratureRule
    M: np.ndarray
    D: np.ndarray
    Vf: np.ndarray
    B: np.ndarray
    S: np.ndarray


def _check_degree(n):
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_DEGREE:
        raise InvalidDegreeError(
            f"polynomial degree must be an integer in [1, {MAX_DEGREE}], got {n!r}"
        )


def legendre_and_derivative(n, x):
    """Evaluate P_n(x) and P_n'(x) by the three-term recurrence."""
    p_prev = np.ones_like(np.asarray(x, dtype=float))
    if n == 0:
        return p_prev, np.zeros_like(p_prev)
    p = np.asarray(x, dtype=float).copy()
    dp_prev = np.zeros_like(p_prev)
    dp = np.ones_like(p_prev)
    for k in range(1, n):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        dp_next = dp_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp


def _symmetrize(nodes, weights):
    # Straighten Newton roundoff so nodes are exactly antisymmetric and
    # weights exactly symmetric.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def gauss_rule(n: int) -> QuadratureRule:
    """Legendre-Gauss rule of degree n: exact for polynomials up to 2n+1."""
    _check_degree(n)
    npts = n + 1
    k = np.arange(npts)
    x = np.cos(np.pi * (4 * k + 3) / (4 * npts + 2))
    for _ in range(_NEWTON_MAXIT):
        p, dp = legendre_and_derivative(npts, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = legendre_and_derivative(npts, x)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    x, w = _symmetrize(np.sort(x), w[np.argsort(x)])
    return QuadratureRule(GAUSS, n, x, w, complementary_grid(w))


def lobatto_rule(n: int) -> QuadratureRule:
    """Legendre-Gauss-Lobatto rule of degree n: exact up to 2n-1, endpoints included."""
    _check_degree(n)
    npts = n + 1
    x = -np.cos(np.pi * np.arange(npts) / n)
    # Interior nodes are the roots of P_n'; Newton with P_n'' from the
    # Legendre ODE (1-x^2) P'' = 2 x P' - n(n+1) P.
    if npts > 2:
        xi = x[1:-1].copy()
        for _ in range(_NEWTON_MAXIT):
            p, dp = legendre_and_derivative(n, xi)
            d2p = (2.0 * xi * dp - n * (npts) * p) / (1.0 - xi**2)
            dx = dp / d2p
            xi = xi - dx
            if np.max(np.abs(dx)) < _NEWTON_TOL:
                break
        x[1:-1] = xi
    x[0], x[-1] = -1.0, 1.0
    p, _ = legendre_and_derivative(n, x)
    w = 2.0 / (n * npts * p**2)
    x, w = _symmetrize(x, w)
    x[0], x[-1] = -1.0, 1.0
    return QuadratureRule(GAUSS_LOBATTO, n, x, w, complementary_grid(w))


def complementary_grid(weights) -> np.ndarray:
    """Staggered grid: start at -1, advance by one weight per step, end at +1.

    The last point must land on +1 to 1e-12 (it is then snapped exactly);
    otherwise the weights do not form a rule on [-1, 1].
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0.0):
        raise InconsistentRuleError("quadrature weights must be positive")
    grid = np.concatenate(([-1.0], -1.0 + np.cumsum(w)))
    if abs(grid[-1] - 1.0) > 1e-12:
        raise InconsistentRuleError(
            f"weights sum to {w.sum():.17g}, expected 2 (staggered grid ends at {grid[-1]:.17g})"
        )
    grid[-1] = 1.0
    return grid


def lagrange_eval(nodes, j: int, x) -> float:
    """Value of the j-th Lagrange cardinal polynomial of the node set at x."""
    nodes = np.asarray(nodes, dtype=float)
    diffs = nodes[:, None] - nodes[None, :]
    if np.min(np.abs(diffs[~np.eye(len(nodes), dtype=bool)])) == 0.0:
        raise DegenerateBasisError("interpolation nodes must be distinct")
    num = 1.0
    den = 1.0
    for k in range(len(nodes)):
        if k == j:
            continue
        num *= x - nodes[k]
        den *= nodes[j] - nodes[k]
    return num / den


def lagrange_basis_at(nodes, x) -> np.ndarray:
    """All cardinal polynomial values l_j(x), shape (len(nodes),)."""
    return np.array([lagrange_eval(nodes, j, x) for j in range(len(nodes))])


def derivative_matrix(nodes) -> np.ndarray:
    """D_ij = l_j'(x_i) via barycentric weights."""
    nodes = np.asarray(nodes, dtype=float)
    npts = len(nodes)
    diffs = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diffs, 1.0)
    bary = 1.0 / np.prod(diffs, axis=1)
    d = np.empty((npts, npts))
    for i in range(npts):
        for j in range(npts):
            if i != j:
                d[i, j] = bary[j] / (bary[i] * (nodes[i] - nodes[j]))
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def build_operators(rule: QuadratureRule) -> Operators1D:
    """Assemble M, D, Vf, B and the skew-symmetric S for one rule.

    S is symmetrized after assembly; an asymmetry beyond 1e-12 signals
    corrupted nodes or weights and raises instead.
    """
    nodes, w = rule.nodes, rule.weights
    m = np.diag(w)
    d = derivative_matrix(nodes)
    vf = np.vstack([lagrange_basis_at(nodes, -1.0), lagrange_basis_at(nodes, +1.0)])
    b = np.diag([-1.0, 1.0])
    s = 2.0 * m @ d - vf.T @ b @ vf
    asym = np.max(np.abs(s + s.T))
    if asym > 1e-12:
        raise OperatorConstructionError(
            f"volume operator asymmetry {asym:.3e} exceeds 1e-12; rule is inconsistent"
        )
    s = 0.5 * (s - s.T)
    return Operators1D(rule, m, d, vf, b, s)


def make_operators(kind: str, n: int) -> Operators1D:
    """Convenience constructor: rule of the given family plus its operators."""
    if kind == GAUSS:
        return build_operators(gauss_rule(n))
    if kind == GAUSS_LOBATTO:
        return build_operators(lobatto_rule(n))
    raise InvalidDegreeError(f"unknown node family {kind!r}")


def dump_operators(ops: Operators1D, directory) -> list[str]:
    """Debug dump: one CSV per matrix, one row per line, 17 significant digits."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, mat in [("M", ops.M), ("D", ops.D), ("Vf", ops.Vf), ("B", ops.B), ("S", ops.S)]:
        path = os.path.join(directory, f"{name}.csv")
        np.savetxt(path, np.atleast_2d(mat), delimiter=",", fmt="%.17g")
        written.append(path)
    return written

"""Hybrid DG / subcell-FV limiting on the staggered flux grid.

The low-order scheme is a first-order LLF finite-volume method living on the
subcells of each element: between interior nodes it fluxes nodal neighbor
states through the subcell normals, and across element faces it fluxes the
two face-adjacent nodal states through the shared face normal, so every face
flux is single-valued and any blend of the two schemes stays conservative.

Density bounds at a node come from the bar states against its low-order
stencil (the four nodal neighbors, crossing faces, plus the node itself).
The provisional blending coefficient enforces those bounds on the blended
forward-Euler density through per-node worst-case flux budgets: the density
is affine in the blending weight of each surrounding interface, so the
smallest admissible coefficient has a closed form; budgeting the worst-case
signs keeps the bound guarantee intact when the interface rule afterwards
takes the maximum coefficient of the two adjacent nodes (raising a neighbor
coefficient can only move the update toward the FV scheme, which satisfies
the bounds by construction for any step below the IDP limit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core2d, euler
from .core1d import FACE_ENTROPY
from .errors import SolverError
from .euler import GasModel
from .mesh2d import QuadMesh

# Internal relaxation of the density bounds; absorbs roundoff in the bound
# and budget arithmetic while keeping well inside the 1e-10 envelope the
# acceptance checks use.
BOUND_SLACK = 1e-12
_TINY = 1e-300


@dataclass
class IdpBounds:
    """Per-node density bounds from the low-order bar-state stencil."""

    rho_min: np.ndarray
    rho_max: np.ndarray


@dataclass
class BlendField:
    """Blending coefficients of one evaluation plus diagnostics.

    ``alpha_nodal`` is the provisional per-node coefficient; ``alpha1`` and
    ``alpha2`` live on the staggered interfaces of each direction and are
    equal on both sides of every element face. ``mean_history`` accumulates
    (t, mean alpha) pairs for accepted steps.
    """

    alpha_nodal: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    violations: int = 0
    mean_history: list = field(default_factory=list)


def outer_nodal_states(u):
    """Face-adjacent nodal states of the periodic neighbors (W, E, S, N)."""
    outer_w = np.roll(u[:, :, :, -1, :], 1, axis=1)
    outer_e = np.roll(u[:, :, :, 0, :], -1, axis=1)
    outer_s = np.roll(u[:, :, :, :, -1], 1, axis=2)
    outer_n = np.roll(u[:, :, :, :, 0], -1, axis=2)
    return outer_w, outer_e, outer_s, outer_n


def _direction_pairs(mesh: QuadMesh, u, direction: int):
    """Left/right states and normals of every staggered interface of one direction.

    Returns (ua, ub, normals) with the staggered axis in place of the node
    axis of that direction; face interfaces pair the inner nodal state with
    the neighbor's face-adjacent nodal state.
    """
    outer_w, outer_e, outer_s, outer_n = outer_nodal_states(u)
    if direction == 1:
        ua = np.concatenate([outer_w[:, :, :, None, :], u], axis=3)
        ub = np.concatenate([u, outer_e[:, :, :, None, :]], axis=3)
        return ua, ub, mesh.sub_n1
    ua = np.concatenate([outer_s[:, :, :, :, None], u], axis=4)
    ub = np.concatenate([u, outer_n[:, :, :, :, None]], axis=4)
    return ua, ub, mesh.sub_n2


def fv_subcell_fluxes(mesh: QuadMesh, u, gas: GasModel):
    """First-order LLF fluxes on the staggered grids of both directions.

    Shapes match the DG staggered fluxes: (nvar, Kx, Ky, N+2, N+1) for
    direction 1 and (nvar, Kx, Ky, N+1, N+2) for direction 2. Face entries
    are computed once per face and shared by the two adjacent elements.
    """
    fv = []
    for direction in (1, 2):
        ua, ub, normals = _direction_pairs(mesh, u, direction)
        fv.append(euler.flux_llf(ua, ub, normals, gas))
    return fv[0], fv[1]


def subcell_wavespeeds(mesh: QuadMesh, u, gas: GasModel):
    """lambda_max * |n| at every staggered interface of both directions."""
    lams = []
    for direction in (1, 2):
        ua, ub, normals = _direction_pairs(mesh, u, direction)
        norm = np.sqrt(np.sum(normals**2, axis=0))
        lams.append(euler.max_wavespeed(ua, ub, normals / norm, gas) * norm)
    return lams[0], lams[1]


def idp_bounds(mesh: QuadMesh, u, gas: GasModel) -> IdpBounds:
    """Density bounds from bar states over the low-order stencil.

    Every interior and face interface contributes one bar state shared by
    its two nodes; the node's own density is part of the stencil so the
    bounds are always attainable by the pure FV update.
    """
    bars = []
    for direction in (1, 2):
        ua, ub, normals = _direction_pairs(mesh, u, direction)
        norm = np.sqrt(np.sum(normals**2, axis=0))
        bars.append(euler.bar_state(ua, ub, normals / norm, gas)[0])
    bar1, bar2 = bars
    rho = u[0]
    rho_min = np.minimum.reduce(
        [rho, bar1[:, :, :-1, :], bar1[:, :, 1:, :], bar2[:, :, :, :-1], bar2[:, :, :, 1:]]
    )
    rho_max = np.maximum.reduce(
        [rho, bar1[:, :, :-1, :], bar1[:, :, 1:, :], bar2[:, :, :, :-1], bar2[:, :, :, 1:]]
    )
    return IdpBounds(rho_min, rho_max)


def idp_timestep(mesh: QuadMesh, u, gas: GasModel, cfl: float = 1.0) -> float:
    """Largest forward-Euler step for which the FV update is a convex
    combination of its bar states, times the user CFL factor."""
    lam1, lam2 = subcell_wavespeeds(mesh, u, gas)
    w = mesh.ops.rule.weights
    denom = w[None, None, None, :] * (lam1[:, :, :-1, :] + lam1[:, :, 1:, :]) + w[
        None, None, :, None
    ] * (lam2[:, :, :, :-1] + lam2[:, :, :, 1:])
    dt = np.min(mesh.jac * mesh.node_weights() / denom)
    if not dt > 0.0:
        raise SolverError(f"nonpositive IDP time step {dt}")
    return cfl * float(dt)


def provisional_alpha(
    mesh: QuadMesh, u, bounds: IdpBounds, dt, fbar_dg, fbar_fv, slack: float = BOUND_SLACK
):
    """Smallest per-node blending coefficient keeping the blended
    forward-Euler density inside its bounds.

    ``fbar_dg``/``fbar_fv`` are the (direction-1, direction-2) staggered flux
    pairs. Returns (alpha_nodal, violations) where violations counts nodes
    whose pure-FV update already sits outside the relaxed bounds (clamped to
    alpha = 1 and reported, never fatal).
    """
    w = mesh.ops.rule.weights
    jac = mesh.jac
    c1 = dt / (jac * w[None, None, :, None])
    c2 = dt / (jac * w[None, None, None, :])

    d1 = fbar_dg[0][0] - fbar_fv[0][0]
    d2 = fbar_dg[1][0] - fbar_fv[1][0]
    rho_fv = u[0] + dt * core2d.assemble_rhs(mesh, fbar_fv[0], fbar_fv[1])[0]

    pos = np.maximum
    p_up = c1 * (pos(d1[:, :, :-1, :], 0.0) + pos(-d1[:, :, 1:, :], 0.0)) + c2 * (
        pos(d2[:, :, :, :-1], 0.0) + pos(-d2[:, :, :, 1:], 0.0)
    )
    p_dn = c1 * (pos(-d1[:, :, :-1, :], 0.0) + pos(d1[:, :, 1:, :], 0.0)) + c2 * (
        pos(-d2[:, :, :, :-1], 0.0) + pos(d2[:, :, :, 1:], 0.0)
    )
    q_up = (bounds.rho_max + slack) - rho_fv
    q_dn = rho_fv - (bounds.rho_min - slack)
    violations = int(np.sum((q_up < -1e-12) | (q_dn < -1e-12)))
    q_up = pos(q_up, 0.0)
    q_dn = pos(q_dn, 0.0)

    keep = np.minimum(1.0, np.minimum(q_up / (p_up + _TINY), q_dn / (p_dn + _TINY)))
    alpha = np.clip(1.0 - keep, 0.0, 1.0)
    return alpha, violations


def interface_alpha(mesh: QuadMesh, alpha_nodal) -> BlendField:
    """Interface coefficients: the maximum of the two adjacent nodal values.

    At element faces the two facing nodes belong to different elements; the
    shared maximum is used on both sides, which the convex blend needs for
    conservation.
    """
    a = alpha_nodal
    npts = a.shape[2]
    face1 = np.maximum(a[:, :, -1, :], np.roll(a[:, :, 0, :], -1, axis=0))
    alpha1 = np.concatenate(
        [
            np.roll(face1, 1, axis=0)[:, :, None, :],
            np.maximum(a[:, :, :-1, :], a[:, :, 1:, :]),
            face1[:, :, None, :],
        ],
        axis=2,
    )
    face2 = np.maximum(a[:, :, :, -1], np.roll(a[:, :, :, 0], -1, axis=1))
    alpha2 = np.concatenate(
        [
            np.roll(face2, 1, axis=1)[:, :, :, None],
            np.maximum(a[:, :, :, :-1], a[:, :, :, 1:]),
            face2[:, :, :, None],
        ],
        axis=3,
    )
    return BlendField(alpha_nodal=a, alpha1=alpha1, alpha2=alpha2)


def blend_fluxes(fbar_dg, fbar_fv, alpha) -> np.ndarray:
    """Convex combination per staggered interface: a*FV + (1-a)*DG."""
    if np.min(alpha) < 0.0 or np.max(alpha) > 1.0:
        raise SolverError(
            f"blending coefficients outside [0, 1]: [{np.min(alpha)}, {np.max(alpha)}]"
        )
    return alpha[None] * fbar_fv + (1.0 - alpha[None]) * fbar_dg


def mean_alpha(mesh: QuadMesh, alpha_nodal) -> float:
    """Area-weighted mean of the provisional nodal coefficients."""
    return mesh.integrate(alpha_nodal) / mesh.area()


class HybridScheme:
    """Blended DG/FV right-hand side with per-evaluation coefficients.

    Each evaluation recomputes the staggered DG and FV fluxes from the given
    state, solves for the provisional coefficients with the evaluation's step
    size, applies the interface maximum rule, and assembles the blended
    update. The most recent bounds, blend field and mean coefficient stay
    readable for diagnostics and for the step history.
    """

    def __init__(self, mesh: QuadMesh, gas: GasModel, volume_flux, interface_flux,
                 face_mode=FACE_ENTROPY, slack=BOUND_SLACK, force_alpha=None):
        self.mesh = mesh
        self.gas = gas
        self.volume_flux = volume_flux
        self.interface_flux = interface_flux
        self.face_mode = face_mode
        self.slack = slack
        self.force_alpha = force_alpha
        self.last_bounds = None
        self.last_blend = None
        self.last_mean_alpha = 0.0
        self.step_mean_alpha = 0.0
        self.total_violations = 0
        self._fresh_step = True

    def begin_step(self):
        """Mark the next evaluation as the first of a new time step."""
        self._fresh_step = True

    def __call__(self, t, u, dt):
        mesh, gas = self.mesh, self.gas
        if self.force_alpha is not None and float(self.force_alpha) == 1.0:
            # Pure subcell-FV update: the DG machinery never enters.
            fv1, fv2 = fv_subcell_fluxes(mesh, u, gas)
            self.last_bounds = idp_bounds(mesh, u, gas)
            alpha_nodal = np.ones_like(u[0])
            self.last_blend = interface_alpha(mesh, alpha_nodal)
            self.last_mean_alpha = 1.0
            if self._fresh_step:
                self.step_mean_alpha = 1.0
                self._fresh_step = False
            return core2d.assemble_rhs(mesh, fv1, fv2)
        faces = core2d.exchange_and_flux(mesh, u, gas, self.interface_flux, self.face_mode)
        fbar1, _ = core2d.telescoping_fluxes_dir(mesh, u, faces, 1, self.volume_flux, gas)
        fbar2, _ = core2d.telescoping_fluxes_dir(mesh, u, faces, 2, self.volume_flux, gas)
        fv1, fv2 = fv_subcell_fluxes(mesh, u, gas)
        bounds = idp_bounds(mesh, u, gas)
        if self.force_alpha is None:
            alpha_nodal, violations = provisional_alpha(
                mesh, u, bounds, dt, (fbar1, fbar2), (fv1, fv2), self.slack
            )
        else:
            alpha_nodal = np.full_like(u[0], float(self.force_alpha))
            violations = 0
        blend = interface_alpha(mesh, alpha_nodal)
        fhat1 = blend_fluxes(fbar1, fv1, blend.alpha1)
        fhat2 = blend_fluxes(fbar2, fv2, blend.alpha2)

        self.last_bounds = bounds
        self.last_blend = blend
        self.last_mean_alpha = mean_alpha(mesh, alpha_nodal)
        self.total_violations += violations
        if self._fresh_step:
            self.step_mean_alpha = self.last_mean_alpha
            self._fresh_step = False
        return core2d.assemble_rhs(mesh, fhat1, fhat2)

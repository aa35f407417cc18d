"""1D DGSEM element kernels in both matrix and staggered-flux form.

Two algebraically equivalent right-hand sides are provided for one element:

* ``chan_rhs`` evaluates the generalized-SBP matrix form: the Hadamard
  product of the skew volume operator with the two-point flux matrix
  (including the entropy-projected face columns), projected back from the
  face rows, plus the interface-flux correction.
* ``telescoping_fluxes`` + ``fv_rhs`` evaluate the same update as differences
  of N+2 staggered fluxes on the complementary grid, built by a forward
  recurrence that starts at the left interface flux and must close onto the
  right one (``verify_closure``).

The two paths associate the floating-point operations differently, so their
results agree to accumulated roundoff, not bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import euler
from .basis import Operators1D
from .errors import TelescopingClosureError
from .euler import GasModel

FACE_ENTROPY = "entropy"
FACE_INTERP = "interp"

CLOSURE_RTOL = 1e-10


@dataclass
class Element1D:
    """One periodic-line element: operators, Jacobian, nodal states, neighbors.

    ``u`` has shape (nvar, N+1). ``outer_left``/``outer_right`` are the face
    states received from the adjacent elements (shape (nvar,)).
    """

    ops: Operators1D
    jac: float
    u: np.ndarray
    outer_left: np.ndarray | None = None
    outer_right: np.ndarray | None = None
    gas: GasModel = field(default_factory=GasModel)

    def __post_init__(self):
        if self.jac <= 0.0:
            raise ValueError(f"element Jacobian must be positive, got {self.jac}")
        euler.validate_state(self.u, self.gas)


def face_states(u, ops: Operators1D, gas: GasModel, mode: str = FACE_ENTROPY):
    """Inner face states (left, right) of a batch of elements, shape (nvar, K).

    ``entropy`` interpolates the entropy variables to the faces and maps back
    to conservative variables; ``interp`` interpolates the conservative
    variables directly (the standard scheme).
    """
    lm, lp = ops.Vf[0], ops.Vf[1]
    if mode == FACE_ENTROPY:
        v = euler.cons_to_entropy(u, gas)
        vL = np.einsum("i,vki->vk", lm, v)
        vR = np.einsum("i,vki->vk", lp, v)
        return euler.entropy_to_cons(vL, gas), euler.entropy_to_cons(vR, gas)
    if mode == FACE_INTERP:
        uL = np.einsum("i,vki->vk", lm, u)
        uR = np.einsum("i,vki->vk", lp, u)
        euler.validate_state(uL, gas)
        euler.validate_state(uR, gas)
        return uL, uR
    raise ValueError(f"unknown face mode {mode!r}")


def entropy_project_faces(elem: Element1D):
    """Entropy-projected face states (u(v_L), u(v_R)) of one element."""
    utL, utR = face_states(elem.u[:, None, :], elem.ops, elem.gas, FACE_ENTROPY)
    return utL[:, 0], utR[:, 0]


def _pairwise_terms(u, ut_L, ut_R, ops: Operators1D, volume_flux, gas: GasModel):
    """Shared two-point flux blocks for a batch of elements.

    Returns (vol, FL, FR, rowL, rowR) where vol_i = sum_k S_ik f(u_i, u_k),
    FL_i = f(u_i, u_tilde_L), rowL = sum_k l_k(-1) f(u_tilde_L, u_k), and the
    R quantities mirror them at +1.
    """
    lm, lp = ops.Vf[0], ops.Vf[1]
    fpair = volume_flux(u[:, :, :, None], u[:, :, None, :], 1.0, gas)
    vol = np.einsum("ik,cvik->cvi", ops.S, fpair)
    FL = volume_flux(u, ut_L[:, :, None], 1.0, gas)
    FR = volume_flux(u, ut_R[:, :, None], 1.0, gas)
    rowL = np.einsum("k,cvk->cv", lm, FL)
    rowR = np.einsum("k,cvk->cv", lp, FR)
    return vol, FL, FR, rowL, rowR


def chan_rhs_batch(u, jac, ops, fstar_L, fstar_R, volume_flux, gas, face_mode=FACE_ENTROPY):
    """Matrix-form semi-discrete RHS for a batch of elements.

    ``u`` has shape (nvar, K, N+1); ``fstar_L``/``fstar_R`` are the interface
    fluxes (nvar, K), oriented in +x; ``jac`` broadcasts over elements.
    Returns du/dt with the same shape as ``u``.
    """
    lm, lp = ops.Vf[0], ops.Vf[1]
    ut_L, ut_R = face_states(u, ops, gas, face_mode)
    vol, FL, FR, rowL, rowR = _pairwise_terms(u, ut_L, ut_R, ops, volume_flux, gas)
    ftilde_L = euler.physical_flux(ut_L, 1.0, gas)
    ftilde_R = euler.physical_flux(ut_R, 1.0, gas)

    hadamard = vol - lm[None, None, :] * FL + lp[None, None, :] * FR
    face_row_L = rowL - ftilde_L
    face_row_R = -rowR + ftilde_R
    projected = (
        hadamard
        + lm[None, None, :] * face_row_L[:, :, None]
        + lp[None, None, :] * face_row_R[:, :, None]
    )
    correction = lp[None, None, :] * (fstar_R - ftilde_R)[:, :, None] - lm[None, None, :] * (
        fstar_L - ftilde_L
    )[:, :, None]
    r = projected + correction
    jw = np.asarray(jac)[..., None] * ops.rule.weights
    return -r / jw


def telescoping_increments(u, ops, fstar_L, fstar_R, volume_flux, gas, face_mode=FACE_ENTROPY):
    """Per-node increments of the staggered-flux recurrence (batched)."""
    lm, lp = ops.Vf[0], ops.Vf[1]
    ut_L, ut_R = face_states(u, ops, gas, face_mode)
    vol, FL, FR, rowL, rowR = _pairwise_terms(u, ut_L, ut_R, ops, volume_flux, gas)
    bracket_L = FL - rowL[:, :, None] + fstar_L[:, :, None]
    bracket_R = FR - rowR[:, :, None] + fstar_R[:, :, None]
    return vol - lm[None, None, :] * bracket_L + lp[None, None, :] * bracket_R


def telescoping_fluxes_batch(
    u, ops, fstar_L, fstar_R, volume_flux, gas, face_mode=FACE_ENTROPY, check_closure=True
):
    """Staggered fluxes (nvar, K, N+2) on the complementary grid.

    The recurrence starts at the left interface flux; its output at the right
    end must reproduce the right interface flux (the closure property of a
    symmetric volume flux). The final entry is overwritten with the exact
    interface flux only after the closure check passes.
    """
    inc = telescoping_increments(u, ops, fstar_L, fstar_R, volume_flux, gas, face_mode)
    nvar, nelem, npts = u.shape
    fbar = np.empty((nvar, nelem, npts + 1))
    fbar[:, :, 0] = fstar_L
    np.cumsum(inc, axis=2, out=fbar[:, :, 1:])
    fbar[:, :, 1:] += fstar_L[:, :, None]
    residual = np.max(np.abs(fbar[:, :, -1] - fstar_R))
    if check_closure:
        scale = max(1.0, float(np.max(np.abs(fbar))))
        if residual > CLOSURE_RTOL * scale:
            raise TelescopingClosureError(
                f"recurrence residual {residual:.3e} exceeds {CLOSURE_RTOL:g} * {scale:.3g}; "
                "volume flux is asymmetric or operators are inconsistent"
            )
    fbar[:, :, -1] = fstar_R
    return fbar, residual


def fv_rhs_batch(fbar, jac, ops):
    """Finite-volume update from staggered fluxes: (fbar_i - fbar_{i+1}) / (J w_i)."""
    jw = np.asarray(jac)[..., None] * ops.rule.weights
    return (fbar[:, :, :-1] - fbar[:, :, 1:]) / jw


def chan_rhs(elem: Element1D, fstar_L, fstar_R, volume_flux, face_mode=FACE_ENTROPY):
    """Matrix-form RHS of a single element."""
    out = chan_rhs_batch(
        elem.u[:, None, :], elem.jac, elem.ops, fstar_L[:, None], fstar_R[:, None],
        volume_flux, elem.gas, face_mode,
    )
    return out[:, 0, :]


def telescoping_fluxes(elem: Element1D, fstar_L, fstar_R, volume_flux, face_mode=FACE_ENTROPY):
    """Staggered fluxes of a single element, shape (nvar, N+2)."""
    fbar, _ = telescoping_fluxes_batch(
        elem.u[:, None, :], elem.ops, fstar_L[:, None], fstar_R[:, None],
        volume_flux, elem.gas, face_mode,
    )
    return fbar[:, 0, :]


def fv_rhs(fbar, elem: Element1D):
    """Finite-volume RHS of a single element from its staggered fluxes."""
    return fv_rhs_batch(fbar[:, None, :], elem.jac, elem.ops)[:, 0, :]


def verify_closure(elem: Element1D, fstar_L, fstar_R, volume_flux, face_mode=FACE_ENTROPY):
    """Max-norm closure residual of the staggered-flux recurrence (diagnostic)."""
    _, residual = telescoping_fluxes_batch(
        elem.u[:, None, :], elem.ops, fstar_L[:, None], fstar_R[:, None],
        volume_flux, elem.gas, face_mode, check_closure=False,
    )
    return residual


class PeriodicLine1D:
    """Uniform periodic 1D mesh of K elements driving the element kernels."""

    RHS_MATRIX = "matrix"
    RHS_STAGGERED = "staggered"

    def __init__(self, ops: Operators1D, num_elements: int, domain=(0.0, 2.0),
                 gas: GasModel | None = None):
        if num_elements < 1:
            raise ValueError("need at least one element")
        self.ops = ops
        self.num_elements = num_elements
        self.gas = gas or GasModel()
        xl, xr = domain
        self.dx = (xr - xl) / num_elements
        self.jac = 0.5 * self.dx
        centers = xl + self.dx * (np.arange(num_elements) + 0.5)
        self.x = centers[:, None] + self.jac * ops.rule.nodes[None, :]

    def sample(self, fn) -> np.ndarray:
        """Nodal conserved states from fn(x) -> (rho, vel, p)."""
        rho, vel, p = fn(self.x)
        return euler.prim_to_cons(rho, np.asarray(vel)[None] if np.ndim(vel) != 3 else vel,
                                  p, self.gas)

    def interface_fluxes(self, u, interface_flux, face_mode=FACE_ENTROPY):
        """Shared interface fluxes and per-element (left, right) views."""
        ut_L, ut_R = face_states(u, self.ops, self.gas, face_mode)
        # Interface k sits between element k-1 (its right face) and element k.
        left_state = np.roll(ut_R, 1, axis=1)
        fstar = interface_flux(left_state, ut_L, 1.0, self.gas)
        fstar_L = fstar
        fstar_R = np.roll(fstar, -1, axis=1)
        return fstar_L, fstar_R

    def rhs(self, u, volume_flux, interface_flux, path=RHS_MATRIX, face_mode=FACE_ENTROPY):
        """Global semi-discrete RHS through the selected formulation."""
        fstar_L, fstar_R = self.interface_fluxes(u, interface_flux, face_mode)
        if path == self.RHS_MATRIX:
            return chan_rhs_batch(u, self.jac, self.ops, fstar_L, fstar_R,
                                  volume_flux, self.gas, face_mode)
        if path == self.RHS_STAGGERED:
            fbar, _ = telescoping_fluxes_batch(u, self.ops, fstar_L, fstar_R,
                                               volume_flux, self.gas, face_mode)
            return fv_rhs_batch(fbar, self.jac, self.ops)
        raise ValueError(f"unknown rhs path {path!r}")

    def quadrature_sum(self, values) -> float:
        """Integral of a nodal scalar field over the line."""
        return float(np.sum(self.jac * self.ops.rule.weights[None, :] * values))

    def l2_norm(self, values) -> float:
        """Quadrature L2 norm of a nodal field (summed over variables)."""
        return float(np.sqrt(np.sum(self.jac * self.ops.rule.weights * values**2)))

    def totals(self, u) -> np.ndarray:
        """Conserved-variable totals, shape (nvar,)."""
        return np.sum(self.jac * self.ops.rule.weights * u, axis=(1, 2))

    def entropy_total(self, u) -> float:
        return self.quadrature_sum(euler.entropy_density(u, self.gas))

    def entropy_production(self, u, dudt) -> float:
        """Global contraction of the RHS with the entropy variables."""
        v = euler.cons_to_entropy(u, self.gas)
        return float(np.sum(self.jac * self.ops.rule.weights * np.sum(v * dudt, axis=0)))

    def max_wavespeed(self, u) -> float:
        lam = np.abs(euler.velocity(u)[0]) + euler.sound_speed(u, self.gas)
        return float(np.max(lam))

"""2D tensor-product DGSEM right-hand side in staggered-flux form.

The update of each node is assembled from per-direction staggered fluxes on
the complementary grid (the 2D analogue of the 1D telescoping recurrence),
with metric dealiasing: every two-point volume flux is contracted with the
arithmetic mean of the metric vectors of its two nodes. Interface fluxes act
on entropy-projected inner states, the received outer states, and the shared
face metric vectors, so neighboring elements use bitwise-identical fluxes.

Evaluation is a bulk-synchronous sweep: (1) project all face states,
(2) compute all surface fluxes once per face, (3) run the per-element volume
recurrences and assemble. There is no shared mutable state within a phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import euler
from .basis import Operators1D
from .core1d import FACE_ENTROPY, FACE_INTERP
from .errors import TelescopingClosureError
from .euler import GasModel
from .mesh2d import QuadMesh

CLOSURE_RTOL = 1e-11


@dataclass
class FaceData:
    """Projected inner face states, received outer states, and face fluxes.

    Inner/outer state arrays have shape (nvar, Kx, Ky, N+1); the trailing
    axis runs along the face. ``fstar_*`` are the interface fluxes oriented
    in +xi (vertical faces) or +eta (horizontal faces).
    """

    inner_w: np.ndarray
    inner_e: np.ndarray
    inner_s: np.ndarray
    inner_n: np.ndarray
    outer_w: np.ndarray
    outer_e: np.ndarray
    outer_s: np.ndarray
    outer_n: np.ndarray
    fstar_w: np.ndarray
    fstar_e: np.ndarray
    fstar_s: np.ndarray
    fstar_n: np.ndarray


def entropy_project_faces_2d(u, ops: Operators1D, gas: GasModel, mode=FACE_ENTROPY):
    """Face states on all four faces of every element.

    Each row (column) is projected exactly as in 1D: entropy variables are
    interpolated along the coordinate line and mapped back to conservative
    variables. Returns (west, east, south, north) arrays (nvar, Kx, Ky, N+1).
    """
    lm, lp = ops.Vf[0], ops.Vf[1]
    if mode == FACE_ENTROPY:
        v = euler.cons_to_entropy(u, gas)
        vw = np.einsum("i,cxyij->cxyj", lm, v)
        ve = np.einsum("i,cxyij->cxyj", lp, v)
        vs = np.einsum("j,cxyij->cxyi", lm, v)
        vn = np.einsum("j,cxyij->cxyi", lp, v)
        return tuple(euler.entropy_to_cons(vv, gas) for vv in (vw, ve, vs, vn))
    if mode == FACE_INTERP:
        uw = np.einsum("i,cxyij->cxyj", lm, u)
        ue = np.einsum("i,cxyij->cxyj", lp, u)
        us = np.einsum("j,cxyij->cxyi", lm, u)
        un = np.einsum("j,cxyij->cxyi", lp, u)
        for arr in (uw, ue, us, un):
            euler.validate_state(arr, gas)
        return uw, ue, us, un
    raise ValueError(f"unknown face mode {mode!r}")


def exchange_and_flux(mesh: QuadMesh, u, gas, interface_flux, mode=FACE_ENTROPY) -> FaceData:
    """Phases 1 and 2: project faces, exchange periodically, flux each face once.

    A vertical face is fluxed with the east-side state of its west element
    first, so the flux is oriented +xi; the west element reads it as its east
    interface flux and the east element as its west one.
    """
    inner_w, inner_e, inner_s, inner_n = entropy_project_faces_2d(u, mesh.ops, gas, mode)
    outer_w = np.roll(inner_e, 1, axis=1)
    outer_e = np.roll(inner_w, -1, axis=1)
    outer_s = np.roll(inner_n, 1, axis=2)
    outer_n = np.roll(inner_s, -1, axis=2)
    fstar_e = interface_flux(inner_e, outer_e, mesh.face_n1_e, gas)
    fstar_w = np.roll(fstar_e, 1, axis=1)
    fstar_n = interface_flux(inner_n, outer_n, mesh.face_n2_n, gas)
    fstar_s = np.roll(fstar_n, 1, axis=2)
    return FaceData(
        inner_w=inner_w, inner_e=inner_e, inner_s=inner_s, inner_n=inner_n,
        outer_w=outer_w, outer_e=outer_e, outer_s=outer_s, outer_n=outer_n,
        fstar_w=fstar_w, fstar_e=fstar_e, fstar_s=fstar_s, fstar_n=fstar_n,
    )


def telescoping_fluxes_dir(
    mesh: QuadMesh, u, faces: FaceData, direction: int, volume_flux, gas,
    check_closure=True,
):
    """Staggered fluxes of one direction for every element and line.

    Direction 1 returns shape (nvar, Kx, Ky, N+2, N+1) (staggered index
    before the line index j); direction 2 returns (nvar, Kx, Ky, N+1, N+2).
    The recurrence starts at the low-side interface flux and must close onto
    the high-side one within CLOSURE_RTOL relative to the flux magnitude.
    """
    ops = mesh.ops
    lm, lp = ops.Vf[0], ops.Vf[1]
    if direction == 1:
        ut_lo, ut_hi = faces.inner_w, faces.inner_e
        fstar_lo, fstar_hi = faces.fstar_w, faces.fstar_e
        ja = mesh.ja1
        face_lo, face_hi = mesh.face_n1_w, mesh.face_n1_e
        uu = u
    elif direction == 2:
        ut_lo, ut_hi = faces.inner_s, faces.inner_n
        fstar_lo, fstar_hi = faces.fstar_s, faces.fstar_n
        ja = mesh.ja2.swapaxes(3, 4)
        face_lo, face_hi = mesh.face_n2_s, mesh.face_n2_n
        uu = u.swapaxes(3, 4)
    else:
        raise ValueError("direction must be 1 or 2")

    # Pairwise two-point fluxes with metric dealiasing: the direction vector
    # of pair (i, k) on line j is the average of the two nodal metric vectors.
    n_pair = 0.5 * (ja[:, :, :, :, None, :] + ja[:, :, :, None, :, :])
    fpair = volume_flux(uu[:, :, :, :, None, :], uu[:, :, :, None, :, :], n_pair, gas)
    vol = np.einsum("ik,cxyikj->cxyij", ops.S, fpair)

    n_lo = 0.5 * (ja + face_lo[:, :, :, None, :])
    n_hi = 0.5 * (ja + face_hi[:, :, :, None, :])
    f_lo = volume_flux(uu, ut_lo[:, :, :, None, :], n_lo, gas)
    f_hi = volume_flux(uu, ut_hi[:, :, :, None, :], n_hi, gas)
    row_lo = np.einsum("k,cxykj->cxyj", lm, f_lo)
    row_hi = np.einsum("k,cxykj->cxyj", lp, f_hi)

    bracket_lo = f_lo - row_lo[:, :, :, None, :] + fstar_lo[:, :, :, None, :]
    bracket_hi = f_hi - row_hi[:, :, :, None, :] + fstar_hi[:, :, :, None, :]
    inc = (
        vol
        - lm[None, None, None, :, None] * bracket_lo
        + lp[None, None, None, :, None] * bracket_hi
    )

    nvar, kx, ky, npts, _ = uu.shape
    fbar = np.empty((nvar, kx, ky, npts + 1, npts))
    fbar[:, :, :, 0, :] = fstar_lo
    np.cumsum(inc, axis=3, out=fbar[:, :, :, 1:, :])
    fbar[:, :, :, 1:, :] += fstar_lo[:, :, :, None, :]
    residual = float(np.max(np.abs(fbar[:, :, :, -1, :] - fstar_hi)))
    if check_closure:
        scale = max(1.0, float(np.max(np.abs(fbar))))
        if residual > CLOSURE_RTOL * scale:
            raise TelescopingClosureError(
                f"direction-{direction} recurrence residual {residual:.3e} "
                f"exceeds {CLOSURE_RTOL:g} * {scale:.3g}"
            )
    fbar[:, :, :, -1, :] = fstar_hi
    if direction == 2:
        return fbar.swapaxes(3, 4), residual
    return fbar, residual


def assemble_rhs(mesh: QuadMesh, fbar1, fbar2) -> np.ndarray:
    """Nodal update from both directions' staggered fluxes, divided by J."""
    w = mesh.ops.rule.weights
    d1 = (fbar1[:, :, :, :-1, :] - fbar1[:, :, :, 1:, :]) / w[None, None, None, :, None]
    d2 = (fbar2[:, :, :, :, :-1] - fbar2[:, :, :, :, 1:]) / w[None, None, None, None, :]
    return (d1 + d2) / mesh.jac


def rhs_2d(mesh: QuadMesh, u, gas, volume_flux, interface_flux, mode=FACE_ENTROPY):
    """Global semi-discrete RHS on a periodic 2D mesh."""
    faces = exchange_and_flux(mesh, u, gas, interface_flux, mode)
    fbar1, _ = telescoping_fluxes_dir(mesh, u, faces, 1, volume_flux, gas)
    fbar2, _ = telescoping_fluxes_dir(mesh, u, faces, 2, volume_flux, gas)
    return assemble_rhs(mesh, fbar1, fbar2)


def entropy_production(mesh: QuadMesh, u, dudt, gas) -> float:
    """Global contraction of the RHS with the entropy variables."""
    v = euler.cons_to_entropy(u, gas)
    return float(np.sum(mesh.jac * mesh.node_weights() * np.sum(v * dudt, axis=0)))


def entropy_total(mesh: QuadMesh, u, gas) -> float:
    return mesh.integrate(euler.entropy_density(u, gas))

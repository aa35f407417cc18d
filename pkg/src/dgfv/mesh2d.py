"""Periodic quadrilateral meshes: Cartesian and smoothly warped.

Warped meshes are built from a sinusoidal deformation of the uniform grid,
x = X + a sin(pi X) sin(pi Y) (in domain-normalized coordinates, same for y).
Each element's mapping is the transfinite (linear-blend) interpolant of its
four edge curves, where every edge curve is the degree-N polynomial through
Lobatto-spaced samples of the deformation along that edge, with the end
points pinned to the mesh vertices. Adjacent elements therefore share their
face polynomial exactly, which makes the mesh watertight to roundoff; and
because the mapping has tensor degree <= N, metric terms computed with the
nodal derivative matrix are exact, so the discrete metric identity (and with
it free-stream preservation) holds to roundoff as well.

Metric terms use the 2D cross form Ja1 = (y_eta, -x_eta), Ja2 = (-y_xi, x_xi).
All face and subcell normal vectors are stored in +xi / +eta orientation;
outward normals at the low side are their negatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Operators1D, lobatto_rule
from .errors import InvalidWarpError, MetricInconsistencyError

SUBCELL_CLOSURE_TOL = 1e-12


@dataclass
class QuadMesh:
    """Geometry of a periodic Kx-by-Ky quadrilateral mesh.

    Nodal arrays have shape (Kx, Ky, N+1, N+1) with reference indices
    (i, j) last; metric vectors carry a leading component axis of length 2.
    ``sub_n1``/``sub_n2`` are the subcell interface normals on the staggered
    grid of each direction; their first and last entries equal the element
    face normals.
    """

    ops: Operators1D
    kx: int
    ky: int
    domain: tuple
    warp_amplitude: float
    x: np.ndarray
    y: np.ndarray
    jac: np.ndarray
    ja1: np.ndarray
    ja2: np.ndarray
    face_n1_w: np.ndarray
    face_n1_e: np.ndarray
    face_n2_s: np.ndarray
    face_n2_n: np.ndarray
    sub_n1: np.ndarray
    sub_n2: np.ndarray
    sub_closure_residual: float = 0.0
    face_mismatch: float = 0.0

    @property
    def num_elements(self):
        return self.kx * self.ky

    @property
    def npts(self):
        return self.ops.rule.degree + 1

    def node_weights(self) -> np.ndarray:
        """Tensor quadrature weights w_i w_j, shape (N+1, N+1)."""
        w = self.ops.rule.weights
        return w[:, None] * w[None, :]

    def integrate(self, field) -> float:
        """Quadrature integral of a nodal scalar field over the domain."""
        return float(np.sum(self.jac * self.node_weights() * field))

    def area(self) -> float:
        return self.integrate(np.ones_like(self.jac))

    def totals(self, u) -> np.ndarray:
        """Conserved totals of a state array (nvar, Kx, Ky, N+1, N+1)."""
        return np.sum(self.jac * self.node_weights() * u, axis=(1, 2, 3, 4))

    def l2_norm(self, field) -> float:
        return float(np.sqrt(np.sum(self.jac * self.node_weights() * np.asarray(field) ** 2)))

    def metric_identity_residual(self) -> float:
        """Max nodal residual of D_xi(Ja1) + D_eta(Ja2) (should vanish)."""
        d = self.ops.D
        div = np.einsum("im,cxymj->cxyij", d, self.ja1) + np.einsum(
            "jm,cxyim->cxyij", d, self.ja2
        )
        return float(np.max(np.abs(div)))

    def watertightness_residual(self) -> float:
        """Max mismatch of shared-face normals interpolated from the two sides.

        Measured at construction, before the stored face normals are
        canonicalized to one value per physical face.
        """
        return self.face_mismatch

    def report(self) -> str:
        lines = [
            f"mesh: {self.kx} x {self.ky} elements, degree {self.ops.rule.degree} "
            f"({self.ops.rule.kind} nodes)",
            f"domain: x in [{self.domain[0]:g}, {self.domain[1]:g}], "
            f"y in [{self.domain[2]:g}, {self.domain[3]:g}], warp amplitude "
            f"{self.warp_amplitude:g}",
            f"min Jacobian: {float(np.min(self.jac)):.6g}",
            f"metric identity residual: {self.metric_identity_residual():.3e}",
            f"watertightness residual: {self.watertightness_residual():.3e}",
            f"subcell normal closure residual: {self.sub_closure_residual:.3e}",
        ]
        return "\n".join(lines)


def build_cartesian_mesh(kx, ky, domain, ops: Operators1D) -> QuadMesh:
    """Affine periodic mesh of a rectangle: constant metric terms per element."""
    xl, xr, yl, yr = _unpack_domain(domain)
    if kx < 1 or ky < 1:
        raise ValueError("element counts must be positive")
    npts = ops.rule.degree + 1
    dx = (xr - xl) / kx
    dy = (yr - yl) / ky
    nodes = ops.rule.nodes
    xc = xl + dx * (np.arange(kx) + 0.5)
    yc = yl + dy * (np.arange(ky) + 0.5)
    x = np.broadcast_to(
        xc[:, None, None, None] + 0.5 * dx * nodes[None, None, :, None], (kx, ky, npts, npts)
    ).copy()
    y = np.broadcast_to(
        yc[None, :, None, None] + 0.5 * dy * nodes[None, None, None, :], (kx, ky, npts, npts)
    ).copy()
    jac = np.full((kx, ky, npts, npts), 0.25 * dx * dy)
    ja1 = np.zeros((2, kx, ky, npts, npts))
    ja2 = np.zeros((2, kx, ky, npts, npts))
    ja1[0] = 0.5 * dy
    ja2[1] = 0.5 * dx
    return _finish_mesh(ops, kx, ky, (xl, xr, yl, yr), 0.0, x, y, jac, ja1, ja2)


def build_warped_mesh(kx, ky, domain, ops: Operators1D, amplitude: float) -> QuadMesh:
    """Sinusoidally warped periodic mesh via transfinite edge-curve elements."""
    xl, xr, yl, yr = _unpack_domain(domain)
    if kx < 1 or ky < 1:
        raise ValueError("element counts must be positive")
    if amplitude == 0.0:
        return build_cartesian_mesh(kx, ky, domain, ops)
    n = ops.rule.degree
    npts = n + 1
    lob = lobatto_rule(n).nodes if n >= 1 else np.array([-1.0, 1.0])

    # Normalized coordinates of the uniform grid lines.
    xhat = -1.0 + 2.0 * np.arange(kx + 1) / kx
    yhat = -1.0 + 2.0 * np.arange(ky + 1) / ky
    dxh = 2.0 / kx
    dyh = 2.0 / ky

    def warp(xh, yh):
        s = amplitude * np.sin(np.pi * xh) * np.sin(np.pi * yh)
        return xh + s, yh + s

    # Edge curves sampled at Lobatto points (ends pinned to vertices), so the
    # two elements sharing an edge see the identical polynomial.
    th = 0.5 * (lob + 1.0)
    xh_h = xhat[:-1, None, None] + dxh * th[None, None, :]  # (kx, 1, npts)
    sx, sy = warp(np.broadcast_to(xh_h, (kx, ky + 1, npts)),
                  np.broadcast_to(yhat[None, :, None], (kx, ky + 1, npts)))
    edges_h = np.stack([sx, sy])  # (2, kx, ky+1, npts): curves along x
    yh_v = yhat[None, :-1, None] + dyh * th[None, None, :]
    sx, sy = warp(np.broadcast_to(xhat[:, None, None], (kx + 1, ky, npts)),
                  np.broadcast_to(yh_v, (kx + 1, ky, npts)))
    edges_v = np.stack([sx, sy])  # (2, kx+1, ky, npts): curves along y
    vx, vy = warp(xhat[:, None], yhat[None, :])
    corners = np.stack([vx, vy])  # (2, kx+1, ky+1)

    # Interpolate edge curves from Lobatto samples to the rule nodes.
    interp = _interpolation_matrix(lob, ops.rule.nodes)
    gs = np.einsum("im,cxm->cxi", interp, edges_h[:, :, :-1].reshape(2, kx * ky, npts)).reshape(
        2, kx, ky, npts
    )
    gn = np.einsum("im,cxm->cxi", interp, edges_h[:, :, 1:].reshape(2, kx * ky, npts)).reshape(
        2, kx, ky, npts
    )
    gw = np.einsum("jm,cxm->cxj", interp, edges_v[:, :-1].reshape(2, kx * ky, npts)).reshape(
        2, kx, ky, npts
    )
    ge = np.einsum("jm,cxm->cxj", interp, edges_v[:, 1:].reshape(2, kx * ky, npts)).reshape(
        2, kx, ky, npts
    )
    c_sw = corners[:, :-1, :-1]
    c_se = corners[:, 1:, :-1]
    c_nw = corners[:, :-1, 1:]
    c_ne = corners[:, 1:, 1:]

    xi = ops.rule.nodes
    lo = 0.5 * (1.0 - xi)
    hi = 0.5 * (1.0 + xi)
    # Transfinite blend: faces reproduce the shared edge polynomials exactly.
    pos = (
        lo[None, None, None, :, None] * gw[:, :, :, None, :]
        + hi[None, None, None, :, None] * ge[:, :, :, None, :]
        + lo[None, None, None, None, :] * gs[:, :, :, :, None]
        + hi[None, None, None, None, :] * gn[:, :, :, :, None]
        - lo[None, None, None, :, None] * lo[None, None, None, None, :] * c_sw[:, :, :, None, None]
        - hi[None, None, None, :, None] * lo[None, None, None, None, :] * c_se[:, :, :, None, None]
        - lo[None, None, None, :, None] * hi[None, None, None, None, :] * c_nw[:, :, :, None, None]
        - hi[None, None, None, :, None] * hi[None, None, None, None, :] * c_ne[:, :, :, None, None]
    )
    xh_nodes, yh_nodes = pos[0], pos[1]

    # Scale normalized coordinates onto the physical rectangle.
    x = xl + 0.5 * (xh_nodes + 1.0) * (xr - xl)
    y = yl + 0.5 * (yh_nodes + 1.0) * (yr - yl)

    d = ops.D
    x_xi = np.einsum("im,xymj->xyij", d, x)
    x_eta = np.einsum("jm,xyim->xyij", d, x)
    y_xi = np.einsum("im,xymj->xyij", d, y)
    y_eta = np.einsum("jm,xyim->xyij", d, y)
    jac = x_xi * y_eta - x_eta * y_xi
    if np.min(jac) <= 0.0:
        raise InvalidWarpError(
            f"warp amplitude {amplitude:g} produces min Jacobian {float(np.min(jac)):.3e}"
        )
    ja1 = np.stack([y_eta, -x_eta])
    ja2 = np.stack([-y_xi, x_xi])
    return _finish_mesh(ops, kx, ky, (xl, xr, yl, yr), amplitude, x, y, jac, ja1, ja2)


def subcell_normals(ja, face_lo, face_hi, ops: Operators1D, axis: int) -> np.ndarray:
    """Subcell interface normals of one direction on the staggered grid.

    Starts from the low-side face normal and advances with the same
    recurrence as the staggered fluxes, applied to the averaged metric
    vectors. The recurrence must close onto the high-side face normal within
    tolerance (the constant-state analogue of flux closure); the end entries
    are then pinned to the face normals exactly.

    ``ja`` has shape (2, Kx, Ky, N+1, N+1); ``axis`` selects the reference
    direction (0 for xi, 1 for eta). Returns shape (2, Kx, Ky, N+2, N+1) for
    axis 0, (2, Kx, Ky, N+1, N+2) for axis 1.
    """
    return _subcell_normals(ja, face_lo, face_hi, ops, axis)[0]


def _subcell_normals(ja, face_lo, face_hi, ops: Operators1D, axis: int):
    if axis == 1:
        swapped, residual = _subcell_normals(ja.swapaxes(3, 4), face_lo, face_hi, ops, axis=0)
        return swapped.swapaxes(3, 4), residual
    lm, lp = ops.Vf[0], ops.Vf[1]
    s = ops.S
    avg = 0.5 * (ja[:, :, :, :, None, :] + ja[:, :, :, None, :, :])
    vol = np.einsum("ik,cxyikj->cxyij", s, avg)
    half_interp_lo = 0.5 * np.einsum("k,cxykj->cxyj", lm, ja)
    half_interp_hi = 0.5 * np.einsum("k,cxykj->cxyj", lp, ja)
    bracket_lo = 0.5 * ja - half_interp_lo[:, :, :, None, :] + face_lo[:, :, :, None, :]
    bracket_hi = 0.5 * ja - half_interp_hi[:, :, :, None, :] + face_hi[:, :, :, None, :]
    inc = vol - lm[None, None, None, :, None] * bracket_lo + lp[None, None, None, :, None] * bracket_hi

    npts = ja.shape[3]
    out = np.empty((2, ja.shape[1], ja.shape[2], npts + 1, ja.shape[4]))
    out[:, :, :, 0, :] = face_lo
    np.cumsum(inc, axis=3, out=out[:, :, :, 1:, :])
    out[:, :, :, 1:, :] += face_lo[:, :, :, None, :]
    residual = float(np.max(np.abs(out[:, :, :, -1, :] - face_hi)))
    scale = max(1.0, float(np.max(np.abs(ja))))
    if residual > SUBCELL_CLOSURE_TOL * scale:
        raise MetricInconsistencyError(
            f"subcell normal recurrence residual {residual:.3e} exceeds tolerance"
        )
    out[:, :, :, -1, :] = face_hi
    return out, residual


def _interpolation_matrix(from_nodes, to_points) -> np.ndarray:
    """Lagrange interpolation matrix A[i, m] = l_m(to_points[i])."""
    from_nodes = np.asarray(from_nodes, dtype=float)
    to_points = np.asarray(to_points, dtype=float)
    npts = len(from_nodes)
    a = np.ones((len(to_points), npts))
    for m in range(npts):
        for k in range(npts):
            if k != m:
                a[:, m] *= (to_points - from_nodes[k]) / (from_nodes[m] - from_nodes[k])
    return a


def _face_interp(ja, ops: Operators1D, axis: int):
    """Metric vectors interpolated to the two faces of one direction."""
    lm, lp = ops.Vf[0], ops.Vf[1]
    if axis == 0:
        lo = np.einsum("k,cxykj->cxyj", lm, ja)
        hi = np.einsum("k,cxykj->cxyj", lp, ja)
    else:
        lo = np.einsum("k,cxyik->cxyi", lm, ja)
        hi = np.einsum("k,cxyik->cxyi", lp, ja)
    return lo, hi


def _finish_mesh(ops, kx, ky, domain, amplitude, x, y, jac, ja1, ja2) -> QuadMesh:
    face_n1_w, face_n1_e = _face_interp(ja1, ops, axis=0)
    face_n2_s, face_n2_n = _face_interp(ja2, ops, axis=1)
    # Each physical face keeps a single normal (the high-side interpolation);
    # the interpolation mismatch between the two sides stays available as the
    # watertightness diagnostic.
    mismatch = max(
        float(np.max(np.abs(face_n1_w - np.roll(face_n1_e, 1, axis=1)))),
        float(np.max(np.abs(face_n2_s - np.roll(face_n2_n, 1, axis=2)))),
    )
    face_n1_w = np.roll(face_n1_e, 1, axis=1)
    face_n2_s = np.roll(face_n2_n, 1, axis=2)
    sub_n1, res1 = _subcell_normals(ja1, face_n1_w, face_n1_e, ops, axis=0)
    sub_n2, res2 = _subcell_normals(ja2, face_n2_s, face_n2_n, ops, axis=1)
    return QuadMesh(
        ops=ops, kx=kx, ky=ky, domain=domain, warp_amplitude=amplitude,
        x=x, y=y, jac=jac, ja1=ja1, ja2=ja2,
        face_n1_w=face_n1_w, face_n1_e=face_n1_e,
        face_n2_s=face_n2_s, face_n2_n=face_n2_n,
        sub_n1=sub_n1, sub_n2=sub_n2, sub_closure_residual=max(res1, res2),
        face_mismatch=mismatch,
    )


def _unpack_domain(domain):
    if len(domain) == 2:
        (xl, xr), (yl, yr) = domain
    else:
        xl, xr, yl, yr = domain
    if not (xr > xl and yr > yl):
        raise ValueError(f"degenerate rectangle {domain!r}")
    return xl, xr, yl, yr

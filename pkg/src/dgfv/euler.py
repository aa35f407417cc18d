"""Compressible Euler physics: state conversions, fluxes, wave speeds.

States are numpy arrays with the conserved variables stacked on the leading
axis: (rho, rho*v..., rho*E). All routines broadcast over arbitrary trailing
shapes, so the same kernels serve single states, whole elements, and whole
meshes. Directional quantities take a direction vector `n` stacked the same
way; `n` need not be a unit vector (fluxes are linear in it), which is how
metric-scaled fluxes on curvilinear meshes are formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBarStateError, EntropyInversionError, UnphysicalStateError


@dataclass(frozen=True)
class GasModel:
    """Ideal gas with constant heat-capacity ratio."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise UnphysicalStateError(f"gamma must exceed 1, got {self.gamma}")


def ndim(u) -> int:
    """Spatial dimension of a conserved-state array (1 or 2)."""
    return u.shape[0] - 2


def cons_state(rho, mom, rhoE, gas: GasModel | None = None) -> np.ndarray:
    """Stack conserved variables and validate positivity."""
    rho = np.asarray(rho, dtype=float)
    mom = np.atleast_1d(np.asarray(mom, dtype=float))
    if mom.ndim == rho.ndim:
        mom = mom[None]
    rhoE = np.asarray(rhoE, dtype=float)
    u = np.concatenate([rho[None], mom, rhoE[None]])
    validate_state(u, gas or GasModel())
    return u


def prim_to_cons(rho, vel, p, gas: GasModel) -> np.ndarray:
    """Conserved state from density, velocity vector and pressure."""
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    vel = np.atleast_1d(np.asarray(vel, dtype=float))
    if np.any(rho <= 0.0) or np.any(p <= 0.0):
        raise UnphysicalStateError(
            "nonpositive density or pressure in primitive data",
            rho=float(np.min(rho)), pressure=float(np.min(p)),
        )
    mom = rho[None] * vel
    rhoE = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel**2, axis=0)
    return np.concatenate([rho[None], mom, rhoE[None]])


def pressure(u, gas: GasModel) -> np.ndarray:
    rho = u[0]
    kinetic = 0.5 * np.sum(u[1:-1] ** 2, axis=0) / rho
    return (gas.gamma - 1.0) * (u[-1] - kinetic)


def velocity(u) -> np.ndarray:
    return u[1:-1] / u[0]


def validate_state(u, gas: GasModel):
    """Raise if any density or pressure is nonpositive."""
    rho = u[0]
    if not np.all(rho > 0.0):
        raise UnphysicalStateError("nonpositive density", rho=float(np.min(rho)))
    p = pressure(u, gas)
    if not np.all(p > 0.0):
        raise UnphysicalStateError(
            "nonpositive pressure", rho=float(np.min(rho)), pressure=float(np.min(p))
        )


def is_physical(u, gas: GasModel) -> bool:
    return bool(np.all(u[0] > 0.0) and np.all(pressure(u, gas) > 0.0))


def cons_to_prim(u, gas: GasModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, velocity, pressure); raises on unphysical input."""
    validate_state(u, gas)
    return u[0], velocity(u), pressure(u, gas)


def sound_speed(u, gas: GasModel) -> np.ndarray:
    return np.sqrt(gas.gamma * pressure(u, gas) / u[0])


def physical_entropy(u, gas: GasModel) -> np.ndarray:
    """s = ln(p rho^-gamma)."""
    return np.log(pressure(u, gas)) - gas.gamma * np.log(u[0])


def entropy_density(u, gas: GasModel) -> np.ndarray:
    """Mathematical entropy S(u) = -rho s / (gamma - 1)."""
    return -u[0] * physical_entropy(u, gas) / (gas.gamma - 1.0)


def cons_to_entropy(u, gas: GasModel) -> np.ndarray:
    """Entropy variables v = dS/du for S = -rho s/(gamma-1).

    v = ((gamma - s)/(gamma - 1) - beta |vel|^2, 2 beta vel, -2 beta),
    with beta = rho / (2 p). The last component is negative for every
    physical state.
    """
    rho, vel, p = cons_to_prim(u, gas)
    s = np.log(p) - gas.gamma * np.log(rho)
    beta = 0.5 * rho / p
    v0 = (gas.gamma - s) / (gas.gamma - 1.0) - beta * np.sum(vel**2, axis=0)
    return np.concatenate([v0[None], 2.0 * beta * vel, -2.0 * beta[None]])


def entropy_to_cons(v, gas: GasModel) -> np.ndarray:
    """Inverse of cons_to_entropy; raises if v is inadmissible."""
    v = np.asarray(v, dtype=float)
    vlast = v[-1]
    if not np.all(vlast < 0.0):
        raise EntropyInversionError(
            f"last entropy variable must be negative, min slack {float(np.max(vlast)):.3e}"
        )
    beta = -0.5 * vlast
    vel = v[1:-1] / (2.0 * beta)
    s = gas.gamma - (gas.gamma - 1.0) * (v[0] + beta * np.sum(vel**2, axis=0))
    # s = (1-gamma) ln rho - ln(2 beta)  =>  rho from s and beta.
    rho = np.exp((s + np.log(2.0 * beta)) / (1.0 - gas.gamma))
    p = rho / (2.0 * beta)
    if not (np.all(np.isfinite(rho)) and np.all(rho > 0.0) and np.all(p > 0.0)):
        raise EntropyInversionError("entropy inversion produced an unphysical state")
    return prim_to_cons(rho, vel, p, gas)


def physical_flux(u, n, gas: GasModel) -> np.ndarray:
    """Directional flux f(u) . n for a direction vector n (any magnitude)."""
    rho, vel, p = cons_to_prim(u, gas)
    n = _as_direction(n, ndim(u))
    vn = np.sum(vel * n, axis=0)
    mass = rho * vn
    mom = u[1:-1] * vn + p[None] * n
    energy = (u[-1] + p) * vn
    return np.concatenate([mass[None], mom, energy[None]])


def entropy_potential(u, n, gas: GasModel) -> np.ndarray:
    """psi = rho (vel . n), the flux potential paired with the entropy variables."""
    n = _as_direction(n, ndim(u))
    return np.sum(u[1:-1] * n, axis=0)


def log_mean(a, b) -> np.ndarray:
    """Logarithmic mean (b - a)/(ln b - ln a), stable near the diagonal.

    Uses a 4-term series in ((a-b)/(a+b))^2 when |b - a|/(a + b) < 1e-4 and
    the equivalent atanh form otherwise; both branches are symmetric in
    (a, b) down to rounding, which the two-point flux symmetry tests rely on.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise UnphysicalStateError("log_mean requires positive arguments")
    total = a + b
    g = np.abs(a - b) / total
    u = g * g
    series = total / (2.0 * (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0))
    # ln(b/a) = 2 atanh((b - a)/(b + a)); |.| keeps the quotient even in the
    # argument order.
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = total * g / (2.0 * np.arctanh(g))
    return np.where(g < 1e-4, series, direct)


def flux_average(uL, uR, n, gas: GasModel) -> np.ndarray:
    """Central flux: arithmetic mean of the two physical fluxes."""
    return 0.5 * (physical_flux(uL, n, gas) + physical_flux(uR, n, gas))


def flux_chandrashekar(uL, uR, n, gas: GasModel) -> np.ndarray:
    """Entropy-conservative, kinetic-energy-preserving two-point flux.

    Logarithmic means of density and beta = rho/(2p), arithmetic means
    elsewhere. Symmetric in its arguments and consistent; satisfies the
    two-point entropy condition (v_R - v_L) . f = psi_R - psi_L for the
    entropy pair used in this package (property-tested, not assumed).
    """
    dim = ndim(uL)
    n = _as_direction(n, dim)
    rhoL, velL, pL = uL[0], velocity(uL), pressure(uL, gas)
    rhoR, velR, pR = uR[0], velocity(uR), pressure(uR, gas)
    betaL = 0.5 * rhoL / pL
    betaR = 0.5 * rhoR / pR

    rho_log = log_mean(rhoL, rhoR)
    beta_log = log_mean(betaL, betaR)
    vel_avg = 0.5 * (velL + velR)
    p_avg = 0.5 * (rhoL + rhoR) / (betaL + betaR)
    vel2_avg = 0.5 * (np.sum(velL**2, axis=0) + np.sum(velR**2, axis=0))

    vn_avg = np.sum(vel_avg * n, axis=0)
    mass = rho_log * vn_avg
    mom = mass[None] * vel_avg + p_avg[None] * n
    energy = mass * (0.5 / ((gas.gamma - 1.0) * beta_log) - 0.5 * vel2_avg) + np.sum(
        mom * vel_avg, axis=0
    )
    return np.concatenate([mass[None], mom, energy[None]])


def max_wavespeed(uL, uR, n, gas: GasModel) -> np.ndarray:
    """lambda_max = max(|vL.n| + cL, |vR.n| + cR) for a unit direction n."""
    n = _as_direction(n, ndim(uL))
    lamL = np.abs(np.sum(velocity(uL) * n, axis=0)) + sound_speed(uL, gas)
    lamR = np.abs(np.sum(velocity(uR) * n, axis=0)) + sound_speed(uR, gas)
    return np.maximum(lamL, lamR)


def flux_llf(uL, uR, n, gas: GasModel) -> np.ndarray:
    """Local Lax-Friedrichs flux; dissipation scales with |n|."""
    dim = ndim(uL)
    norm = _direction_norm(n, dim)
    safe = np.where(norm > 0.0, norm, 1.0)
    nhat = _as_direction(n, dim) / safe
    lam = max_wavespeed(uL, uR, nhat, gas)
    return flux_average(uL, uR, n, gas) - 0.5 * (lam * norm) * (uR - uL)


def bar_state(ui, uj, n, gas: GasModel) -> np.ndarray:
    """First-order intermediate state of the LLF Riemann fan.

    u_bar = (ui + uj)/2 - n.(f(uj) - f(ui)) / (2 lambda_max) with n the unit
    direction from i to j. Symmetric under (i, j) exchange; its density is
    positive whenever both inputs are physical.
    """
    dim = ndim(ui)
    n = _as_direction(n, dim)
    norm = _direction_norm(n, dim)
    nhat = n / norm
    lam = max_wavespeed(ui, uj, nhat, gas)
    dflux = physical_flux(uj, nhat, gas) - physical_flux(ui, nhat, gas)
    if np.any(lam <= 0.0):
        if np.max(np.abs(dflux)) > 0.0:
            raise DegenerateBarStateError("zero wave speed with unequal fluxes")
        lam = np.where(lam > 0.0, lam, 1.0)
    return 0.5 * (ui + uj) - dflux / (2.0 * lam)


def _as_direction(n, dim) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.ndim == 0:
        if dim != 1:
            raise ValueError("scalar direction only valid in 1D")
        return n[None]
    if n.shape[0] != dim:
        raise ValueError(f"direction has {n.shape[0]} components, state has {dim}")
    return n


def _direction_norm(n, dim) -> np.ndarray:
    n = _as_direction(n, dim)
    return np.sqrt(np.sum(n**2, axis=0))

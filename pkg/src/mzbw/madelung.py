"""Hydrodynamic decomposition of scalar wavefunctions.

psi = sqrt(rho) exp(i phi / hbar) splits a wavefunction into a density rho and
an action-valued phase phi.  The local momentum p = grad(phi) is computed from
the probability-current bilinear

    p = hbar * Im(conj(psi) grad(psi)) / rho

which needs no phase unwrapping and is exact wherever rho > 0.  The quantum
potential comes in two algebraically equal forms,

    Q = (hbar^2 / 4m) [ (grad(rho)/rho)^2 / 2 - lap(rho)/rho ]
      = -(hbar^2 / 2m) lap(sqrt(rho)) / sqrt(rho)

and both are computed so they can be checked against each other.  Points with
rho <= NODE_EPS * max(rho) are node points: every divided quantity is set to
zero there and reported through a boolean mask.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fields import (
    ComplexField,
    PhysicalParams,
    RealField,
    VectorField,
    _axis_derivative,
    _check_backend,
    _laplacian_values,
)

NODE_EPS = 1e-12


def node_mask(rho_values: np.ndarray) -> np.ndarray:
    """True where the density is too small to divide by."""
    return rho_values <= NODE_EPS * np.max(rho_values)


@dataclass(frozen=True)
class MadelungFields:
    rho: RealField
    phase: RealField  # hbar * principal arg(psi); diagnostic, wrapped to (-pi*hbar, pi*hbar]
    momentum: VectorField
    node_mask: np.ndarray


@dataclass(frozen=True)
class QuantumPotential:
    q: RealField  # sqrt-rho form
    q_log_form: RealField  # log-derivative (bracket) form
    node_mask: np.ndarray


@dataclass(frozen=True)
class ResidualField:
    values: RealField
    node_mask: np.ndarray


def decompose(
    psi: ComplexField, params: PhysicalParams, backend: str = "spectral"
) -> MadelungFields:
    _check_backend(backend)
    grid = psi.grid
    rho = (psi.values.real**2 + psi.values.imag**2)
    if np.max(rho) == 0.0:
        raise ValueError("wavefunction is identically zero")
    norm = float(np.sum(rho) * grid.cell_volume)
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(f"wavefunction norm is {norm:.8g}, not 1", RuntimeWarning, stacklevel=2)
    mask = node_mask(rho)
    safe = np.where(mask, 1.0, rho)
    momentum = np.zeros((3,) + grid.shape)
    for axis in range(grid.dims):
        dpsi = _axis_derivative(psi.values, grid, axis, backend)
        bilinear = (np.conj(psi.values) * dpsi).imag
        momentum[axis] = np.where(mask, 0.0, params.hbar * bilinear / safe)
    phase = params.hbar * np.angle(psi.values)
    return MadelungFields(
        rho=RealField(grid, rho),
        phase=RealField(grid, phase),
        momentum=VectorField(grid, momentum),
        node_mask=mask,
    )


def quantum_potential(
    rho: RealField, params: PhysicalParams, backend: str = "spectral"
) -> QuantumPotential:
    _check_backend(backend)
    grid = rho.grid
    if np.min(rho.values) < 0.0:
        raise ValueError("density must be non-negative")
    if np.max(rho.values) == 0.0:
        raise ValueError("density is identically zero")
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)

    sqrt_rho = np.sqrt(rho.values)
    safe_sqrt = np.where(mask, 1.0, sqrt_rho)
    lap_sqrt = _laplacian_values(sqrt_rho, grid, backend)
    q_sqrt = np.where(mask, 0.0, -(params.hbar**2 / (2.0 * params.mass)) * lap_sqrt / safe_sqrt)

    bracket = _log_form_bracket(rho.values, safe, grid, backend)
    coeff = (params.hbar * params.hbar) / (4.0 * params.mass)
    q_log = np.where(mask, 0.0, coeff * bracket)

    return QuantumPotential(
        q=RealField(grid, q_sqrt),
        q_log_form=RealField(grid, q_log),
        node_mask=mask,
    )


def _log_form_bracket(
    rho_values: np.ndarray, safe_rho: np.ndarray, grid, backend: str
) -> np.ndarray:
    """(grad rho / rho)^2 / 2 - lap(rho)/rho, with safe division."""
    grad_sq = np.zeros(grid.shape)
    for axis in range(grid.dims):
        d = _axis_derivative(rho_values, grid, axis, backend)
        grad_sq = grad_sq + (d / safe_rho) ** 2
    lap = _laplacian_values(rho_values, grid, backend)
    return 0.5 * grad_sq - lap / safe_rho


def internal_kinetic_density(
    rho: RealField, params: PhysicalParams, backend: str = "spectral"
) -> RealField:
    """(hbar^2 / 8m) (grad rho / rho)^2, the kinetic energy density of the
    internal (Zitterbewegung) motion.  Equal to m * zbw_speed^2 / 2 pointwise."""
    _check_backend(backend)
    grid = rho.grid
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)
    grad_sq = np.zeros(grid.shape)
    for axis in range(grid.dims):
        d = _axis_derivative(rho.values, grid, axis, backend)
        grad_sq = grad_sq + (d / safe) ** 2
    coeff = params.hbar * params.hbar / (8.0 * params.mass)
    return RealField(grid, np.where(mask, 0.0, coeff * grad_sq))


def zbw_speed(rho: RealField, params: PhysicalParams, backend: str = "spectral") -> RealField:
    """|V| = (hbar/2) |grad rho| / (m rho)."""
    _check_backend(backend)
    grid = rho.grid
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)
    grad_sq = np.zeros(grid.shape)
    for axis in range(grid.dims):
        d = _axis_derivative(rho.values, grid, axis, backend)
        grad_sq = grad_sq + d * d
    speed = 0.5 * params.hbar * np.sqrt(grad_sq) / (params.mass * safe)
    return RealField(grid, np.where(mask, 0.0, speed))


# ---------------------------------------------------------------------------
# snapshot-based residuals


def _phase_rate(
    prev: ComplexField, mid: ComplexField, nxt: ComplexField, dt: float, mask: np.ndarray, hbar: float
) -> np.ndarray:
    """Central-difference d(phi)/dt from phase increments between snapshots.

    Increments are principal args of ratio bilinears, so no global unwrapping
    is needed; a pointwise increment at the +/-pi boundary means the snapshot
    spacing aliases the phase evolution and the input is rejected."""
    d_plus = np.angle(nxt.values * np.conj(mid.values))
    d_minus = np.angle(mid.values * np.conj(prev.values))
    jump = max(np.max(np.abs(d_plus[~mask]), initial=0.0), np.max(np.abs(d_minus[~mask]), initial=0.0))
    if jump >= np.pi * (1.0 - 1e-9):
        raise ValueError(
            f"phase jump {jump:.6f} rad between snapshots reaches pi; time spacing too large"
        )
    return hbar * (d_plus + d_minus) / (2.0 * dt)


def _snapshot_triple(snapshots) -> tuple[ComplexField, ComplexField, ComplexField]:
    prev, mid, nxt = snapshots
    if not (prev.grid == mid.grid == nxt.grid):
        raise ValueError("snapshots must share a grid")
    return prev, mid, nxt


def hj_terms(
    snapshots,
    dt: float,
    potential: RealField | None,
    params: PhysicalParams,
    backend: str = "spectral",
):
    """Shared pieces of the phase-evolution residual: (dphi_dt, kinetic,
    bracket, u, mask) evaluated at the middle snapshot.  The bracket is the
    log-derivative quantum-potential form without its hbar^2/4m coefficient."""
    _check_backend(backend)
    if dt <= 0:
        raise ValueError(f"snapshot spacing must be positive, got {dt}")
    prev, mid, nxt = _snapshot_triple(snapshots)
    grid = mid.grid
    rho = mid.values.real**2 + mid.values.imag**2
    mask = node_mask(rho) | node_mask(prev.values.real**2 + prev.values.imag**2) | node_mask(
        nxt.values.real**2 + nxt.values.imag**2
    )
    safe = np.where(mask, 1.0, rho)

    dphi_dt = _phase_rate(prev, mid, nxt, dt, mask, params.hbar)

    kinetic = np.zeros(grid.shape)
    for axis in range(grid.dims):
        dpsi = _axis_derivative(mid.values, grid, axis, backend)
        p_axis = params.hbar * (np.conj(mid.values) * dpsi).imag / safe
        kinetic = kinetic + p_axis * p_axis
    kinetic = kinetic / (2.0 * params.mass)

    bracket = _log_form_bracket(rho, safe, grid, backend)
    u = np.zeros(grid.shape) if potential is None else potential.values
    return dphi_dt, kinetic, bracket, u, mask


def hj_residual(
    snapshots,
    dt: float,
    potential: RealField | None,
    params: PhysicalParams,
    backend: str = "spectral",
) -> ResidualField:
    """d(phi)/dt + (grad phi)^2/2m + Q + U at the middle snapshot, Q in the
    log-derivative form.  Zero (to discretization error) along solutions."""
    dphi_dt, kinetic, bracket, u, mask = hj_terms(snapshots, dt, potential, params, backend)
    coeff = (params.hbar * params.hbar) / (4.0 * params.mass)
    residual = np.where(mask, 0.0, dphi_dt + kinetic + coeff * bracket + u)
    grid = snapshots[1].grid
    return ResidualField(values=RealField(grid, residual), node_mask=mask)


def continuity_residual(
    snapshots, dt: float, params: PhysicalParams, backend: str = "spectral"
) -> ResidualField:
    """d(rho)/dt + div(rho grad(phi)/m) at the middle snapshot.  The flux is the
    probability current hbar Im(conj(psi) grad psi)/m, which is smooth through
    nodes, so the residual carries no masked-out points."""
    _check_backend(backend)
    if dt <= 0:
        raise ValueError(f"snapshot spacing must be positive, got {dt}")
    prev, mid, nxt = _snapshot_triple(snapshots)
    grid = mid.grid
    rho_prev = prev.values.real**2 + prev.values.imag**2
    rho_next = nxt.values.real**2 + nxt.values.imag**2
    drho_dt = (rho_next - rho_prev) / (2.0 * dt)
    div_flux = np.zeros(grid.shape)
    for axis in range(grid.dims):
        dpsi = _axis_derivative(mid.values, grid, axis, backend)
        flux = params.hbar * (np.conj(mid.values) * dpsi).imag / params.mass
        div_flux = div_flux + _axis_derivative(flux, grid, axis, backend)
    values = RealField(grid, drho_dt + div_flux)
    return ResidualField(values=values, node_mask=np.zeros(grid.shape, dtype=bool))


@dataclass(frozen=True)
class LagrangianDensity:
    density: RealField  # internal term as (hbar^2/8m)(grad rho/rho)^2
    density_koenig: RealField  # internal term as m V^2 / 2 with V the zbw speed
    node_mask: np.ndarray


def lagrangian_density(
    snapshots,
    dt: float,
    potential: RealField | None,
    params: PhysicalParams,
    backend: str = "spectral",
) -> LagrangianDensity:
    """-(d(phi)/dt + (grad phi)^2/2m + internal + U) rho, in both internal-term
    forms.  Vanishes pointwise for on-shell plane waves; for general on-shell
    states only its integral vanishes (the internal term differs from Q by a
    total divergence)."""
    dphi_dt, kinetic, bracket, u, mask = hj_terms(snapshots, dt, potential, params, backend)
    grid = snapshots[1].grid
    rho = snapshots[1].values.real**2 + snapshots[1].values.imag**2
    safe = np.where(mask, 1.0, rho)

    grad_sq = np.zeros(grid.shape)
    for axis in range(grid.dims):
        d = _axis_derivative(rho, grid, axis, backend)
        grad_sq = grad_sq + (d / safe) ** 2
    internal = (params.hbar * params.hbar / (8.0 * params.mass)) * grad_sq

    speed = 0.5 * params.hbar * np.sqrt(grad_sq) / params.mass
    internal_koenig = 0.5 * params.mass * speed * speed

    common = dphi_dt + kinetic + u
    base = np.where(mask, 0.0, -(common + internal) * rho)
    koenig = np.where(mask, 0.0, -(common + internal_koenig) * rho)
    return LagrangianDensity(
        density=RealField(grid, base),
        density_koenig=RealField(grid, koenig),
        node_mask=mask,
    )

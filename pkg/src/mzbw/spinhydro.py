"""Pauli-spinor hydrodynamics.

A spinor wavefunction carries, besides density and phase, a local spin
direction s(x) with |s| = hbar/2.  The probability current then splits into a
drift part (p - eA)/m and an internal circulation

    V = curl(rho s) / (m rho)

whose divergence-free current curl(rho s)/m is the magnetization current of
the spin density.  For a position-independent s this reduces to
V = grad(rho) x s / (m rho), and |V| = (hbar/2) |grad rho| / (m rho): the
Zitterbewegung speed of the scalar theory.

Quadratic identities, constraint residuals, and the kinetic-energy split are
provided as measured fields so each one can be gated and reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    ComplexField,
    PhysicalParams,
    RealField,
    SpinorField,
    VectorField,
    _axis_derivative,
    _check_backend,
    curl,
    dot,
    gradient,
    laplacian,
)
from .madelung import ResidualField, hj_terms, node_mask
from .states import spin_vector


@dataclass(frozen=True)
class SpinVector:
    s: VectorField  # |s| = hbar/2 wherever rho is unmasked
    rho: RealField
    node_mask: np.ndarray


@dataclass(frozen=True)
class PauliCurrent:
    total: VectorField
    convective: VectorField
    diamagnetic: VectorField
    spin: VectorField  # curl(rho s)/m, divergence-free


@dataclass(frozen=True)
class VelocityDecomposition:
    drift: VectorField  # (p - eA)/m
    zbw: VectorField  # curl(rho s)/(m rho)
    total: VectorField
    momentum: VectorField
    spin_current: VectorField  # rho * zbw without the divide, = curl(rho s)/m
    node_mask: np.ndarray


@dataclass(frozen=True)
class HestenesResidual:
    div_rho_s: RealField
    grad_rho_dot_s: RealField
    div_max: float
    div_weighted: float
    dot_max: float
    dot_weighted: float


@dataclass(frozen=True)
class VsqForms:
    full: RealField  # ((grad rho)^2 s^2 - (grad rho . s)^2) / (m rho)^2
    reduced: RealField  # s^2 (grad rho / m rho)^2
    reduced_valid: bool  # reduced form asserted only when grad(rho).s ~ 0
    gate_residual: float  # measured max |grad(rho) . s|
    node_mask: np.ndarray


@dataclass(frozen=True)
class EnergyBudget:
    translational: float
    internal: float
    potential: float
    total: float
    internal_zbw: float  # same internal energy through the zbw speed


def density(psi: SpinorField) -> RealField:
    rho = np.einsum("c...,c...->...", np.conj(psi.values), psi.values).real
    return RealField(psi.grid, rho)


def _spin_bilinear(psi: SpinorField, hbar: float) -> np.ndarray:
    """rho * s = (hbar/2) psi^dag sigma psi, computed without dividing by rho."""
    up, down = psi.values[0], psi.values[1]
    mixed = np.conj(up) * down
    out = np.empty((3,) + psi.grid.shape)
    out[0] = 2.0 * mixed.real
    out[1] = 2.0 * mixed.imag
    out[2] = (up.real**2 + up.imag**2) - (down.real**2 + down.imag**2)
    return (hbar / 2.0) * out


def spin_density(psi: SpinorField, params: PhysicalParams) -> SpinVector:
    """Local spin vector s = psi^dag s_op psi / rho; zero on the node mask."""
    rho = density(psi)
    if np.max(rho.values) == 0.0:
        raise ValueError("spinor wavefunction is identically zero")
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)
    s = _spin_bilinear(psi, params.hbar) / safe
    s[:, mask] = 0.0
    return SpinVector(s=VectorField(psi.grid, s), rho=rho, node_mask=mask)


def _convective_bilinear(psi: SpinorField, params: PhysicalParams, backend: str) -> np.ndarray:
    """hbar Im(psi^dag grad psi), i.e. rho * p, smooth through nodes."""
    grid = psi.grid
    out = np.zeros((3,) + grid.shape)
    for axis in range(grid.dims):
        acc = np.zeros(grid.shape)
        for c in range(2):
            dpsi = _axis_derivative(psi.values[c], grid, axis, backend)
            acc = acc + (np.conj(psi.values[c]) * dpsi).imag
        out[axis] = params.hbar * acc
    return out


def pauli_current(
    psi: SpinorField,
    params: PhysicalParams,
    vector_potential: VectorField | None = None,
    backend: str = "spectral",
) -> PauliCurrent:
    """j = (hbar/m) Im(psi^dag grad psi) - (e A / m) rho + curl(rho s)/m."""
    _check_backend(backend)
    grid = psi.grid
    rho = density(psi).values
    convective = _convective_bilinear(psi, params, backend) / params.mass
    if vector_potential is None:
        diamagnetic = np.zeros((3,) + grid.shape)
    else:
        if vector_potential.grid != grid:
            raise ValueError("vector potential must live on the wavefunction grid")
        diamagnetic = -(params.charge / params.mass) * vector_potential.values * rho
    spin_term = curl(VectorField(grid, _spin_bilinear(psi, params.hbar)), backend).values / params.mass
    total = convective + diamagnetic + spin_term
    return PauliCurrent(
        total=VectorField(grid, total),
        convective=VectorField(grid, convective),
        diamagnetic=VectorField(grid, diamagnetic),
        spin=VectorField(grid, spin_term),
    )


def velocity_decomposition(
    psi: SpinorField,
    params: PhysicalParams,
    vector_potential: VectorField | None = None,
    backend: str = "spectral",
) -> VelocityDecomposition:
    """Split the local velocity into drift (p - eA)/m and internal circulation
    curl(rho s)/(m rho).  rho * total reproduces the Pauli current."""
    _check_backend(backend)
    grid = psi.grid
    rho = density(psi).values
    if np.max(rho) == 0.0:
        raise ValueError("spinor wavefunction is identically zero")
    mask = node_mask(rho)
    safe = np.where(mask, 1.0, rho)

    rho_p = _convective_bilinear(psi, params, backend)
    momentum = rho_p / safe
    momentum[:, mask] = 0.0

    if vector_potential is None:
        drift = momentum / params.mass
    else:
        if vector_potential.grid != grid:
            raise ValueError("vector potential must live on the wavefunction grid")
        drift = (momentum - params.charge * vector_potential.values) / params.mass
        drift[:, mask] = 0.0

    spin_current = curl(VectorField(grid, _spin_bilinear(psi, params.hbar)), backend).values / params.mass
    zbw = spin_current / safe
    zbw[:, mask] = 0.0

    return VelocityDecomposition(
        drift=VectorField(grid, drift),
        zbw=VectorField(grid, zbw),
        total=VectorField(grid, drift + zbw),
        momentum=VectorField(grid, momentum),
        spin_current=VectorField(grid, spin_current),
        node_mask=mask,
    )


def zbw_velocity_uniform(
    rho: RealField, s, params: PhysicalParams, backend: str = "spectral"
) -> VectorField:
    """V = grad(rho) x s / (m rho) for a position-independent spin vector s.
    Agrees with the curl form because curl(rho s) = grad(rho) x s when s is
    constant."""
    _check_backend(backend)
    s = np.asarray(s, dtype=float)
    if s.shape != (3,):
        raise ValueError(f"constant spin vector must have shape (3,), got {s.shape}")
    grid = rho.grid
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)
    grad_rho = gradient(rho, backend).values
    out = np.empty((3,) + grid.shape)
    out[0] = grad_rho[1] * s[2] - grad_rho[2] * s[1]
    out[1] = grad_rho[2] * s[0] - grad_rho[0] * s[2]
    out[2] = grad_rho[0] * s[1] - grad_rho[1] * s[0]
    out /= params.mass * safe
    out[:, mask] = 0.0
    return VectorField(grid, out)


def hestenes_residual(
    rho: RealField, s: VectorField, backend: str = "spectral"
) -> HestenesResidual:
    """Residuals of the non-relativistic Hestenes constraints div(rho s) = 0
    and grad(rho) . s = 0.  Both vanish identically for planar densities with
    spin normal to the plane; a generic 3D density violates the second."""
    _check_backend(backend)
    if rho.grid != s.grid:
        raise ValueError("rho and s must share a grid")
    grid = rho.grid
    rho_s = VectorField(grid, rho.values * s.values)
    div_vals = np.zeros(grid.shape)
    for axis in range(grid.dims):
        div_vals = div_vals + _axis_derivative(rho_s.values[axis], grid, axis, backend)
    grad_rho = gradient(rho, backend)
    dot_vals = dot(grad_rho, s).values

    def weighted(res: np.ndarray) -> float:
        return float(np.sqrt(np.sum(rho.values * res * res) * grid.cell_volume))

    return HestenesResidual(
        div_rho_s=RealField(grid, div_vals),
        grad_rho_dot_s=RealField(grid, dot_vals),
        div_max=float(np.max(np.abs(div_vals))),
        div_weighted=weighted(div_vals),
        dot_max=float(np.max(np.abs(dot_vals))),
        dot_weighted=weighted(dot_vals),
    )


def vsq_from_spin(
    rho: RealField,
    s: VectorField,
    params: PhysicalParams,
    backend: str = "spectral",
    gate_tol: float = 1e-10,
) -> VsqForms:
    """V^2 from the cross-product identity (a x b)^2 = a^2 b^2 - (a.b)^2:

        V^2 = ((grad rho)^2 s^2 - (grad rho . s)^2) / (m rho)^2

    and its reduced form s^2 (grad rho / m rho)^2, which drops the (grad rho . s)
    term and is only asserted when the measured grad(rho).s residual passes the
    gate."""
    _check_backend(backend)
    if rho.grid != s.grid:
        raise ValueError("rho and s must share a grid")
    grid = rho.grid
    mask = node_mask(rho.values)
    safe = np.where(mask, 1.0, rho.values)
    grad_rho = gradient(rho, backend)
    grad_sq = dot(grad_rho, grad_rho).values
    s_sq = dot(s, s).values
    dot_term = dot(grad_rho, s).values
    denom = (params.mass * safe) ** 2
    full = np.where(mask, 0.0, (grad_sq * s_sq - dot_term**2) / denom)
    reduced = np.where(mask, 0.0, s_sq * grad_sq / denom)
    gate = float(np.max(np.abs(dot_term)))
    return VsqForms(
        full=RealField(grid, full),
        reduced=RealField(grid, reduced),
        reduced_valid=bool(gate <= gate_tol),
        gate_residual=gate,
        node_mask=mask,
    )


def koenig_energy(
    psi: ComplexField | SpinorField,
    potential: RealField | None,
    params: PhysicalParams,
    chi=None,
    backend: str = "spectral",
) -> EnergyBudget:
    """Kinetic-energy split E = translational + internal + potential.

    translational integrates rho p^2 / 2m, internal integrates
    (hbar^2/8m)(grad rho)^2/rho.  internal_zbw recomputes the internal part as
    integral of rho m V^2 / 2; for a scalar psi the velocity V comes from the
    constant spinor chi (default spin-up) via the uniform-s form, for a full
    spinor field from curl(rho s)/(m rho)."""
    _check_backend(backend)
    grid = psi.grid
    if isinstance(psi, SpinorField):
        rho = density(psi).values
        rho_p = _convective_bilinear(psi, params, backend)
        rho_s = _spin_bilinear(psi, params.hbar)
        spin_cur = curl(VectorField(grid, rho_s), backend).values / params.mass
    else:
        rho = psi.values.real**2 + psi.values.imag**2
        rho_p = np.zeros((3,) + grid.shape)
        for axis in range(grid.dims):
            dpsi = _axis_derivative(psi.values, grid, axis, backend)
            rho_p[axis] = params.hbar * (np.conj(psi.values) * dpsi).imag
        if chi is None:
            s_const = np.array([0.0, 0.0, params.hbar / 2.0])
        else:
            s_const = spin_vector(np.asarray(chi), params)
        grad_rho = np.zeros((3,) + grid.shape)
        for axis in range(grid.dims):
            grad_rho[axis] = _axis_derivative(rho, grid, axis, backend)
        spin_cur = np.empty((3,) + grid.shape)
        spin_cur[0] = grad_rho[1] * s_const[2] - grad_rho[2] * s_const[1]
        spin_cur[1] = grad_rho[2] * s_const[0] - grad_rho[0] * s_const[2]
        spin_cur[2] = grad_rho[0] * s_const[1] - grad_rho[1] * s_const[0]
        spin_cur /= params.mass

    if np.max(rho) == 0.0:
        raise ValueError("wavefunction is identically zero")
    mask = node_mask(rho)
    safe = np.where(mask, 1.0, rho)
    vol = grid.cell_volume

    p_sq_rho = np.einsum("c...,c...->...", rho_p, rho_p) / safe
    translational = float(np.sum(np.where(mask, 0.0, p_sq_rho)) * vol / (2.0 * params.mass))

    grad_rho_sq = np.zeros(grid.shape)
    for axis in range(grid.dims):
        d = _axis_derivative(rho, grid, axis, backend)
        grad_rho_sq = grad_rho_sq + d * d
    internal_density = np.where(mask, 0.0, grad_rho_sq / safe)
    internal = float(
        np.sum(internal_density) * vol * params.hbar * params.hbar / (8.0 * params.mass)
    )

    zbw_density = np.einsum("c...,c...->...", spin_cur, spin_cur) / safe
    internal_zbw = float(np.sum(np.where(mask, 0.0, zbw_density)) * vol * params.mass / 2.0)

    if potential is None:
        pot = 0.0
    else:
        if potential.grid != grid:
            raise ValueError("potential must live on the wavefunction grid")
        pot = float(np.sum(rho * potential.values) * vol)

    return EnergyBudget(
        translational=translational,
        internal=internal,
        potential=pot,
        total=translational + internal + pot,
        internal_zbw=internal_zbw,
    )


def spin_schrodinger_residual(
    psi: ComplexField,
    energy: float,
    params: PhysicalParams,
    s_mag: float | None = None,
    backend: str = "spectral",
) -> RealField:
    """| -(2 s^2 / m) lap(psi) - E psi |.  With 2|s| = hbar the coefficient is
    hbar^2/2m and this is the free stationary Schroedinger residual."""
    _check_backend(backend)
    if s_mag is None:
        s_mag = params.hbar / 2.0
    coeff = 2.0 * s_mag * s_mag / params.mass
    lap = laplacian(psi, backend).values
    res = -coeff * lap - energy * psi.values
    return RealField(psi.grid, np.abs(res))


def spin_hj_residual(
    snapshots,
    dt: float,
    potential: RealField | None,
    params: PhysicalParams,
    s_mag: float | None = None,
    backend: str = "spectral",
) -> ResidualField:
    """Phase-evolution residual with the quantum term written through the spin
    magnitude, coefficient s^2/m instead of hbar^2/4m.  At s = hbar/2 it is
    the plain Madelung residual."""
    if s_mag is None:
        s_mag = params.hbar / 2.0
    dphi_dt, kinetic, bracket, u, mask = hj_terms(snapshots, dt, potential, params, backend)
    coeff = (s_mag * s_mag) / params.mass
    residual = np.where(mask, 0.0, dphi_dt + kinetic + coeff * bracket + u)
    grid = snapshots[1].grid
    return ResidualField(values=RealField(grid, residual), node_mask=mask)


def rho_total_current(decomp: VelocityDecomposition, rho: RealField) -> VectorField:
    """rho * total velocity, for direct comparison with the Pauli current."""
    return VectorField(rho.grid, rho.values * decomp.total.values)

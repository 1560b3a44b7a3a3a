"""Hydrodynamic decomposition of wavefunctions on periodic grids.

The density and phase of a complex wavefunction define a fluid: a drift
velocity from the phase gradient, a quantum potential from the density
curvature, and, once a spin direction is attached, an internal circulation
around the density gradients whose magnitude carries the same energy as the
quantum potential term.  This package computes those fields with spectral or
second-order finite-difference derivatives, checks the identities that tie
them together, evolves states with a split-step propagator, and transports
trajectory ensembles along the resulting velocity fields.
"""

from .evolve import (
    EvolutionConfig,
    Observables,
    SnapshotSeries,
    fidelity,
    observables,
    propagate,
    stationary_residual,
)
from .fields import (
    BACKENDS,
    ComplexField,
    Grid,
    PhysicalParams,
    RealField,
    SpinorField,
    VectorField,
    cross,
    curl,
    divergence,
    dot,
    gradient,
    integrate,
    laplacian,
    magnitude,
    overlap,
)
from .madelung import (
    NODE_EPS,
    LagrangianDensity,
    MadelungFields,
    QuantumPotential,
    ResidualField,
    continuity_residual,
    decompose,
    hj_residual,
    internal_kinetic_density,
    lagrangian_density,
    node_mask,
    quantum_potential,
    zbw_speed,
)
from .spinhydro import (
    EnergyBudget,
    HestenesResidual,
    PauliCurrent,
    SpinVector,
    VelocityDecomposition,
    VsqForms,
    hestenes_residual,
    koenig_energy,
    pauli_current,
    rho_total_current,
    spin_density,
    spin_hj_residual,
    spin_schrodinger_residual,
    velocity_decomposition,
    vsq_from_spin,
    zbw_velocity_uniform,
)
from .states import (
    attach_spinor,
    constant_spinor,
    gaussian,
    harmonic_ground,
    harmonic_potential,
    plane_wave,
    random_smooth_state,
    random_spinor_field,
    spin_vector,
)
from .trajectories import (
    EquivarianceReport,
    TrajectorySet,
    advect,
    equivariance_check,
    sample_initial,
)

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "ComplexField",
    "EnergyBudget",
    "EquivarianceReport",
    "EvolutionConfig",
    "Grid",
    "HestenesResidual",
    "LagrangianDensity",
    "MadelungFields",
    "NODE_EPS",
    "Observables",
    "PauliCurrent",
    "PhysicalParams",
    "QuantumPotential",
    "RealField",
    "ResidualField",
    "SnapshotSeries",
    "SpinVector",
    "SpinorField",
    "TrajectorySet",
    "VectorField",
    "VelocityDecomposition",
    "VsqForms",
    "advect",
    "attach_spinor",
    "constant_spinor",
    "continuity_residual",
    "cross",
    "curl",
    "decompose",
    "divergence",
    "dot",
    "equivariance_check",
    "fidelity",
    "gaussian",
    "gradient",
    "harmonic_ground",
    "harmonic_potential",
    "hestenes_residual",
    "hj_residual",
    "integrate",
    "internal_kinetic_density",
    "koenig_energy",
    "lagrangian_density",
    "laplacian",
    "magnitude",
    "node_mask",
    "observables",
    "overlap",
    "pauli_current",
    "plane_wave",
    "propagate",
    "quantum_potential",
    "random_smooth_state",
    "random_spinor_field",
    "rho_total_current",
    "sample_initial",
    "spin_density",
    "spin_hj_residual",
    "spin_schrodinger_residual",
    "spin_vector",
    "stationary_residual",
    "velocity_decomposition",
    "vsq_from_spin",
    "zbw_speed",
    "zbw_velocity_uniform",
]

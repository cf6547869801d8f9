"""Fourier-Galerkin simulation and verification for anisotropic incompressible flow on the torus."""

from .spectral import (
    FrequencyLattice,
    PhysicalGrid,
    ScalarField,
    VectorField,
    bessel_potential,
    dual_pairing,
    lattice,
    project_zero_mean,
    rho,
    sobolev_norm,
    to_physical,
    to_spectral,
    truncate_modes,
)
from .calculus import (
    convect,
    convect_oracle,
    divergence,
    gradient,
    helmholtz_decompose,
    invert_divergence,
    invert_gradient,
    leray_project,
    strain,
)
from .viscosity import (
    ViscosityTensor,
    apply_operator_L,
    bilinear_form,
    estimate_ellipticity,
    isotropic,
    tensor_norms,
    verify_symmetry,
)
from .heat import heat_evolve, heat_profile, verify_heat_energy_identity
from .galerkin import (
    SolverConfig,
    SolverState,
    Trajectory,
    build_basis,
    galerkin_rhs,
    recover_pressure,
    solve,
    step,
)
from .analysis import (
    commutator_constant,
    energy_residual,
    estimate_multiplication_constant,
    existence_threshold,
    gronwall_bound,
    integral_gronwall_bound,
    serrin_norm,
    smallness_check,
    verify_discrete_young,
    verify_interpolation,
)

__version__ = "0.1.0"

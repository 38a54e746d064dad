"""monoflux: desk-scale certification of stress-tensor identities and
ball-energy monotonicity for the elliptic system laplacian u = grad W(u)."""

from .field import Field, Grid, load_field, residual_norm, save_field
from .monotonicity import (
    RadialProfile,
    ball_integral,
    build_profile,
    default_radii,
    full_audit,
    modica_check,
    monotonicity_verdict,
    scaled_profile,
    sphere_integral,
)
from .oracle import VortexProfile, embed, heteroclinic, solve_vortex
from .potential import PotentialSpec, check_nonnegativity, custom_polynomial, double_well, ginzburg_landau
from .solver import SolveConfig, SolveResult, energy_total, minimize_energy
from .tensor import divergence_residual, pohozaev_balance, positivity_min_eig, stress_tensor, trace_residual
from .verdict import Verdict

__all__ = [
    "Field",
    "Grid",
    "PotentialSpec",
    "RadialProfile",
    "SolveConfig",
    "SolveResult",
    "Verdict",
    "VortexProfile",
    "ball_integral",
    "build_profile",
    "check_nonnegativity",
    "custom_polynomial",
    "default_radii",
    "divergence_residual",
    "double_well",
    "embed",
    "energy_total",
    "full_audit",
    "ginzburg_landau",
    "heteroclinic",
    "load_field",
    "minimize_energy",
    "modica_check",
    "monotonicity_verdict",
    "pohozaev_balance",
    "positivity_min_eig",
    "residual_norm",
    "save_field",
    "scaled_profile",
    "solve_vortex",
    "sphere_integral",
    "stress_tensor",
    "trace_residual",
]

__version__ = "0.1.0"

"""Momentum-space evolution, closed-form eigensystems and stationary-phase asymptotics."""

from .asymptotics import (
    StationaryPhaseResult,
    branch_integral,
    branch_integrand,
    dominant_term_amplitude,
    k0_candidates,
    lattice_to_model_position,
    phase,
    phase_derivatives,
    stationary_phase,
    stationary_phase_amplitude,
    stationary_phase_total,
    stationary_points,
)
from .closed_form import (
    BranchLabel,
    SpectralSystem,
    branches,
    closed_form_eigensystem,
    count_balanced_branches,
    extremal_branch,
    gamma_pm,
    lambda_pm,
    norm_pm,
    phi,
    single_qubit_eigenvectors,
)
from .dispersion import (
    BandStructure,
    Caustic,
    band_stationary_points,
    band_structure,
    caustics,
    predicted_outer_peaks,
    simulated_outer_peaks,
    velocity_extrema,
    walk_stationary_phase_amplitude,
)
from .evolution import spectral_evolve, walk_eigensystem
from .operators import MomentumGrid, default_grid, momentum_step_operator, walk_symbol

__all__ = [
    "MomentumGrid",
    "default_grid",
    "momentum_step_operator",
    "walk_symbol",
    "phi",
    "lambda_pm",
    "gamma_pm",
    "norm_pm",
    "single_qubit_eigenvectors",
    "BranchLabel",
    "branches",
    "extremal_branch",
    "count_balanced_branches",
    "SpectralSystem",
    "closed_form_eigensystem",
    "walk_eigensystem",
    "spectral_evolve",
    "lattice_to_model_position",
    "phase",
    "phase_derivatives",
    "k0_candidates",
    "stationary_points",
    "branch_integrand",
    "branch_integral",
    "StationaryPhaseResult",
    "stationary_phase",
    "stationary_phase_amplitude",
    "stationary_phase_total",
    "dominant_term_amplitude",
    "BandStructure",
    "band_structure",
    "Caustic",
    "caustics",
    "velocity_extrema",
    "predicted_outer_peaks",
    "simulated_outer_peaks",
    "band_stationary_points",
    "walk_stationary_phase_amplitude",
]

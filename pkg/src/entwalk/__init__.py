"""One-dimensional discrete-time quantum walks with an entangled n-qubit coin."""

from .classical import ClassicalWalkConfig, classical_distribution
from .core import (
    N_MAX,
    InitialState,
    ProbabilityDistribution,
    StateVector,
    WalkConfig,
    apply_coin,
    apply_shift,
    build_coin,
    evolve,
    ghz_amplitudes,
    iter_states,
    probabilities,
)
from .errors import InvariantViolation, SpectralConsistencyError, WalkDomainError
from .metrics import (
    MetricsReport,
    coin_entropy,
    metrics_series,
    reduced_density_coin,
    reduced_density_position,
    shannon_entropy,
    support_count,
    symmetry_defect,
    variance,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "N_MAX",
    "InitialState",
    "WalkConfig",
    "StateVector",
    "ProbabilityDistribution",
    "build_coin",
    "ghz_amplitudes",
    "apply_coin",
    "apply_shift",
    "iter_states",
    "evolve",
    "probabilities",
    "ClassicalWalkConfig",
    "classical_distribution",
    "MetricsReport",
    "variance",
    "support_count",
    "symmetry_defect",
    "shannon_entropy",
    "reduced_density_position",
    "reduced_density_coin",
    "von_neumann_entropy",
    "coin_entropy",
    "metrics_series",
    "WalkDomainError",
    "InvariantViolation",
    "SpectralConsistencyError",
]

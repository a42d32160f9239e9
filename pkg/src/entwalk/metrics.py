"""
Scalar diagnostics of walk distributions and states.

Entropies are in nats unless a ``base`` is given.  Position entropy is
available in two flavours: the Shannon entropy of the diagonal ``P(x)`` and
the von Neumann entropy of the reduced position density matrix.  For a pure
walk state the latter equals the coin (entanglement) entropy, while the former
does not; the figure-style orderings in this package refer to the Shannon one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .core import ProbabilityDistribution, StateVector, WalkConfig, iter_states, probabilities
from .errors import WalkDomainError

__all__ = [
    "DEFAULT_THRESHOLD",
    "MetricsReport",
    "variance",
    "support_count",
    "symmetry_defect",
    "shannon_entropy",
    "reduced_density_position",
    "reduced_density_coin",
    "von_neumann_entropy",
    "position_entropy",
    "coin_entropy",
    "report_for_state",
    "metrics_series",
]

DEFAULT_THRESHOLD = 1e-4
EIGENVALUE_FLOOR = 1e-14
HERMITIAN_TOL = 1e-10


def _log_scale(base: Optional[float]) -> float:
    if base is None:
        return 1.0
    if base <= 0 or base == 1:
        raise WalkDomainError(f"invalid logarithm base {base!r}")
    return math.log(base)


def variance(dist: ProbabilityDistribution) -> tuple[float, float, float]:
    """
    Return ``(variance, std_dev, expected_position)`` of a distribution.

    The variance is ``E[x^2] - E[x]^2``; tiny negative values from rounding
    are clamped to zero before the square root.
    """
    x = dist.positions.astype(np.float64)
    p = dist.weights
    mean = float(np.dot(x, p))
    var = float(np.dot(x * x, p) - mean * mean)
    var = max(var, 0.0)
    return var, math.sqrt(var), mean


def support_count(dist: ProbabilityDistribution, threshold: float = DEFAULT_THRESHOLD) -> int:
    """Number of positions whose probability is strictly above ``threshold``."""
    if threshold < 0:
        raise WalkDomainError(f"threshold must be nonnegative, got {threshold!r}")
    return int(np.count_nonzero(dist.weights > threshold))


def symmetry_defect(dist: ProbabilityDistribution) -> float:
    """``max_x |P(x) - P(-x)|`` with positions mirrored about the origin."""
    lo = dist.offset
    hi = dist.offset + dist.weights.size - 1
    r = max(abs(lo), abs(hi))
    full = np.zeros(2 * r + 1)
    full[lo + r : hi + r + 1] = dist.weights
    return float(np.max(np.abs(full - full[::-1])))


def shannon_entropy(dist: ProbabilityDistribution, base: Optional[float] = None) -> float:
    """``-sum P log P`` over positions with ``P > 0``."""
    p = dist.weights[dist.weights > 0]
    # 0.0 - x turns the -0.0 of a point mass into +0.0
    return 0.0 - float(np.sum(p * np.log(p))) / _log_scale(base)


def reduced_density_position(state: StateVector) -> NDArray[np.complex128]:
    """``rho(x, x') = sum_c psi(x, c) conj(psi(x', c))`` on the stored lattice."""
    psi = state.amplitudes
    return psi @ psi.conj().T


def reduced_density_coin(state: StateVector) -> NDArray[np.complex128]:
    """Partial trace over position: ``rho(c, c') = sum_x psi(x, c) conj(psi(x, c'))``."""
    psi = state.amplitudes
    return psi.T @ psi.conj()


def von_neumann_entropy(rho: np.ndarray, base: Optional[float] = None) -> float:
    """
    Entropy ``-sum l log l`` of the eigenvalues of a density matrix.

    Eigenvalues come from a Hermitian solver, are clipped to [0, 1], and those
    at or below 1e-14 are dropped.

    Raises
    ------
    WalkDomainError
        If ``rho`` is not square or deviates from Hermitian by more than 1e-10.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise WalkDomainError(f"density matrix must be square, got shape {rho.shape}")
    if rho.size and np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise WalkDomainError("density matrix is not Hermitian")
    evals = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    evals = evals[evals > EIGENVALUE_FLOOR]
    return float(-np.sum(evals * np.log(evals)) / _log_scale(base))


def position_entropy(state: StateVector, base: Optional[float] = None) -> float:
    """Von Neumann entropy of the reduced position density matrix."""
    return von_neumann_entropy(reduced_density_position(state), base)


def coin_entropy(state: StateVector, base: Optional[float] = None) -> float:
    """Von Neumann entropy of the reduced coin density matrix."""
    return von_neumann_entropy(reduced_density_coin(state), base)


@dataclass(frozen=True)
class MetricsReport:
    step: int
    variance: float
    std_dev: float
    expected_position: float
    support_count: int
    shannon_entropy_position: float
    von_neumann_entropy_position: float
    coin_entropy: float
    symmetry_defect: float

    def as_dict(self) -> dict:
        return asdict(self)


def report_for_state(
    step: int,
    state: StateVector,
    threshold: float = DEFAULT_THRESHOLD,
    base: Optional[float] = None,
) -> MetricsReport:
    dist = probabilities(state)
    var, std, mean = variance(dist)
    return MetricsReport(
        step=step,
        variance=var,
        std_dev=std,
        expected_position=mean,
        support_count=support_count(dist, threshold),
        shannon_entropy_position=shannon_entropy(dist, base),
        von_neumann_entropy_position=position_entropy(state, base),
        coin_entropy=coin_entropy(state, base),
        symmetry_defect=symmetry_defect(dist),
    )


def metrics_series(
    config: WalkConfig,
    threshold: float = DEFAULT_THRESHOLD,
    base: Optional[float] = None,
) -> list[MetricsReport]:
    """One :class:`MetricsReport` per step ``t = 0 .. T`` from a single evolution pass."""
    if threshold < 0:
        raise WalkDomainError(f"threshold must be nonnegative, got {threshold!r}")
    return [
        report_for_state(t, state, threshold, base)
        for t, state in enumerate(iter_states(config))
    ]

"""Exact binomial distribution of the classical +-1 random walk."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ProbabilityDistribution
from .errors import WalkDomainError

__all__ = ["ClassicalWalkConfig", "classical_distribution"]

# exact integer binomials below this many steps, log-domain above
LOG_DOMAIN_STEPS = 60


@dataclass(frozen=True)
class ClassicalWalkConfig:
    steps: int
    p_right: float = 0.5

    def __post_init__(self):
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)):
            raise WalkDomainError(f"steps must be an integer, got {self.steps!r}")
        if self.steps < 0:
            raise WalkDomainError(f"steps must be nonnegative, got {self.steps}")
        if not 0.0 <= self.p_right <= 1.0:
            raise WalkDomainError(f"p_right must lie in [0, 1], got {self.p_right!r}")


def _log_pmf(T: int, j: int, p: float) -> float:
    # log of C(T, j) p^j (1-p)^(T-j), with 0 log 0 = 0
    out = math.lgamma(T + 1) - math.lgamma(j + 1) - math.lgamma(T - j + 1)
    if j:
        out += j * math.log(p) if p > 0 else -math.inf
    if T - j:
        out += (T - j) * math.log1p(-p) if p < 1 else -math.inf
    return out


def classical_distribution(config: ClassicalWalkConfig) -> ProbabilityDistribution:
    """
    Distribution over ``[-T, T]`` after ``T`` independent +-1 steps.

    ``P(x) = C(T, j) p^j (1-p)^(T-j)`` with ``j = (T + x) / 2`` right moves;
    positions whose parity differs from ``T`` get exactly zero.
    """
    T = int(config.steps)
    p = float(config.p_right)
    weights = np.zeros(2 * T + 1)
    for j in range(T + 1):
        if T <= LOG_DOMAIN_STEPS:
            w = math.comb(T, j) * p**j * (1.0 - p) ** (T - j)
        else:
            w = math.exp(_log_pmf(T, j, p))
        weights[2 * j] = w
    return ProbabilityDistribution(weights, -T)

"""
Invariant suites run by ``entwalk validate``.

Each suite returns a :class:`SuiteResult` with the worst observed error and
the tolerance it was held to.  ``fault`` injects a deliberate defect so the
suites can be shown to fail: ``"coin-scale"`` multiplies one entry of every
coin by 1.01 before it is used.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    WalkConfig,
    apply_coin,
    apply_shift,
    build_coin,
    evolve,
    initial_state_vector,
    probabilities,
)
from .errors import InvariantViolation, SpectralConsistencyError
from .metrics import symmetry_defect
from .oracle import path_sum_state
from .spectral.closed_form import closed_form_eigensystem, norm_pm
from .spectral.evolution import spectral_evolve
from .spectral.operators import momentum_step_operator

__all__ = ["FAULTS", "SuiteResult", "ValidationReport", "run_validation"]

FAULTS = ("coin-scale",)
FAULT_SCALE = 1.01


@dataclass
class SuiteResult:
    name: str
    invariant: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""


@dataclass
class ValidationReport:
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    @property
    def failed(self) -> list[SuiteResult]:
        return [s for s in self.suites if not s.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "suites": [asdict(s) for s in self.suites]}


def _coin_factory(fault: Optional[str]) -> Callable[[int], np.ndarray]:
    if fault is None:
        return build_coin
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")

    def faulty(n: int) -> np.ndarray:
        c = build_coin(n).copy()
        c[0, 0] *= FAULT_SCALE
        return c

    return faulty


def _run_raw(n: int, T: int, coin: np.ndarray) -> list[float]:
    # step loop without WalkConfig so a broken coin is not rejected up front
    state = initial_state_vector(WalkConfig(n, T))
    totals = [state.norm_squared()]
    for _ in range(T):
        state = apply_shift(apply_coin(state, coin))
        totals.append(state.norm_squared())
    return totals


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    return wrapper


@_timed
def unitarity_suite(coin_for: Callable[[int], np.ndarray], n_values=range(1, 8)) -> SuiteResult:
    tol = 1e-12
    worst = 0.0
    for n in n_values:
        c = coin_for(n)
        worst = max(worst, float(np.max(np.abs(c @ c.conj().T - np.eye(2**n)))))
        for k in np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False):
            u = momentum_step_operator(n, k)
            worst = max(worst, float(np.max(np.abs(u @ u.conj().T - np.eye(2**n)))))
    return SuiteResult("unitarity", "C C^dagger = I and U(k) U(k)^dagger = I", worst <= tol, worst, tol)


@_timed
def normalization_suite(coin_for: Callable[[int], np.ndarray], steps: int = 50) -> SuiteResult:
    tol = 1e-10
    worst = 0.0
    for n in range(1, 8):
        totals = _run_raw(n, steps, coin_for(n))
        worst = max(worst, max(abs(t - 1.0) for t in totals))
    return SuiteResult(
        "normalization", f"sum_x P_t(x) = 1 for t <= {steps}, n = 1..7", worst <= tol, worst, tol
    )


@_timed
def oracle_suite(coin_for: Callable[[int], np.ndarray], depth: int = 6) -> SuiteResult:
    tol = 1e-12
    worst = 0.0
    for n in (1, 2, 3):
        coin = coin_for(n)
        for T in range(depth + 1):
            direct = initial_state_vector(WalkConfig(n, T))
            for _ in range(T):
                direct = apply_shift(apply_coin(direct, coin))
            ref = path_sum_state(WalkConfig(n, T))
            worst = max(worst, float(np.max(np.abs(direct.amplitudes - ref.amplitudes))))
    return SuiteResult(
        "oracle-equivalence",
        f"direct evolution = path-sum enumeration for n <= 3, T <= {depth}",
        worst <= tol,
        worst,
        tol,
    )


@_timed
def eigen_residual_suite(n_values=range(1, 6), num_k: int = 1000) -> SuiteResult:
    tol = 1e-8
    k = np.linspace(0.0, 2.0 * np.pi, num_k, endpoint=False)
    worst_residual = 0.0
    worst_modulus = 0.0
    detail = ""
    try:
        for n in n_values:
            sys = closed_form_eigensystem(n, k)
            worst_residual = max(worst_residual, sys.residual)
            worst_modulus = max(worst_modulus, float(np.max(np.abs(np.abs(sys.eigenvalues) - 1.0))))
    except SpectralConsistencyError as exc:
        return SuiteResult("eigen-residual", exc.formula, False, exc.residual, exc.tolerance, detail=str(exc))
    np_, nm = norm_pm(k)
    product = float(np.max(np.abs(np_ * nm - (6.0 + 2.0 * np.cos(k)))))
    roundtrip = 0.0
    for n in n_values:
        for T in (1, 10, 30):
            cfg = WalkConfig(n, T)
            roundtrip = max(
                roundtrip, float(np.max(np.abs(spectral_evolve(cfg).amplitudes - evolve(cfg).amplitudes)))
            )
    passed = worst_residual <= tol and worst_modulus <= 1e-12 and product <= 1e-10 and roundtrip <= 1e-10
    detail = (
        f"residual={worst_residual:.3e} modulus={worst_modulus:.3e} "
        f"N+N- identity={product:.3e} round-trip={roundtrip:.3e}"
    )
    worst = max(worst_residual, worst_modulus, product, roundtrip)
    return SuiteResult(
        "eigen-residual",
        "U V_j = Lambda_j V_j, |Lambda_j| = 1, N+ N- = 6 + 2 cos k, spectral = direct evolution",
        passed,
        worst,
        tol,
        detail=detail,
    )


@_timed
def symmetry_suite(steps: int = 50) -> SuiteResult:
    even_tol, odd_floor = 1e-12, 1e-3
    defects = {n: symmetry_defect(probabilities(evolve(WalkConfig(n, steps)))) for n in range(1, 8)}
    even_worst = max(defects[n] for n in (2, 4, 6))
    odd_least = min(defects[n] for n in (1, 3, 5, 7))
    passed = even_worst <= even_tol and odd_least >= odd_floor
    detail = " ".join(f"n={n}:{d:.3e}" for n, d in defects.items())
    return SuiteResult(
        "symmetry",
        f"P(x) = P(-x) for even n, defect >= {odd_floor:g} for odd n at T = {steps}",
        passed,
        even_worst,
        even_tol,
        detail=detail,
    )


def run_validation(oracle_depth: int = 6, fault: Optional[str] = None) -> ValidationReport:
    """Run every suite and collect the results; suites never raise, they fail."""
    coin_for = _coin_factory(fault)
    report = ValidationReport()
    suites = [
        ("normalization", lambda: normalization_suite(coin_for)),
        ("unitarity", lambda: unitarity_suite(coin_for)),
        ("oracle-equivalence", lambda: oracle_suite(coin_for, oracle_depth)),
        ("eigen-residual", eigen_residual_suite),
        ("symmetry", symmetry_suite),
    ]
    for name, run in suites:
        try:
            report.suites.append(run())
        except (InvariantViolation, SpectralConsistencyError, FloatingPointError) as exc:
            report.suites.append(SuiteResult(name, "suite raised", False, float("inf"), 0.0, detail=str(exc)))
    return report

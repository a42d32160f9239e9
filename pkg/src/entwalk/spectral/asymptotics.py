"""
Branch-by-branch asymptotics of the tensor-power walk ``U_s(k/2)^{(x)n}``.

Each branch (m v_+ factors, q v_- factors) contributes

    int e^{-iky} Lambda_j(k)^T <V_j, Psi_0> V_j  dk / 4pi,   k in [0, 4pi)

to the amplitude at model position ``y``.  Because ``Lambda_j = (-1)^q e^{i(m-q)phi/2}``
the integrand is ``g(k) e^{i T Phi(k)}`` with ``Phi = (m-q) phi / 2 - (y/T) k``.

Positions of the tensor model are measured in units where each qubit moves by
1/2.  For ``n = 2`` these are lattice sites; for ``n = 1`` a lattice site ``x``
corresponds to ``y = x / 2``.  For ``n >= 3`` the tensor model is a different
walk from the lattice one (see :mod:`entwalk.spectral.dispersion` for the
latter).

Integrals run over ``[0, 4pi)`` because a single branch of an odd-n operator
is only ``4pi``-periodic; over that range every in-cone branch has exactly two
stationary points.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from ..core import ghz_amplitudes
from ..errors import WalkDomainError
from .closed_form import BranchLabel, branches, closed_form_eigensystem, phi
from .operators import MomentumGrid

log = logging.getLogger(__name__)

__all__ = [
    "ROOT_TOL",
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
]

ROOT_TOL = 1e-10
DEGENERATE_CURVATURE = 1e-9
FULL_PERIOD = 4.0 * np.pi
_SCAN_POINTS = 1024


def lattice_to_model_position(n: int, x: float) -> float:
    """Map a lattice site to the tensor model's position coordinate (n = 1, 2 only)."""
    if n == 1:
        return 0.5 * x
    if n == 2:
        return float(x)
    raise WalkDomainError(f"the tensor-power model does not describe the n={n} lattice walk")


def _require_imbalance(branch: BranchLabel) -> int:
    r = branch.imbalance
    if r == 0:
        raise WalkDomainError("branch has m = q: its phase is flat and has no stationary points")
    return r


def phase(branch: BranchLabel, x_over_T: float, k):
    """``Phi(k) = (m - q) phi(k) / 2 - (x/T) k``."""
    return 0.5 * branch.imbalance * phi(k) - x_over_T * np.asarray(k, dtype=np.float64)


def phase_derivatives(branch: BranchLabel, x_over_T: float, k):
    """
    First and second k-derivatives of :func:`phase`.

    ``Phi'  = (m-q) cos(k/2) / (2 sqrt(2 - sin^2(k/2))) - x/T``
    ``Phi'' = -(m-q) sin(k/2) / (sqrt(2) (3 + cos k)^(3/2))``

    Raises
    ------
    WalkDomainError
        For a flat branch (``m = q``).
    """
    r = _require_imbalance(branch)
    k = np.asarray(k, dtype=np.float64)
    s = np.sin(0.5 * k)
    c = np.cos(0.5 * k)
    d1 = r * c / (2.0 * np.sqrt(2.0 - s * s)) - x_over_T
    d2 = -r * s / (math.sqrt(2.0) * (3.0 + np.cos(k)) ** 1.5)
    return d1, d2


def k0_candidates(branch: BranchLabel, x_over_T: float) -> list[float]:
    """
    The four closed-form values ``+-2 acos(+-2v / sqrt((m-q)^2 - 4v^2))`` reduced to ``[0, 4pi)``.

    Squaring during the derivation makes half of them roots of the mirrored
    branch; callers must keep only those that zero ``Phi'``.  Empty outside the
    propagation cone.
    """
    r = _require_imbalance(branch)
    v = float(x_over_T)
    disc = r * r - 4.0 * v * v
    if disc <= 0:
        return []
    c0 = 2.0 * v / math.sqrt(disc)
    if abs(c0) > 1.0:
        return []
    out = []
    for sign_outer in (1.0, -1.0):
        for sign_inner in (1.0, -1.0):
            out.append((sign_outer * 2.0 * math.acos(sign_inner * c0)) % FULL_PERIOD)
    return out


def _polish(branch: BranchLabel, v: float, k: float) -> float:
    for _ in range(8):
        d1, d2 = phase_derivatives(branch, v, k)
        if abs(d1) <= 1e-15 or d2 == 0:
            break
        k = k - float(d1) / float(d2)
    return k


def _wrapped_distance(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def stationary_points(
    branch: BranchLabel, x_over_T: float, period: float = 2.0 * np.pi
) -> list[float]:
    """
    Roots of ``Phi'`` in ``[0, period)``.

    Closed-form candidates are polished by Newton steps and kept when
    ``|Phi'| <= 1e-10``.  An independent sign-change scan refined with Brent's
    method must find the same set; a disagreement is logged and the union is
    returned.  ``period`` is ``2pi`` (one root per in-cone branch) or ``4pi``
    (two roots).
    """
    v = float(x_over_T)
    closed = []
    for k in k0_candidates(branch, v):
        k = _polish(branch, v, k % period) % period
        if abs(float(phase_derivatives(branch, v, k)[0])) <= ROOT_TOL:
            if all(_wrapped_distance(k, c, period) > 1e-8 for c in closed):
                closed.append(k)

    grid = np.linspace(0.0, period, _SCAN_POINTS + 1)
    d1 = phase_derivatives(branch, v, grid)[0]
    scanned = []
    f = lambda k: float(phase_derivatives(branch, v, k)[0])
    for a, b, fa, fb in zip(grid[:-1], grid[1:], d1[:-1], d1[1:]):
        if fa == 0.0:
            scanned.append(float(a))
        elif fa * fb < 0:
            scanned.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15))

    roots = list(closed)
    for k in scanned:
        if all(_wrapped_distance(k, c, period) > 1e-8 for c in roots):
            if closed:
                log.warning("bracketed scan found a stationary point missed by the closed form: %r", k)
            roots.append(k % period)
    if len(scanned) < len(closed):
        # tangential roots at the cone edge escape the sign-change scan
        log.debug("closed form found %d roots, scan %d", len(closed), len(scanned))
    return sorted(roots)


def _coin_state(n: int, coin_state) -> np.ndarray:
    a = ghz_amplitudes(n) if coin_state is None else np.asarray(coin_state, dtype=np.complex128)
    if a.shape != (2**n,):
        raise WalkDomainError(f"coin state must have length {2**n}")
    return a


def branch_integrand(branch: BranchLabel, T: int, k, coin_state=None) -> NDArray[np.complex128]:
    """``g(k) = (-1)^(qT) <V_j(k), Psi_0> V_j(k)``; shape ``k.shape + (2**n,)``."""
    a = _coin_state(branch.n, coin_state)
    sys = closed_form_eigensystem(branch.n, k, check=False)
    _, vec = sys.branch(branch)
    overlap = np.einsum("...d,d->...", vec.conj(), a)
    return branch.sign(T) * overlap[..., None] * vec


def branch_integral(
    branch: BranchLabel, T: int, y: float, coin_state=None, num_points: Optional[int] = None
) -> NDArray[np.complex128]:
    """Direct trapezoidal quadrature of one branch's contribution over ``[0, 4pi)``."""
    if num_points is None:
        num_points = max(2048, 16 * branch.n * (T + 1))
    k = FULL_PERIOD * np.arange(num_points) / num_points
    g = branch_integrand(branch, T, k, coin_state)
    osc = np.exp(1j * T * phase(branch, y / T if T else 0.0, k)) if T else np.exp(-1j * k * y)
    return np.mean(osc[:, None] * g, axis=0)


@dataclass(frozen=True, eq=False)
class StationaryPhaseResult:
    branch: BranchLabel
    steps: int
    position: float
    stationary_points: list[float]
    phase_second_derivative: list[float]
    amplitude: NDArray[np.complex128]
    degenerate: bool = False
    group_velocity_bound: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "group_velocity_bound", self.branch.velocity_bound)


def stationary_phase(branch: BranchLabel, T: int, y: float, coin_state=None) -> StationaryPhaseResult:
    """
    Large-T estimate of one branch's contribution at model position ``y``.

    Each stationary point contributes
    ``g(k0) e^{i T Phi(k0) + i sgn(Phi'') pi/4} sqrt(2 pi / (T |Phi''|)) / (4 pi)``.
    If some ``Phi''(k0)`` vanishes the estimate is replaced by direct quadrature
    and the result is flagged ``degenerate``.
    """
    _require_imbalance(branch)
    if T < 1:
        raise WalkDomainError("stationary phase needs at least one step")
    v = y / T
    points = stationary_points(branch, v, period=FULL_PERIOD)
    curv = [float(phase_derivatives(branch, v, k0)[1]) for k0 in points]
    if any(abs(c) < DEGENERATE_CURVATURE for c in curv):
        log.warning("degenerate stationary point for %s at y/T=%g; using quadrature", branch, v)
        amp = branch_integral(branch, T, y, coin_state)
        return StationaryPhaseResult(branch, T, y, points, curv, amp, degenerate=True)

    amp = np.zeros(2**branch.n, dtype=np.complex128)
    if points:
        g = branch_integrand(branch, T, np.array(points), coin_state)
        for k0, c, gk in zip(points, curv, g):
            weight = math.sqrt(2.0 * math.pi / (T * abs(c))) / (4.0 * math.pi)
            amp += gk * weight * np.exp(1j * (T * float(phase(branch, v, k0)) + math.copysign(math.pi / 4, c)))
    return StationaryPhaseResult(branch, T, y, points, curv, amp)


def stationary_phase_amplitude(branch: BranchLabel, T: int, y: float, coin_state=None) -> NDArray[np.complex128]:
    return stationary_phase(branch, T, y, coin_state).amplitude


def stationary_phase_total(n: int, T: int, y: float, coin_state=None) -> NDArray[np.complex128]:
    """Sum of the stationary-phase estimates over every branch with ``m != q``."""
    amp = np.zeros(2**n, dtype=np.complex128)
    for b in branches(n):
        if b.imbalance:
            amp += stationary_phase_amplitude(b, T, y, coin_state)
    return amp


def dominant_term_amplitude(
    n: int, T: int, x: int, grid: Optional[MomentumGrid] = None, coin_state=None
) -> NDArray[np.complex128]:
    """
    Amplitude at ``x`` carried by the ``C(n, n/2)`` flat branches (``m = q``).

    Their eigenvalue ``(-1)^(n/2)`` does not depend on k, so the integral is a
    plain Fourier coefficient; it is evaluated by the trapezoidal rule on
    ``grid`` (the sum over flat branches is 2pi-periodic).

    Raises
    ------
    WalkDomainError
        For odd ``n``, where no branch has ``m = q``.
    """
    if n % 2:
        raise WalkDomainError(f"n={n} is odd: no branch has m = q")
    grid = MomentumGrid(1024) if grid is None else grid
    k = grid.points
    total = np.zeros((k.size, 2**n), dtype=np.complex128)
    for b in branches(n, imbalance=0):
        total += branch_integrand(b, T, k, coin_state)
    return np.mean(np.exp(-1j * k * x)[:, None] * total, axis=0)

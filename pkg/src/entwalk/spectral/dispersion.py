"""
Band structure and stationary-phase asymptotics of the lattice walk itself.

The coin ``H^{(x)n}`` and the shift both commute with qubit permutations, so
the permutation-symmetric (Dicke) subspace of dimension ``n + 1`` is invariant.
The displacement generator ``K = diag(+1, 0, ..., 0, -1)`` vanishes on its
orthogonal complement, so amplitude outside the symmetric subspace never moves.
Everything here is therefore computed on the ``(n+1)``-dimensional restriction
of the walk symbol ``D(k) C = e^{ikK} C``.

For a band ``lambda_j(k) = e^{i omega_j(k)}`` with eigenvector ``u_j``:

    group velocity   omega_j'  = <u_j|K|u_j>
    curvature        omega_j'' = sum_{l != j} |K_jl|^2 cot((omega_j - omega_l) / 2)

Both follow from ``dU/dk = iKU`` by first and second order perturbation theory.
Stationary points of ``T omega_j(k) - k x`` sit where ``omega_j' = x/T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from ..core import ProbabilityDistribution, build_coin, ghz_amplitudes
from ..errors import WalkDomainError

__all__ = [
    "dicke_basis",
    "symmetric_symbol",
    "band_eigensystem",
    "BandStructure",
    "band_structure",
    "Caustic",
    "caustics",
    "velocity_extrema",
    "predicted_outer_peaks",
    "simulated_outer_peaks",
    "BandStationaryPoint",
    "band_stationary_points",
    "walk_stationary_phase_amplitude",
]

ROOT_TOL = 1e-10
SYMMETRY_TOL = 1e-12
DEFAULT_BAND_POINTS = 2048


@lru_cache(maxsize=None)
def dicke_basis(n: int) -> NDArray[np.float64]:
    """Orthonormal columns spanning the symmetric subspace, ordered by Hamming weight."""
    d = 2**n
    weights = np.array([bin(c).count("1") for c in range(d)])
    basis = np.zeros((d, n + 1))
    for w in range(n + 1):
        members = weights == w
        basis[members, w] = 1.0 / math.sqrt(members.sum())
    basis.flags.writeable = False
    return basis


@lru_cache(maxsize=None)
def _restricted_coin(n: int) -> NDArray[np.complex128]:
    b = dicke_basis(n)
    # apply the coin column by column; the dense 2^n square is fine for n <= 12
    c = b.T @ (build_coin(n) @ b)
    c.flags.writeable = False
    return c


def _generator(n: int) -> NDArray[np.float64]:
    g = np.zeros(n + 1)
    g[0] = 1.0
    g[-1] = -1.0
    return g


def symmetric_symbol(n: int, k) -> NDArray[np.complex128]:
    """Walk symbol restricted to the Dicke subspace, shape ``k.shape + (n+1, n+1)``."""
    k = np.asarray(k, dtype=np.float64)
    diag = np.exp(1j * np.multiply.outer(k, _generator(n)))
    return diag[..., :, None] * _restricted_coin(n)


def band_eigensystem(n: int, k) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Eigenvalues and unit eigenvectors of :func:`symmetric_symbol` (unordered)."""
    vals, vecs = np.linalg.eig(symmetric_symbol(n, k))
    vecs = vecs / np.linalg.norm(vecs, axis=-2, keepdims=True)
    return vals, vecs


def _velocities(n: int, vecs: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,i,...ij->...j", vecs.conj(), _generator(n), vecs).real


def _curvature(n: int, vals: np.ndarray, vecs: np.ndarray, j: int) -> float:
    g = _generator(n)
    kj = vecs.conj().T @ (g * vecs[:, j])
    omega = np.angle(vals)
    total = 0.0
    for l in range(vals.size):
        if l == j:
            continue
        gap = 0.5 * (omega[j] - omega[l])
        total += abs(kj[l]) ** 2 / math.tan(gap)
    return total


@dataclass(frozen=True, eq=False)
class BandStructure:
    """Bands tracked continuously across a uniform, half-step-offset k grid."""

    n: int
    k: NDArray[np.float64]
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]
    velocities: NDArray[np.float64]

    @property
    def num_bands(self) -> int:
        return self.n + 1


def band_structure(n: int, num_points: int = DEFAULT_BAND_POINTS) -> BandStructure:
    """
    Sample every band on ``k_i = 2pi (i + 1/2) / M`` and link samples by eigenvector overlap.

    The half-step offset keeps the grid off ``k = 0`` and ``k = pi`` where the
    Hadamard spectrum is degenerate.
    """
    k = 2.0 * np.pi * (np.arange(num_points) + 0.5) / num_points
    vals, vecs = band_eigensystem(n, k)
    for i in range(1, num_points):
        overlap = np.abs(vecs[i - 1].conj().T @ vecs[i])
        _, perm = linear_sum_assignment(-overlap)
        vals[i] = vals[i, perm]
        vecs[i] = vecs[i][:, perm]
    return BandStructure(n, k, vals, vecs, _velocities(n, vecs))


def _track(n: int, ref: np.ndarray, k: float):
    vals, vecs = band_eigensystem(n, k)
    j = int(np.argmax(np.abs(ref.conj() @ vecs)))
    return vals, vecs, j


# first zero of Ai', where Ai and |Ai|^2 peak
AIRY_FIRST_MAX = 1.0187929716


@dataclass(frozen=True)
class Caustic:
    """Extremum of a band's group velocity (the curvature vanishes there)."""

    velocity: float
    k: float
    third_derivative: float

    def peak_offset(self, T: int) -> float:
        """
        Inward shift of the outermost maximum from ``T * velocity``.

        Near the caustic the phase is cubic and the amplitude is an Airy
        function; ``|Ai|^2`` peaks where ``(T v - x) / (T |w3| / 2)^(1/3)``
        equals ``AIRY_FIRST_MAX``, with ``w3`` the third derivative of the band.
        """
        return AIRY_FIRST_MAX * (T * abs(self.third_derivative) / 2.0) ** (1.0 / 3.0)


def _band_velocity(n: int, ref: np.ndarray, k: float) -> float:
    _, vecs, jj = _track(n, ref, k)
    return float(_velocities(n, vecs[:, [jj]])[0])


def caustics(n: int, bands: Optional[BandStructure] = None) -> tuple[Caustic, Caustic]:
    """Left (minimum velocity) and right (maximum velocity) caustics over all bands."""
    bands = band_structure(n) if bands is None else bands
    h = bands.k[1] - bands.k[0]
    out = []
    for sign in (-1.0, 1.0):
        flat = np.argmax(sign * bands.velocities)
        i, j = np.unravel_index(flat, bands.velocities.shape)
        ref = bands.eigenvectors[i][:, j]
        res = minimize_scalar(
            lambda k: -sign * _band_velocity(n, ref, k),
            bounds=(bands.k[i] - h, bands.k[i] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        k_star = float(res.x)
        v_star = sign * max(-res.fun, sign * bands.velocities[i, j])
        dk = 1e-3
        third = (
            _band_velocity(n, ref, k_star + dk)
            - 2.0 * _band_velocity(n, ref, k_star)
            + _band_velocity(n, ref, k_star - dk)
        ) / dk**2
        out.append(Caustic(float(v_star), k_star % (2.0 * np.pi), third))
    return out[0], out[1]


def velocity_extrema(n: int, bands: Optional[BandStructure] = None) -> tuple[float, float]:
    """Smallest and largest group velocity over all bands."""
    left, right = caustics(n, bands)
    return left.velocity, right.velocity


def predicted_outer_peaks(n: int, T: int, airy: bool = True) -> tuple[float, float]:
    """
    Predicted leftmost and rightmost peak positions after ``T`` steps.

    Leading order puts them on the caustics ``T v_min`` and ``T v_max``; with
    ``airy`` each is moved inward by :meth:`Caustic.peak_offset`.
    """
    left, right = caustics(n)
    lo, hi = T * left.velocity, T * right.velocity
    if airy:
        lo += left.peak_offset(T)
        hi -= right.peak_offset(T)
    return lo, hi


def simulated_outer_peaks(dist: ProbabilityDistribution, rel_floor: float = 1e-12) -> tuple[int, int]:
    """
    Leftmost and rightmost local maxima of a distribution.

    Sites with ``P <= rel_floor * max P`` are skipped first, which removes the
    exact parity zeros of the single-qubit walk before maxima are located.
    """
    p = dist.weights
    keep = np.flatnonzero(p > rel_floor * p.max())
    x = dist.positions[keep]
    w = p[keep]
    if w.size < 3:
        return int(x[np.argmax(w)]), int(x[np.argmax(w)])
    padded = np.concatenate(([-np.inf], w, [-np.inf]))
    peaks = np.flatnonzero((w >= padded[:-2]) & (w >= padded[2:]))
    return int(x[peaks[0]]), int(x[peaks[-1]])


@dataclass(frozen=True)
class BandStationaryPoint:
    band: int
    k: float
    velocity_residual: float
    curvature: float


def band_stationary_points(
    n: int, x_over_T: float, bands: Optional[BandStructure] = None, band: Optional[int] = None
) -> list[BandStationaryPoint]:
    """
    Momenta where a band's group velocity equals ``x/T``.

    Sign changes of ``omega_j' - x/T`` on the tracked grid are refined with
    Brent's method on the locally tracked band.  ``band`` restricts the search
    to one band index.
    """
    bands = band_structure(n) if bands is None else bands
    v = float(x_over_T)
    f_grid = bands.velocities - v
    M = bands.k.size
    out = []
    for j in range(bands.num_bands) if band is None else [band]:
        for i in range(M):
            i2 = (i + 1) % M
            a, b = bands.k[i], bands.k[i2] + (2.0 * np.pi if i2 == 0 else 0.0)
            if i2 == 0:
                # the band may re-enter under another index after a full period
                _, vecs0, j2 = _track(n, bands.eigenvectors[i][:, j], bands.k[0])
                fb = float(_velocities(n, vecs0[:, [j2]])[0]) - v
            else:
                fb = f_grid[i2, j]
            fa = f_grid[i, j]
            if fa * fb > 0 or fa == fb == 0:
                continue
            ref = bands.eigenvectors[i][:, j]

            def f(k):
                _, vecs, jj = _track(n, ref, k)
                return float(_velocities(n, vecs[:, [jj]])[0]) - v

            k0 = brentq(f, a, b, xtol=1e-15, rtol=1e-15)
            vals, vecs, jj = _track(n, ref, k0)
            out.append(BandStationaryPoint(j, k0 % (2.0 * np.pi), abs(f(k0)), _curvature(n, vals, vecs, jj)))
    return out


def walk_stationary_phase_amplitude(
    n: int,
    T: int,
    x: int,
    coin_state=None,
    bands: Optional[BandStructure] = None,
) -> NDArray[np.complex128]:
    """
    Stationary-phase estimate of the lattice amplitude ``Psi_T(x)`` (length ``2**n``).

    Sums ``P_j(k0) Psi_0 lambda_j(k0)^T e^{-i k0 x} sqrt(2pi / (T |omega''|)) e^{i sgn pi/4} / 2pi``
    over all band stationary points.  The coin state must be permutation
    symmetric; the GHZ state is the default.
    """
    if T < 1:
        raise WalkDomainError("stationary phase needs at least one step")
    a = ghz_amplitudes(n) if coin_state is None else np.asarray(coin_state, dtype=np.complex128)
    basis = dicke_basis(n)
    a_sym = basis.T @ a
    if np.linalg.norm(basis @ a_sym - a) > SYMMETRY_TOL:
        raise WalkDomainError("coin state has weight outside the permutation-symmetric subspace")
    bands = band_structure(n) if bands is None else bands
    amp = np.zeros(n + 1, dtype=np.complex128)
    for sp in band_stationary_points(n, x / T, bands):
        vals, vecs = band_eigensystem(n, sp.k)
        ref_i = int(np.argmin(np.abs(bands.k - sp.k)))
        j = int(np.argmax(np.abs(bands.eigenvectors[ref_i][:, sp.band].conj() @ vecs)))
        u = vecs[:, j]
        weight = math.sqrt(2.0 * math.pi / (T * abs(sp.curvature))) / (2.0 * math.pi)
        phase = vals[j] ** T * np.exp(-1j * sp.k * x + 1j * math.copysign(math.pi / 4, sp.curvature))
        amp += (u.conj() @ a_sym) * u * weight * phase
    return basis @ amp

"""Evolution of the lattice walk through its momentum-space eigenbasis."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.linalg

from ..core import StateVector, WalkConfig, build_coin
from ..errors import WalkDomainError
from .closed_form import closed_form_eigensystem
from .operators import MomentumGrid, default_grid, walk_symbol

__all__ = ["walk_eigensystem", "spectral_evolve"]

NORMALITY_TOL = 1e-10


def _schur_eigensystem(matrices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # complex Schur of a normal matrix is diagonal with a unitary basis, which
    # stays orthonormal inside the large degenerate eigenspaces of H^{(x)n}
    vals = np.empty(matrices.shape[:2], dtype=np.complex128)
    vecs = np.empty_like(matrices)
    for i, u in enumerate(matrices):
        t, z = scipy.linalg.schur(u, output="complex")
        off = np.max(np.abs(np.triu(t, 1))) if t.shape[0] > 1 else 0.0
        if off > NORMALITY_TOL:
            raise WalkDomainError("step symbol is not normal; Schur form is not diagonal")
        vals[i] = np.diag(t)
        vecs[i] = z
    return vals, vecs


def walk_eigensystem(
    n: int, k: np.ndarray, eigenbasis: str = "auto", coin: Optional[np.ndarray] = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues ``(K, d)`` and orthonormal eigenvectors ``(K, d, d)`` of ``walk_symbol(n, k)``.

    ``eigenbasis`` is ``"closed_form"`` (n <= 2 only, Hadamard coin), ``"numeric"``
    (complex Schur per k) or ``"auto"`` (closed form when available).
    """
    k = np.asarray(k, dtype=np.float64).reshape(-1)
    if eigenbasis not in ("auto", "closed_form", "numeric"):
        raise WalkDomainError(f"unknown eigenbasis {eigenbasis!r}")
    closed_ok = n <= 2 and coin is None
    if eigenbasis == "closed_form" and not closed_ok:
        raise WalkDomainError(
            "closed-form eigenbasis matches the lattice walk only for n <= 2 with the Hadamard coin"
        )
    if eigenbasis == "numeric" or not closed_ok:
        return _schur_eigensystem(walk_symbol(n, k, coin))
    # n = 1: D(k) H = U_s(2k / 2); n = 2: D(k) H^{(x)2} = U_s(k/2)^{(x)2}
    sys = closed_form_eigensystem(n, 2.0 * k if n == 1 else k)
    return sys.eigenvalues, sys.eigenvectors


def spectral_evolve(
    config: WalkConfig,
    grid: Optional[MomentumGrid] = None,
    eigenbasis: str = "auto",
) -> StateVector:
    """
    Evolve ``config`` by expanding the initial state in the eigenbasis at each k.

    ``Psi_T(k) = sum_z Lambda_z^T <V_z, Psi_0> V_z`` is sampled on the grid and
    the inverse discrete transform returns ``Psi_T(x)`` on ``[x0 - T, x0 + T]``.
    The transform is exact because the amplitudes are supported on 2T+1 sites.

    Raises
    ------
    WalkDomainError
        If the grid has fewer than ``2T + 1`` points.
    """
    T = config.steps
    grid = default_grid(T) if grid is None else grid
    if not grid.resolves(T):
        raise WalkDomainError(f"grid of {grid.num_points} points cannot resolve {2 * T + 1} positions")
    k = grid.points
    M = grid.num_points

    custom_coin = None
    if not np.array_equal(config.coin, build_coin(config.n)):
        custom_coin = np.asarray(config.coin)
    vals, vecs = walk_eigensystem(config.n, k, eigenbasis, custom_coin)

    # origin handled by relabelling: evolve from 0, then offset positions
    a = config.initial_state.coin_amplitudes
    coeffs = np.einsum("kdz,d->kz", vecs.conj(), a) * vals**T
    psi_k = np.einsum("kdz,kz->kd", vecs, coeffs)
    psi_x = np.fft.fft(psi_k, axis=0) / M
    rows = np.arange(-T, T + 1) % M
    return StateVector(psi_x[rows], config.initial_state.origin - T)

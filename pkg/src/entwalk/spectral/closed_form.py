"""
Closed-form eigensystem of ``U(k) = U_s(k/2)^{(x)n}``.

Single-qubit block ``U_s(k/2)`` has eigenvalues ``lambda_+ = e^{i phi/2}`` and
``lambda_- = -e^{-i phi/2}`` with ``phi(k) = 2 asin(sin(k/2) / sqrt(2))``, and
eigenvectors ``v_+- = (e^{ik/2}, gamma_+-) / sqrt(N_+-)`` where

    gamma_+- = -cos(k/2) +- sqrt(1 + cos^2(k/2))
    N_+-     = 2 - 2 gamma_+- cos(k/2)        (= 1 + gamma_+-^2)

The n-qubit eigenpairs are tensor products indexed by a branch bitmask:
slot ``i`` (0 = leftmost factor) carries ``v_-`` when bit ``n-1-i`` is set.
The number ``m`` of ``v_+`` factors is ``n - popcount``, ``q = n - m``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb, sqrt

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import SpectralConsistencyError, WalkDomainError
from .operators import apply_tensor_power, half_step_block

log = logging.getLogger(__name__)

__all__ = [
    "RESIDUAL_TOL",
    "phi",
    "lambda_pm",
    "gamma_pm",
    "norm_pm",
    "single_qubit_eigenvectors",
    "BranchLabel",
    "branches",
    "extremal_branch",
    "SpectralSystem",
    "closed_form_eigensystem",
]

RESIDUAL_TOL = 1e-8
UNIT_NORM_TOL = 1e-10


def phi(k: ArrayLike) -> NDArray[np.float64]:
    """``2 asin(sin(k/2) / sqrt(2))``."""
    return 2.0 * np.arcsin(np.sin(0.5 * np.asarray(k, dtype=np.float64)) / np.sqrt(2.0))


def lambda_pm(k: ArrayLike) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """``(e^{i phi/2}, -e^{-i phi/2})``."""
    half = 0.5 * phi(k)
    return np.exp(1j * half), -np.exp(-1j * half)


def gamma_pm(k: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    c = np.cos(0.5 * np.asarray(k, dtype=np.float64))
    root = np.sqrt(1.0 + c * c)
    return -c + root, -c - root


def norm_pm(k: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    c = np.cos(0.5 * np.asarray(k, dtype=np.float64))
    gp, gm = gamma_pm(k)
    return 2.0 - 2.0 * gp * c, 2.0 - 2.0 * gm * c


def single_qubit_eigenvectors(k: ArrayLike) -> NDArray[np.complex128]:
    """
    Columns ``v_+`` and ``v_-`` of ``U_s(k/2)``, shape ``k.shape + (2, 2)``.

    The printed normalisation ``N_+-`` is used and then checked; a vector
    whose norm is off by more than 1e-10 is renormalised with a warning.
    """
    k = np.asarray(k, dtype=np.float64)
    gp, gm = gamma_pm(k)
    np_, nm = norm_pm(k)
    top = np.exp(0.5j * k)
    vp = np.stack([top, gp + 0j], axis=-1) / np.sqrt(np_)[..., None]
    vm = np.stack([top, gm + 0j], axis=-1) / np.sqrt(nm)[..., None]
    v = np.stack([vp, vm], axis=-1)
    lengths = np.linalg.norm(v, axis=-2)
    if np.any(np.abs(lengths - 1.0) > UNIT_NORM_TOL):
        log.warning("eigenvector normalisation N_+- failed the unit-norm check; renormalising")
        v = v / lengths[..., None, :]
    return v


@dataclass(frozen=True)
class BranchLabel:
    """One tensor-product eigenbranch; ``selection`` bit set means ``v_-`` in that slot."""

    n: int
    selection: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.selection < 2**self.n:
            raise WalkDomainError(f"invalid branch {self.selection} for n={self.n}")

    @property
    def q(self) -> int:
        return bin(self.selection).count("1")

    @property
    def m(self) -> int:
        return self.n - self.q

    @property
    def imbalance(self) -> int:
        """``m - q``."""
        return self.m - self.q

    @property
    def velocity_bound(self) -> float:
        """Edge ``|m - q| / (2 sqrt 2)`` of the branch's propagation cone."""
        return abs(self.imbalance) / (2.0 * sqrt(2.0))

    def mirror(self) -> "BranchLabel":
        """Branch with every slot flipped, so ``m`` and ``q`` swap."""
        return BranchLabel(self.n, (2**self.n - 1) ^ self.selection)

    def sign(self, steps: int) -> int:
        """``(-1)^(qT)``, the factor left in ``Lambda^T`` after pulling out the phase."""
        return -1 if (self.q * steps) % 2 else 1


def branches(n: int, imbalance: int | None = None) -> list[BranchLabel]:
    """All ``2**n`` branches in bitmask order, optionally only those with given ``m - q``."""
    out = [BranchLabel(n, s) for s in range(2**n)]
    if imbalance is not None:
        out = [b for b in out if b.imbalance == imbalance]
    return out


def extremal_branch(n: int) -> BranchLabel:
    """``v_+^{(x)n}``, the branch with ``m - q = n``."""
    return BranchLabel(n, 0)


def count_balanced_branches(n: int) -> int:
    """Number of branches with ``m = q``; ``n! / ((n/2)!)^2`` for even n, else 0."""
    return comb(n, n // 2) if n % 2 == 0 else 0


@dataclass(frozen=True, eq=False)
class SpectralSystem:
    """
    Eigen-data of ``U_s(k/2)^{(x)n}`` on an array of momenta.

    Per-k arrays have leading shape ``k.shape``; ``eigenvalues[..., j]`` and
    ``eigenvectors[..., :, j]`` belong to branch bitmask ``j``.
    """

    n: int
    k: NDArray[np.float64]
    phi: NDArray[np.float64]
    lambda_plus: NDArray[np.complex128]
    lambda_minus: NDArray[np.complex128]
    gamma_plus: NDArray[np.float64]
    gamma_minus: NDArray[np.float64]
    norm_plus: NDArray[np.float64]
    norm_minus: NDArray[np.float64]
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]

    @cached_property
    def residual(self) -> float:
        """``max ||U V_j - Lambda_j V_j||`` over all k and branches."""
        return float(np.max(_residuals(self)))

    def branch(self, label: BranchLabel) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        return self.eigenvalues[..., label.selection], self.eigenvectors[..., :, label.selection]


def _tensor_columns(v: np.ndarray, lam: np.ndarray, n: int):
    # v: (K, 2, 2) columns v_+, v_- ; lam: (K, 2)
    K = v.shape[0]
    vecs = np.ones((K, 1, 1), dtype=np.complex128)
    vals = np.ones((K, 1), dtype=np.complex128)
    for _ in range(n):
        vecs = np.einsum("kaj,kbs->kabjs", vecs, v).reshape(K, vecs.shape[1] * 2, -1)
        vals = np.einsum("kj,ks->kjs", vals, lam).reshape(K, -1)
    return vals, vecs


def _residuals(sys: SpectralSystem) -> np.ndarray:
    k = sys.k.reshape(-1)
    vecs = sys.eigenvectors.reshape(k.size, 2**sys.n, 2**sys.n)
    vals = sys.eigenvalues.reshape(k.size, 2**sys.n)
    blocks = half_step_block(k)
    out = np.empty(k.size)
    for i in range(k.size):
        uv = apply_tensor_power(blocks[i], vecs[i], sys.n)
        out[i] = np.max(np.linalg.norm(uv - vecs[i] * vals[i], axis=0))
    return out.reshape(sys.k.shape)


def closed_form_eigensystem(n: int, k: ArrayLike, check: bool = True) -> SpectralSystem:
    """
    Closed-form eigenvalues and eigenvectors of ``U_s(k/2)^{(x)n}``.

    With ``check`` (default) the eigen-residual against the numerically built
    operator and the unit modulus of every eigenvalue are verified.

    Raises
    ------
    SpectralConsistencyError
        If any residual exceeds 1e-8 or any ``|Lambda_j|`` differs from 1 by
        more than 1e-12.
    """
    if n < 1:
        raise WalkDomainError(f"n must be positive, got {n}")
    k = np.asarray(k, dtype=np.float64)
    flat = k.reshape(-1)
    lp, lm = lambda_pm(flat)
    v = single_qubit_eigenvectors(flat)
    vals, vecs = _tensor_columns(v, np.stack([lp, lm], axis=-1), n)
    gp, gm = gamma_pm(k)
    np_, nm = norm_pm(k)
    d = 2**n
    sys = SpectralSystem(
        n=n,
        k=k,
        phi=phi(k),
        lambda_plus=lp.reshape(k.shape),
        lambda_minus=lm.reshape(k.shape),
        gamma_plus=gp,
        gamma_minus=gm,
        norm_plus=np_,
        norm_minus=nm,
        eigenvalues=vals.reshape(k.shape + (d,)),
        eigenvectors=vecs.reshape(k.shape + (d, d)),
    )
    if check:
        modulus = float(np.max(np.abs(np.abs(vals) - 1.0))) if vals.size else 0.0
        if modulus > 1e-12:
            raise SpectralConsistencyError("|Lambda_j| = 1 (lambda_+- = +-exp(+-i phi/2))", modulus, 1e-12)
        if sys.residual > RESIDUAL_TOL:
            raise SpectralConsistencyError(
                "U V_j = Lambda_j V_j (v_+- = (e^{ik/2}, gamma_+-)/sqrt(N_+-))",
                sys.residual,
                RESIDUAL_TOL,
            )
    return sys

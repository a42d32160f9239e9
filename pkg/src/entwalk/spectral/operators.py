"""
Momentum-space step operators and the momentum grid.

Two operators live here and they must not be confused:

``momentum_step_operator(n, k)``
    The tensor power ``U_s(k/2)^{(x)n}`` with
    ``U_s(k/2) = diag(e^{ik/2}, e^{-ik/2}) H``.  Its eigensystem factorises
    into single-qubit pieces and has closed forms (see ``closed_form``).

``walk_symbol(n, k)``
    The exact Fourier symbol ``D(k) H^{(x)n}`` of one coin-shift step of the
    lattice walk, with ``D(k) = diag(e^{ik}, 1, ..., 1, e^{-ik})``.

The two agree for ``n = 2``.  For ``n = 1`` the walk symbol equals the tensor
operator evaluated at ``2k``.  For ``n >= 3`` they are different operators.

Fourier convention: ``Psi(k) = sum_x Psi(x) e^{ikx}``, so a right move
multiplies by ``e^{ik}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core import build_coin, hadamard
from ..errors import WalkDomainError

__all__ = [
    "MomentumGrid",
    "default_grid",
    "half_step_block",
    "apply_tensor_power",
    "momentum_step_operator",
    "walk_symbol",
    "shift_generator",
]


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid ``k_j = 2 pi j / M`` on ``[0, 2 pi)``."""

    num_points: int

    def __post_init__(self):
        if self.num_points < 1:
            raise WalkDomainError(f"grid needs at least one point, got {self.num_points}")

    @property
    def points(self) -> NDArray[np.float64]:
        return 2.0 * np.pi * np.arange(self.num_points) / self.num_points

    def resolves(self, steps: int) -> bool:
        """True when positions ``[-T, T]`` are recovered without aliasing."""
        return self.num_points >= 2 * steps + 1


def default_grid(steps: int) -> MomentumGrid:
    """Smallest power of two that is at least ``4 (T + 1)``."""
    target = 4 * (int(steps) + 1)
    return MomentumGrid(1 << (target - 1).bit_length())


def half_step_block(k: ArrayLike) -> NDArray[np.complex128]:
    """``diag(e^{ik/2}, e^{-ik/2}) H`` for scalar or array ``k`` (shape ``k.shape + (2, 2)``)."""
    k = np.asarray(k, dtype=np.float64)
    phase = np.stack([np.exp(0.5j * k), np.exp(-0.5j * k)], axis=-1)
    return phase[..., :, None] * hadamard()


def apply_tensor_power(block: np.ndarray, array: np.ndarray, n: int) -> np.ndarray:
    """
    Apply ``block^{(x)n}`` to the leading axis of ``array`` (length ``2**n``).

    The leading axis is reshaped into n qubit axes (big-endian) and the 2x2
    block is contracted into each in turn, avoiding the dense ``2**n`` square.
    """
    rest = array.shape[1:]
    t = array.reshape((2,) * n + rest)
    for axis in range(n):
        t = np.moveaxis(np.tensordot(block, t, axes=([1], [axis])), 0, axis)
    return t.reshape((2**n,) + rest)


def momentum_step_operator(n: int, k: float) -> NDArray[np.complex128]:
    """Dense ``U_s(k/2)^{(x)n}``; unitary for every real ``k``."""
    if n < 1:
        raise WalkDomainError(f"n must be positive, got {n}")
    block = half_step_block(float(k))
    return apply_tensor_power(block, np.eye(2**n, dtype=np.complex128), n)


def shift_generator(n: int) -> NDArray[np.float64]:
    """Diagonal of the displacement generator: +1 on ``|0..0>``, -1 on ``|1..1>``."""
    g = np.zeros(2**n)
    g[0] = 1.0
    g[-1] = -1.0
    return g


def walk_symbol(n: int, k: ArrayLike, coin: np.ndarray | None = None) -> NDArray[np.complex128]:
    """
    Exact momentum-space step ``D(k) C`` of the lattice walk.

    Accepts scalar or array ``k``; the result has shape ``k.shape + (2**n, 2**n)``.
    """
    coin = build_coin(n) if coin is None else np.asarray(coin, dtype=np.complex128)
    k = np.asarray(k, dtype=np.float64)
    diag = np.exp(1j * np.multiply.outer(k, shift_generator(n)))
    return diag[..., :, None] * coin

"""
State-vector simulation of a one-dimensional walk with an n-qubit coin.

The coin register holds ``n`` qubits, so the internal space has dimension
``2**n``.  Coin basis index ``c`` is the big-endian bit pattern of the qubits:
``c = 0`` is ``|0...0>`` and ``c = 2**n - 1`` is ``|1...1>``.  One step of the
walk applies the coin at every site and then the conditional shift

    |0...0> (x)|x>  ->  |0...0> (x)|x+1>
    |1...1> (x)|x>  ->  |1...1> (x)|x-1>
    anything else   ->  unchanged position

For ``n = 1`` the last branch is empty and the walker always moves.

Amplitudes are stored densely as an array of shape ``(num_positions, 2**n)``
whose row 0 corresponds to lattice position ``offset``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from numpy.typing import NDArray

from .errors import InvariantViolation, WalkDomainError

__all__ = [
    "N_MAX",
    "UNITARY_TOL",
    "hadamard",
    "build_coin",
    "ghz_amplitudes",
    "InitialState",
    "WalkConfig",
    "StateVector",
    "ProbabilityDistribution",
    "apply_coin",
    "apply_shift",
    "inverse_shift",
    "initial_state_vector",
    "iter_states",
    "evolve",
    "probabilities",
]

N_MAX = 12
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
STEP_DRIFT_TOL = 1e-12
TOTAL_DRIFT_TOL = 1e-10


def hadamard() -> NDArray[np.complex128]:
    """Return the 2x2 Hadamard matrix (1/sqrt(2)) [[1, 1], [1, -1]]."""
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


def _check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise WalkDomainError(f"number of qubits must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= N_MAX:
        raise WalkDomainError(f"number of qubits must lie in [1, {N_MAX}], got {n}")
    return n


def build_coin(n: int) -> NDArray[np.complex128]:
    """
    Return the n-fold tensor power of the Hadamard matrix.

    Every entry equals ``+-2**(-n/2)``; entry ``(r, c)`` carries the sign
    ``(-1)**popcount(r & c)``.

    Raises
    ------
    WalkDomainError
        If ``n`` is not an integer in ``[1, N_MAX]``.
    """
    n = _check_n(n)
    coin = np.ones((1, 1), dtype=np.complex128)
    h = hadamard()
    for _ in range(n):
        coin = np.kron(coin, h)
    return coin


def ghz_amplitudes(n: int) -> NDArray[np.complex128]:
    """Coin amplitudes of (|0...0> + |1...1>)/sqrt(2); the Bell state for n=2."""
    n = _check_n(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return amps


def _is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix @ matrix.conj().T - eye)) <= tol)


@dataclass(frozen=True, eq=False)
class InitialState:
    """Coin amplitudes placed on a single lattice site."""

    coin_amplitudes: NDArray[np.complex128]
    origin: int = 0

    def __post_init__(self):
        amps = np.array(self.coin_amplitudes, dtype=np.complex128).reshape(-1)
        d = amps.size
        if d < 2 or d & (d - 1):
            raise WalkDomainError(f"coin vector length must be a power of two >= 2, got {d}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise WalkDomainError(f"coin amplitudes must have unit norm, got {norm!r}")
        amps.flags.writeable = False
        object.__setattr__(self, "coin_amplitudes", amps)
        object.__setattr__(self, "origin", int(self.origin))

    @classmethod
    def ghz(cls, n: int, origin: int = 0) -> "InitialState":
        return cls(ghz_amplitudes(n), origin)

    @property
    def n(self) -> int:
        return self.coin_amplitudes.size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class WalkConfig:
    """
    Parameters of a single walk.

    Parameters
    ----------
    n : int
        Number of coin qubits, ``1 <= n <= N_MAX``.
    steps : int
        Number of coin-shift applications ``T >= 0``.
    initial_state : InitialState, optional
        Defaults to the GHZ coin state at the origin.
    coin : ndarray, optional
        Any unitary ``2**n x 2**n`` matrix; defaults to ``build_coin(n)``.
    """

    n: int
    steps: int
    initial_state: Optional[InitialState] = None
    coin: Optional[NDArray[np.complex128]] = field(default=None, repr=False)

    def __post_init__(self):
        n = _check_n(self.n)
        object.__setattr__(self, "n", n)
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)):
            raise WalkDomainError(f"steps must be an integer, got {self.steps!r}")
        if self.steps < 0:
            raise WalkDomainError(f"steps must be nonnegative, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

        if self.initial_state is None:
            object.__setattr__(self, "initial_state", InitialState.ghz(n))
        elif self.initial_state.coin_amplitudes.size != 2**n:
            raise WalkDomainError(
                f"initial state has {self.initial_state.coin_amplitudes.size} coin "
                f"amplitudes, expected {2**n}"
            )

        if self.coin is None:
            coin = build_coin(n)
        else:
            coin = np.array(self.coin, dtype=np.complex128)
            if coin.shape != (2**n, 2**n):
                raise WalkDomainError(f"coin must have shape {(2**n, 2**n)}, got {coin.shape}")
            if not _is_unitary(coin):
                raise WalkDomainError("custom coin is not unitary")
        coin.flags.writeable = False
        object.__setattr__(self, "coin", coin)

    @property
    def dim(self) -> int:
        return 2**self.n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Walk wavefunction; ``amplitudes[i, c]`` lives at position ``offset + i``."""

    amplitudes: NDArray[np.complex128]
    offset: int

    @property
    def num_positions(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def n(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.offset, self.offset + self.num_positions)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude_at(self, x: int) -> NDArray[np.complex128]:
        """Coin vector at lattice position ``x`` (zeros outside storage)."""
        i = x - self.offset
        if 0 <= i < self.num_positions:
            return self.amplitudes[i].copy()
        return np.zeros(self.dim, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """Nonnegative weights over consecutive lattice positions starting at ``offset``."""

    weights: NDArray[np.float64]
    offset: int

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.offset, self.offset + self.weights.size)

    def total(self) -> float:
        return float(self.weights.sum())

    def at(self, x: int) -> float:
        i = x - self.offset
        return float(self.weights[i]) if 0 <= i < self.weights.size else 0.0

    def as_dict(self, drop_zeros: bool = True) -> dict[int, float]:
        return {
            int(x): float(p)
            for x, p in zip(self.positions, self.weights)
            if p > 0 or not drop_zeros
        }


def _frozen(state: StateVector) -> StateVector:
    state.amplitudes.flags.writeable = False
    return state


def apply_coin(state: StateVector, coin: NDArray[np.complex128]) -> StateVector:
    """Left-multiply the coin vector at every site by ``coin``."""
    coin = np.asarray(coin)
    if coin.shape != (state.dim, state.dim):
        raise WalkDomainError(
            f"coin of shape {coin.shape} does not act on coin dimension {state.dim}"
        )
    # rows are sites, so C @ psi_x for all x at once is psi @ C^T
    return _frozen(StateVector(state.amplitudes @ coin.T, state.offset))


def apply_shift(state: StateVector) -> StateVector:
    """
    Conditional shift: coin index 0 moves right, the last index moves left.

    Raises
    ------
    InvariantViolation
        If nonzero amplitude would leave the allocated position range.
    """
    psi = state.amplitudes
    last = state.dim - 1
    if psi[-1, 0] != 0 or psi[0, last] != 0:
        raise InvariantViolation("shift would move amplitude past the allocated lattice")
    out = psi.copy()
    out[0, 0] = 0
    out[1:, 0] = psi[:-1, 0]
    out[-1, last] = 0
    out[:-1, last] = psi[1:, last]
    return _frozen(StateVector(out, state.offset))


def inverse_shift(state: StateVector) -> StateVector:
    """Undo :func:`apply_shift`."""
    psi = state.amplitudes
    last = state.dim - 1
    if psi[0, 0] != 0 or psi[-1, last] != 0:
        raise InvariantViolation("inverse shift would move amplitude past the allocated lattice")
    out = psi.copy()
    out[-1, 0] = 0
    out[:-1, 0] = psi[1:, 0]
    out[0, last] = 0
    out[1:, last] = psi[:-1, last]
    return _frozen(StateVector(out, state.offset))


def initial_state_vector(config: WalkConfig) -> StateVector:
    """Allocate the ``[origin - T, origin + T]`` lattice and place the initial coin state."""
    T = config.steps
    psi = np.zeros((2 * T + 1, config.dim), dtype=np.complex128)
    psi[T] = config.initial_state.coin_amplitudes
    return _frozen(StateVector(psi, config.initial_state.origin - T))


def iter_states(config: WalkConfig, *, check_norm: bool = True) -> Iterator[StateVector]:
    """
    Yield the state after 0, 1, ..., T steps.

    With ``check_norm`` the squared norm is compared to 1 after every step;
    drift beyond 1e-12 per step or 1e-10 cumulative raises InvariantViolation.
    """
    state = initial_state_vector(config)
    yield state
    coin = config.coin
    prev = state.norm_squared()
    start = prev
    for t in range(1, config.steps + 1):
        state = apply_shift(apply_coin(state, coin))
        if check_norm:
            cur = state.norm_squared()
            if abs(cur - prev) > STEP_DRIFT_TOL or abs(cur - start) > TOTAL_DRIFT_TOL:
                raise InvariantViolation(
                    f"norm drift at step {t}: |psi|^2 = {cur!r} (previous {prev!r})"
                )
            prev = cur
        yield state


def evolve(config: WalkConfig) -> StateVector:
    """Return the state after ``config.steps`` coin-shift steps."""
    state = None
    for state in iter_states(config):
        pass
    return state


def probabilities(state: StateVector) -> ProbabilityDistribution:
    """Position distribution ``P(x) = sum_c |psi(x, c)|^2``."""
    weights = np.sum(np.abs(state.amplitudes) ** 2, axis=1)
    return ProbabilityDistribution(weights, state.offset)

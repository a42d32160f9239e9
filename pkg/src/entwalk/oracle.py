"""
Brute-force path-sum reference for small walks.

Every coin history ``(c_0, c_1, ..., c_T)`` is enumerated explicitly.  A history
contributes ``a[c_0] * prod_t C[c_t, c_{t-1}]`` to the final amplitude at
position ``origin + sum_t delta(c_t)`` and coin index ``c_T``, where ``delta`` is
+1 for the all-zeros coin state, -1 for the all-ones state and 0 otherwise.

The cost is ``(#nonzero initial coins) * (2**n)**T`` branches, so this is only
meant for n <= 3 and T <= 6 or so.  It shares no code with the step-by-step
evolution in :mod:`entwalk.core`.
"""

from __future__ import annotations

import numpy as np

from .core import StateVector, WalkConfig

MAX_BRANCHES = 5_000_000


def coin_displacements(dim: int) -> np.ndarray:
    delta = np.zeros(dim, dtype=np.int64)
    delta[0] = 1
    delta[dim - 1] = -1
    return delta


def path_sum_state(config: WalkConfig) -> StateVector:
    """Final state of ``config`` computed by summing over all coin histories."""
    d = config.dim
    T = config.steps
    coin = np.asarray(config.coin)
    a = config.initial_state.coin_amplitudes
    x0 = config.initial_state.origin
    delta = coin_displacements(d)

    starts = np.flatnonzero(a)
    if len(starts) * d**T > MAX_BRANCHES:
        raise ValueError(f"path sum would enumerate {len(starts) * d**T} branches")

    out = np.zeros((2 * T + 1, d), dtype=np.complex128)
    if T == 0:
        out[T] = a
        return StateVector(out, x0 - T)

    # histories[h, t] is the coin index after step t+1
    histories = np.indices((d,) * T).reshape(T, -1).T
    displacement = delta[histories].sum(axis=1)
    for c0 in starts:
        prev = np.full(histories.shape[0], c0)
        weight = np.full(histories.shape[0], a[c0], dtype=np.complex128)
        for t in range(T):
            cur = histories[:, t]
            weight = weight * coin[cur, prev]
            prev = cur
        np.add.at(out, (displacement + T, histories[:, -1]), weight)
    return StateVector(out, x0 - T)

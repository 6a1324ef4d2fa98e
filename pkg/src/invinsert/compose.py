"""Classical iteration of an exact (M, k) subroutine to solve N = M^h.

Each round keeps an interval [base, base + M^t) known to contain the answer,
picks the M - 1 equally spaced probe positions base + scale - 1,
base + 2 scale - 1, ..., and runs the exact subroutine against the reduced
oracle those probes induce.  The measured subanswer narrows the interval by
a factor of M, so h rounds and h k queries pin the answer exactly.  The
composed procedure is classical control around quantum subroutines and is
not itself translationally invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import CompositionError, ContractError
from .hilbert import POSITION, PhaseSchedule, StateVector

SUCCESS_FLOOR = 1 - 1e-6


class ReducedOracle:
    """Doubled-domain oracle of the reduced insertion function.

    f'(s) = f_j(base + (s + 1) scale - 1) for s = 0..M-1, doubled to 2M
    points the same way as the full problem.  Every ``apply`` counts as one
    query to the underlying f_j.
    """

    def __init__(self, j: int, base: int, scale: int, m: int):
        if scale < 1 or m < 2:
            raise ValueError("need scale >= 1 and m >= 2")
        if not base <= j < base + m * scale:
            raise ContractError(
                f"hidden index {j} outside the interval [{base}, {base + m * scale})"
            )
        s = np.arange(m)
        probes = base + (s + 1) * scale - 1
        f = np.where(probes < j, -1.0, 1.0)
        self.m = m
        self.signs = np.concatenate([f, -f])
        self.queries = 0

    def apply(self, state: StateVector) -> StateVector:
        if state.basis != POSITION or state.n != self.m:
            raise ValueError("reduced oracle expects a position-basis state of its own size")
        self.queries += 1
        return StateVector(self.m, POSITION, self.signs * state.amps)


def reduced_oracle(j: int, base: int, scale: int, m: int) -> ReducedOracle:
    return ReducedOracle(j, base, scale, m)


@dataclass(frozen=True)
class CompositionRun:
    m: int
    k: int
    h: int
    n: int
    hidden_j: int
    found_j: int
    queries_used: int
    per_level: list  # (interval base, level t, subanswer j')


def _run_subroutine(oracle: ReducedOracle, schedule: PhaseSchedule) -> StateVector:
    state = hilbert.uniform_start(schedule.n)
    for stage in schedule.stages:
        state = oracle.apply(state)
        state = hilbert.apply_momentum_phases(state, stage)
    return state


def compose_solve(
    m: int, k: int, h: int, schedule: PhaseSchedule, hidden_j: int
) -> CompositionRun:
    """Locate hidden_j in 0..M^h - 1 with h runs of the (M, k) subroutine.

    Measurement is simulated deterministically: the exact subroutine leaves
    essentially unit overlap with exactly one target, and that subanswer is
    selected.  An overlap below 1 - 1e-6 at any level aborts, since the
    schedule is then not exact enough to compose.
    """
    if schedule.n != m or schedule.k != k:
        raise ValueError(
            f"schedule is for (n={schedule.n}, k={schedule.k}), expected ({m}, {k})"
        )
    if h < 1:
        raise ValueError(f"need h >= 1, got {h}")
    n_total = m**h
    if not 0 <= hidden_j < n_total:
        raise ValueError(f"hidden index must lie in 0..{n_total - 1}, got {hidden_j}")

    sign = hilbert.final_sign(k)
    targets = np.array([hilbert.target_state(j, sign, m).amps for j in range(m)])
    base = 0
    queries = 0
    per_level = []
    for t in range(h, 0, -1):
        scale = m ** (t - 1)
        oracle = ReducedOracle(hidden_j, base, scale, m)
        final = _run_subroutine(oracle, schedule)
        probs = np.abs(targets @ np.conj(final.amps)) ** 2
        best = int(np.argmax(probs))
        if probs[best] < SUCCESS_FLOOR:
            raise CompositionError(
                f"level {t}: best overlap {probs[best]:.6f} below {SUCCESS_FLOOR}; "
                "the subroutine schedule is not exact"
            )
        per_level.append((base, t, best))
        base += best * scale
        queries += oracle.queries
    return CompositionRun(
        m=m,
        k=k,
        h=h,
        n=n_total,
        hidden_j=hidden_j,
        found_j=base,
        queries_used=queries,
        per_level=per_level,
    )


def rate(k: int, m: int) -> float:
    """Asymptotic queries per log2(N) when the (M, k) subroutine is iterated."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    return k / np.log2(m)

"""
Admission control with continuous SNRs.

Two schedulers share the same inputs: a random-placement greedy baseline
and the Iterative Thresholding Algorithm (ITA). ITA walks d = 1, 2, ...
and, at each level, marks a block active for a user when its SNR reaches
the smallest SNR at which d equal blocks meet the SLA. It then solves the
resulting binary problem for the users and blocks still unassigned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .admission import greedy_admission, matching_admission_d1, utility_order
from .fbl import SlaParams, min_snr_for_d, sla_satisfied
from .feasibility import check_feasibility
from .instance import AdmissionResult, BinaryInstance, SnrGrid

DEFAULT_D_MAX = 10


def continuous_sla_satisfied(assigned_snrs: Sequence[float], sla: SlaParams) -> bool:
    return sla_satisfied(assigned_snrs, sla)


def baseline_greedy_continuous(
    grid: SnrGrid, utilities, sla: SlaParams, rng: np.random.Generator
) -> AdmissionResult:
    """Decreasing-utility order; each user draws random free blocks until its SLA holds.

    A user that exhausts the free blocks without meeting its SLA is rejected
    and every block it drew is returned to the pool.
    """
    K, R = grid.K, grid.R
    utilities = np.asarray(utilities, dtype=float)
    result = AdmissionResult.empty(K, R, utilities)
    free = np.ones(R, dtype=bool)
    for k in utility_order(utilities, rng):
        pool = np.flatnonzero(free)
        drawn = []
        for r in rng.permutation(pool):
            drawn.append(int(r))
            if continuous_sla_satisfied(grid.gamma[k, drawn], sla):
                break
        else:
            continue
        free[drawn] = False
        result.schedule[k, drawn] = 1
        result.admitted[k] = True
    return result


@dataclass
class ItaLevel:
    d: int
    threshold: float
    method: str  # "feasible" | "matching" | "greedy"
    admitted: list


@dataclass
class ItaState:
    remaining: list
    scheduled: list
    available: list
    x: np.ndarray
    level: int = 0
    d_max: int = DEFAULT_D_MAX
    history: list = field(default_factory=list)


def ita(
    grid: SnrGrid,
    utilities,
    sla: SlaParams,
    d_max: int = DEFAULT_D_MAX,
    rng: np.random.Generator = None,
    return_state: bool = False,
):
    """Iterative Thresholding Algorithm.

    Users admitted at level d hold d blocks each with SNR at least s(d), so
    they meet the SLA by construction. Stops early once no blocks or no
    users remain.
    """
    if d_max < 1:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    if rng is None:
        rng = np.random.default_rng()
    K, R = grid.K, grid.R
    utilities = np.asarray(utilities, dtype=float)
    state = ItaState(
        remaining=list(range(K)),
        scheduled=[],
        available=list(range(R)),
        x=np.zeros((K, R), dtype=np.int8),
        d_max=d_max,
    )
    for d in range(1, d_max + 1):
        if not state.remaining or not state.available:
            break
        state.level = d
        s = min_snr_for_d(d, sla)
        users = np.array(state.remaining)
        blocks = np.array(state.available)
        sub = BinaryInstance(
            delta=(grid.gamma[np.ix_(users, blocks)] >= s).astype(np.int8),
            demands=np.full(len(users), d),
            utilities=utilities[users],
        )
        outcome = check_feasibility(sub, range(len(users)), rng)
        if outcome.feasible:
            x_d, method = outcome.schedule, "feasible"
        elif d == 1:
            x_d, method = matching_admission_d1(sub).schedule, "matching"
        else:
            x_d, method = greedy_admission(sub, rng)[0].schedule, "greedy"

        newly = []
        for i, k in enumerate(users):
            cols = blocks[np.flatnonzero(x_d[i])]
            if len(cols) >= d:
                newly.append(int(k))
            # only users reaching d blocks keep them; see the note below
            state.x[k, cols] = 1 if len(cols) >= d else 0
        # Feasible LP schedules, matchings and greedy passes give each user
        # either 0 or >= d blocks, so nothing is dropped above in practice.
        state.scheduled.extend(newly)
        state.remaining = [k for k in state.remaining if k not in set(newly)]
        used = set(np.flatnonzero(state.x.sum(axis=0)).tolist())
        state.available = [r for r in state.available if r not in used]
        state.history.append(ItaLevel(d, s, method, newly))

    result = AdmissionResult.empty(K, R, utilities)
    result.schedule[:] = state.x
    result.admitted[state.scheduled] = True
    if return_state:
        return result, state
    return result

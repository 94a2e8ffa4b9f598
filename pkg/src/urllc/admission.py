"""
Admission control in the binary SNR model.

``greedy_admission`` serves users in decreasing utility and grabs random
free active blocks for each; with unit utilities it admits at least
1/(d+1) of the optimum, d being the largest demand. ``matching_admission_d1``
is exact when every user needs one block. ``exact_uum`` is a
branch-and-bound reference for small K.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .feasibility import BlockAssignment
from .instance import AdmissionResult, BinaryInstance

EXACT_USER_CAP = 16


@dataclass
class GreedyTrace:
    order: list
    outcomes: dict = field(default_factory=dict)  # user -> tuple of blocks, or None if rejected

    @property
    def rejected(self) -> list:
        return [k for k in self.order if self.outcomes[k] is None]


def utility_order(utilities: np.ndarray, rng: np.random.Generator) -> list:
    """Users by decreasing utility, ties in random order."""
    tiebreak = rng.permutation(len(utilities))
    return [int(k) for k in np.lexsort((tiebreak, -np.asarray(utilities, dtype=float)))]


def greedy_admission(instance: BinaryInstance, rng: np.random.Generator):
    """Single greedy pass. Returns ``(AdmissionResult, GreedyTrace)``."""
    K, R = instance.K, instance.R
    result = AdmissionResult.empty(K, R, instance.utilities)
    free = np.ones(R, dtype=bool)
    trace = GreedyTrace(order=utility_order(instance.utilities, rng))
    for k in trace.order:
        need = int(instance.demands[k])
        candidates = np.flatnonzero(free & (instance.delta[k] == 1))
        if len(candidates) < need:
            trace.outcomes[k] = None
            continue
        picked = np.sort(rng.choice(candidates, size=need, replace=False)) if need else np.array([], int)
        free[picked] = False
        result.schedule[k, picked] = 1
        result.admitted[k] = True
        trace.outcomes[k] = tuple(int(r) for r in picked)
    return result, trace


def matching_admission_d1(instance: BinaryInstance) -> AdmissionResult:
    """Maximum-utility bipartite matching of users to their active blocks."""
    if np.any(instance.demands > 1):
        raise ValueError("matching admission requires every demand to be at most 1")
    K, R = instance.K, instance.R
    result = AdmissionResult.empty(K, R, instance.utilities)
    # zero-demand users are served without blocks
    result.admitted[instance.demands == 0] = True
    needy = np.flatnonzero(instance.demands == 1)
    if len(needy) == 0 or R == 0:
        return result
    profit = instance.delta[needy].astype(float) * instance.utilities[needy, None]
    # pairs matched on an inactive block are dropped below
    rows, cols = linear_sum_assignment(profit, maximize=True)
    for i, r in zip(rows, cols):
        k = needy[i]
        if instance.delta[k, r]:
            result.schedule[k, r] = 1
            result.admitted[k] = True
    return result


def exact_uum(instance: BinaryInstance, cap: int = EXACT_USER_CAP) -> AdmissionResult:
    """Maximum-utility admissible user set by branch and bound.

    Users are branched on in decreasing utility (include before exclude).
    A subtree is cut when its utility bound cannot beat the incumbent, and
    an include branch is cut as soon as the flow oracle cannot route the
    new user's demand. Feasibility is monotone under taking subsets, so
    this search is exact.
    """
    K, R = instance.K, instance.R
    if K > cap:
        raise ValueError(f"exact_uum is limited to {cap} users, got {K}")
    w = instance.utilities
    candidates = [
        k for k in range(K)
        if instance.demands[k] <= instance.delta[k].sum()
    ]
    order = sorted(candidates, key=lambda k: (-w[k], k))
    suffix = np.zeros(len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + w[order[i]]

    best_value = -1.0
    best_users: list = []
    best_flow: Optional[BlockAssignment] = None

    def search(i, chosen, value, flow):
        nonlocal best_value, best_users, best_flow
        if value > best_value:
            best_value, best_users, best_flow = value, list(chosen), flow
        if i == len(order) or value + suffix[i] <= best_value:
            return
        k = order[i]
        trial = flow.copy()
        if trial.add_user(k):
            chosen.append(k)
            search(i + 1, chosen, value + w[k], trial)
            chosen.pop()
        if value + suffix[i + 1] > best_value:
            search(i + 1, chosen, value, flow)

    search(0, [], 0.0, BlockAssignment(instance))
    result = AdmissionResult.empty(K, R, w)
    result.admitted[best_users] = True
    if best_flow is not None:
        result.schedule[:] = best_flow.schedule()
    return result

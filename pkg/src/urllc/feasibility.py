"""
Schedulability of a user set in the binary SNR model.

The relaxed LP keeps the demand, per-block capacity and activity rows of
the integer problem and lets ``x`` range over ``[0, 1]``. Its constraint
matrix is totally unimodular, so with a random cost vector the optimum is
a unique integral vertex. :func:`check_feasibility` solves that LP, rounds
the solution and re-verifies it exactly; :func:`flow_feasibility_oracle`
answers the same question independently through an augmenting-path max
flow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .instance import BinaryInstance, verify_schedule

log = logging.getLogger(__name__)

ROUNDING_TOL = 1e-6
MAX_RETRIES = 5


class InconsistencyError(RuntimeError):
    """Two exact methods disagreed; indicates a bug rather than bad input."""


@dataclass
class RelaxedLp:
    """``min c.x  s.t.  A x <= b, 0 <= x <= 1`` over the variables of ``users``.

    Column ``r * M + i`` holds ``x[users[i], r]`` (block-major stacking).
    Rows are ordered demand rows (one per user, negated so they read
    ``-sum_r x <= -d``), then capacity rows (one per block), then one
    activity row ``x <= delta`` per variable.
    """

    users: tuple
    R: int
    A: np.ndarray
    b: np.ndarray
    costs: np.ndarray

    @property
    def M(self) -> int:
        return len(self.users)

    @property
    def n_vars(self) -> int:
        return self.R * self.M

    @property
    def n_demand_rows(self) -> int:
        return self.M

    @property
    def n_capacity_rows(self) -> int:
        return self.R

    def column(self, i: int, r: int) -> int:
        return r * self.M + i

    def to_matrix(self, xi: np.ndarray, K: int) -> np.ndarray:
        """Scatter an LP vector back into a ``K x R`` schedule."""
        x = np.zeros((K, self.R), dtype=float)
        grid = np.asarray(xi, dtype=float).reshape(self.R, self.M)
        for i, k in enumerate(self.users):
            x[k] = grid[:, i]
        return x

    def to_lp_format(self) -> str:
        """Dump in CPLEX LP text format (rows u<k>, b<r>, a<k>_<r>; columns x<k>_<r>)."""
        names = [f"x{k}_{r}" for r in range(self.R) for k in self.users]
        lines = ["\\ relaxed URLLC feasibility LP", "Minimize", " obj:"]
        terms = [f"{self.costs[j]:.17g} {names[j]}" for j in range(self.n_vars)]
        lines.append("  " + (" + ".join(terms) if terms else "0"))
        lines.append("Subject To")
        for row in range(self.A.shape[0]):
            if row < self.M:
                label = f"u{self.users[row]}"
            elif row < self.M + self.R:
                label = f"b{row - self.M}"
            else:
                j = row - self.M - self.R
                r, i = divmod(j, self.M)
                label = f"a{self.users[i]}_{r}"
            coeffs = self.A[row]
            nz = np.flatnonzero(coeffs)
            expr = " ".join(
                f"{'+' if coeffs[j] > 0 else '-'} {names[j]}" for j in nz
            ) or "0"
            lines.append(f" {label}: {expr} <= {self.b[row]:g}")
        lines.append("Bounds")
        lines.extend(f" 0 <= {name} <= 1" for name in names)
        lines.append("End")
        return "\n".join(lines) + "\n"


def build_relaxed_lp(
    instance: BinaryInstance, users: Sequence[int], rng: np.random.Generator
) -> RelaxedLp:
    users = tuple(int(k) for k in users)
    M, R = len(users), instance.R
    n = R * M
    A = np.zeros((M + R + n, n))
    b = np.zeros(M + R + n)
    for i, k in enumerate(users):
        A[i, i::M] = -1.0
        b[i] = -float(instance.demands[k])
    for r in range(R):
        A[M + r, r * M:(r + 1) * M] = 1.0
        b[M + r] = 1.0
    A[M + R:, :] = np.eye(n)
    for r in range(R):
        for i, k in enumerate(users):
            b[M + R + r * M + i] = float(instance.delta[k, r])
    costs = rng.uniform(0.0, 1.0, size=n)
    return RelaxedLp(users=users, R=R, A=A, b=b, costs=costs)


def has_bipartite_row_structure(lp: RelaxedLp) -> bool:
    """Sufficient TU certificate for the stacked demand/capacity/identity matrix.

    After flipping the sign of the demand rows, every column must hold
    exactly one 1 among the demand rows and exactly one 1 among the capacity
    rows, every other entry being 0; the trailing block must be the
    identity. Sign flips and appending identity rows preserve total
    unimodularity.
    """
    A = lp.A
    M, R, n = lp.M, lp.R, lp.n_vars
    if A.shape != (M + R + n, n):
        return False
    if not np.isin(A, (-1.0, 0.0, 1.0)).all():
        return False
    demand = -A[:M]
    capacity = A[M:M + R]
    if not (np.isin(demand, (0.0, 1.0)).all() and np.isin(capacity, (0.0, 1.0)).all()):
        return False
    if n and not ((demand.sum(axis=0) == 1).all() and (capacity.sum(axis=0) == 1).all()):
        return False
    if not np.array_equal(A[M + R:], np.eye(n)):
        return False
    return bool(np.all(lp.b == np.round(lp.b)))


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "error"
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    message: str = ""


def solve_lp(lp: RelaxedLp) -> LpSolution:
    """Solve with the HiGHS dual simplex, which returns a basic (vertex) optimum."""
    if lp.n_vars == 0:
        if np.all(lp.b >= 0):
            return LpSolution("optimal", np.zeros(0), 0.0)
        return LpSolution("infeasible")
    res = linprog(
        lp.costs, A_ub=lp.A, b_ub=lp.b, bounds=(0.0, 1.0), method="highs-ds"
    )
    if res.status == 0:
        return LpSolution("optimal", np.asarray(res.x), float(res.fun), res.message)
    if res.status == 2:
        return LpSolution("infeasible", message=res.message)
    return LpSolution("error", message=res.message)


# Flow oracle ---------------------------------------------------------------

class BlockAssignment:
    """Integral flow on source -> user (cap d_k) -> active block (cap 1) -> sink (cap 1).

    ``owner[r]`` is the user holding block ``r`` (or -1). Users are added one
    at a time; each added unit of demand is an augmenting path found by DFS
    over alternating user/block edges. Because previously added users stay
    saturated, augmenting from the new user alone is enough to reach the
    maximum flow.
    """

    def __init__(self, instance: BinaryInstance):
        self.instance = instance
        self.owner = np.full(instance.R, -1, dtype=np.int64)
        self.adjacency = [instance.active_blocks(k) for k in range(instance.K)]

    def copy(self) -> "BlockAssignment":
        other = object.__new__(BlockAssignment)
        other.instance = self.instance
        other.owner = self.owner.copy()
        other.adjacency = self.adjacency
        return other

    def _augment(self, k: int, seen: np.ndarray) -> bool:
        for r in self.adjacency[k]:
            if seen[r]:
                continue
            seen[r] = True
            holder = self.owner[r]
            if holder == -1 or self._augment(holder, seen):
                self.owner[r] = k
                return True
        return False

    def add_user(self, k: int) -> bool:
        """Route ``d_k`` more units for user ``k``; False (with partial state) on failure."""
        need = int(self.instance.demands[k])
        if need > len(self.adjacency[k]):
            return False
        for _ in range(need):
            seen = np.zeros(self.instance.R, dtype=bool)
            # blocks already held by k must not be re-taken by k itself
            seen[self.owner == k] = True
            if not self._augment(k, seen):
                return False
        return True

    def schedule(self) -> np.ndarray:
        x = np.zeros((self.instance.K, self.instance.R), dtype=np.int8)
        held = np.flatnonzero(self.owner >= 0)
        x[self.owner[held], held] = 1
        return x


@dataclass
class FlowResult:
    feasible: bool
    schedule: Optional[np.ndarray] = None


def flow_feasibility_oracle(instance: BinaryInstance, users: Sequence[int]) -> FlowResult:
    """Feasible iff the max flow saturates every demand of ``users``."""
    flow = BlockAssignment(instance)
    users = [int(k) for k in users]
    if sum(int(instance.demands[k]) for k in users) > instance.R:
        return FlowResult(False)
    for k in users:
        if not flow.add_user(k):
            return FlowResult(False)
    return FlowResult(True, flow.schedule())


# Algorithm 1 ---------------------------------------------------------------

@dataclass
class FeasibilityOutcome:
    feasible: bool
    schedule: Optional[np.ndarray] = None
    retry_count: int = 0
    used_fallback: bool = False


def round_lp_solution(lp: RelaxedLp, xi: np.ndarray, K: int, tol: float = ROUNDING_TOL):
    rounded = np.rint(xi)
    if xi.size and np.max(np.abs(xi - rounded)) > tol:
        return None
    return lp.to_matrix(rounded, K).astype(np.int8)


def check_feasibility(
    instance: BinaryInstance,
    users: Sequence[int],
    rng: np.random.Generator,
    max_retries: int = MAX_RETRIES,
) -> FeasibilityOutcome:
    """Decide whether ``users`` can all be served and return an integral schedule.

    The LP decides feasibility. A feasible LP optimum is rounded at
    ``ROUNDING_TOL`` and verified exactly; on failure fresh costs are drawn
    and the LP re-solved, up to ``max_retries`` times, after which the flow
    oracle supplies the schedule.
    """
    users = [int(k) for k in users]
    retries = 0
    lp_said_feasible = False
    while True:
        lp = build_relaxed_lp(instance, users, rng)
        sol = solve_lp(lp)
        if sol.status == "infeasible":
            if lp_said_feasible:
                raise InconsistencyError("LP flipped from feasible to infeasible across redraws")
            return FeasibilityOutcome(False, retry_count=retries)
        if sol.status == "optimal":
            lp_said_feasible = True
            x = round_lp_solution(lp, sol.x, instance.K)
            if x is not None and verify_schedule(instance, users, x):
                return FeasibilityOutcome(True, x, retry_count=retries)
        else:
            log.debug("LP solve failed: %s", sol.message)
        if retries >= max_retries:
            break
        retries += 1

    fallback = flow_feasibility_oracle(instance, users)
    if lp_said_feasible and not fallback.feasible:
        raise InconsistencyError("LP reported feasible but the flow oracle found no schedule")
    if not lp_said_feasible and not fallback.feasible:
        return FeasibilityOutcome(False, retry_count=retries, used_fallback=True)
    return FeasibilityOutcome(True, fallback.schedule, retry_count=retries, used_fallback=True)

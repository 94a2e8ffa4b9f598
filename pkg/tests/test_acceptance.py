"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import time
from itertools import combinations

import numpy as np

from urllc.admission import exact_uum, greedy_admission, matching_admission_d1
from urllc.experiments import rows_to_csv, run_binary_experiment, run_continuous_experiment, summarize
from urllc.fbl import SlaParams, db_to_linear, required_blocks
from urllc.feasibility import (
    build_relaxed_lp,
    check_feasibility,
    flow_feasibility_oracle,
    round_lp_solution,
    solve_lp,
)
from urllc.instance import ScenarioConfig, UtilityModel, verify_schedule
from urllc.reduction import graph_to_urllc, independent_set_brute_force, random_graph

from oracles import random_binary_instance

SLA = SlaParams(payload_bits=256, reliability=0.99999, channel_uses_per_block=84)


def test_c1_finite_blocklength_anchor(acceptance):
    start = time.perf_counter()
    at_half_db = required_blocks(db_to_linear(0.5), SLA)
    grid_db = np.round(np.arange(-10.0, 30.0 + 1e-9, 0.1), 10)
    counts = [required_blocks(db_to_linear(db), SLA) for db in grid_db]
    non_increasing = all(a >= b for a, b in zip(counts, counts[1:]))
    three_from = min(db for db, c in zip(grid_db, counts) if c is not None and c <= 3)
    elapsed = time.perf_counter() - start

    ok = at_half_db == 3 and non_increasing and -1.0 <= three_from <= 2.0 and elapsed < 1.0
    acceptance.record(
        "C1 finite-blocklength anchor",
        ok,
        f"required_blocks(0.5 dB)={at_half_db} (want 3), non-increasing={non_increasing}, "
        f"3-block threshold at {three_from:.1f} dB (want [-1, 2]), {elapsed:.2f}s",
    )
    assert non_increasing
    assert -1.0 <= three_from <= 2.0
    assert elapsed < 1.0
    assert at_half_db == 3


def test_c2_feasibility_exactness(acceptance):
    rng = np.random.default_rng(2002)
    start = time.perf_counter()
    mismatches = bad_schedules = feasible = 0
    for _ in range(1000):
        inst = random_binary_instance(rng, K_max=6, R_max=10, d_max=3)
        users = list(range(inst.K))
        out = check_feasibility(inst, users, rng)
        ref = flow_feasibility_oracle(inst, users)
        mismatches += out.feasible != ref.feasible
        if out.feasible:
            feasible += 1
            bad_schedules += not verify_schedule(inst, users, out.schedule)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and bad_schedules == 0 and elapsed < 30
    acceptance.record(
        "C2 feasibility exactness",
        ok,
        f"{mismatches} status mismatches, {bad_schedules} invalid schedules "
        f"({feasible}/1000 feasible), {elapsed:.1f}s",
    )
    assert ok


def test_c3_integrality(acceptance):
    rng = np.random.default_rng(3003)
    start = time.perf_counter()
    instances = successes = 0
    while instances < 10_000:
        inst = random_binary_instance(rng, K_max=6, R_max=10, d_max=3)
        users = list(range(inst.K))
        if not flow_feasibility_oracle(inst, users).feasible:
            continue
        instances += 1
        for _ in range(1 + 5):
            lp = build_relaxed_lp(inst, users, rng)
            sol = solve_lp(lp)
            if sol.status != "optimal":
                continue
            x = round_lp_solution(lp, sol.x, inst.K)
            if x is not None and verify_schedule(inst, users, x):
                successes += 1
                break
    elapsed = time.perf_counter() - start
    rate = successes / instances
    ok = rate >= 0.999 and elapsed < 300
    acceptance.record(
        "C3 integrality / TU rounding",
        ok,
        f"{successes}/{instances} rounded without flow fallback ({rate:.4%}), {elapsed:.1f}s",
    )
    assert ok


def test_c4_greedy_bound(acceptance):
    rng = np.random.default_rng(4004)
    start = time.perf_counter()
    violations = 0
    worst = np.inf
    for _ in range(500):
        inst = random_binary_instance(rng, K_max=6, R_max=10, d_max=3)
        opt = exact_uum(inst).total_utility
        got = greedy_admission(inst, rng)[0].total_utility
        d = int(inst.demands.max())
        violations += got < opt / (d + 1)
        if opt > 0:
            worst = min(worst, got / opt)

    ratios = {}
    for utility in (UtilityModel("uniform", w_max=5.0), UtilityModel("unit")):
        for K in (6, 10, 14):
            cfg = ScenarioConfig(K=K, R=50, trials=500, seed=40 + K, utility=utility)
            rows = run_binary_experiment(cfg)
            greedy = {r.trial: r.total_utility for r in rows if r.algorithm == "greedy"}
            exact = {r.trial: r.total_utility for r in rows if r.algorithm == "exact"}
            per_trial = [greedy[t] / exact[t] for t in exact if exact[t] > 0]
            ratios[(utility.model, K)] = float(np.mean(per_trial))
    elapsed = time.perf_counter() - start
    min_ratio = min(ratios.values())
    ok = violations == 0 and min_ratio >= 0.9 and elapsed < 120
    acceptance.record(
        "C4 GREEDY bound",
        ok,
        f"{violations} bound violations on 500 instances (worst ratio {worst:.3f}); "
        f"scenario mean ratio min {min_ratio:.4f} over {len(ratios)} cells, {elapsed:.1f}s",
    )
    assert ok


def test_c5_matching_optimal(acceptance):
    rng = np.random.default_rng(5005)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(500):
        inst = random_binary_instance(rng, K_max=7, R_max=7, d_max=1, weights="random")
        m = matching_admission_d1(inst)
        e = exact_uum(inst)
        mismatches += not (
            abs(m.total_utility - e.total_utility) <= 1e-12
            and verify_schedule(inst, m.admitted_users, m.schedule)
        )
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    acceptance.record("C5 d=1 matching optimality", ok, f"{mismatches}/500 mismatches, {elapsed:.1f}s")
    assert ok


def test_c6_reduction_equivalence(acceptance):
    rng = np.random.default_rng(6006)
    start = time.perf_counter()
    subset_errors = mis_errors = checked = 0
    for _ in range(50):
        g = random_graph(int(rng.integers(2, 9)), float(rng.uniform(0.2, 0.6)), rng)
        inst = graph_to_urllc(g)
        n = len(g.vertices)
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                if any(inst.demands[k] == 0 for k in subset):
                    continue  # isolated vertices sit outside the construction
                checked += 1
                schedulable = check_feasibility(inst, subset, rng).feasible
                subset_errors += schedulable != g.is_independent([g.vertices[k] for k in subset])
        mis_errors += exact_uum(inst).admitted_count != independent_set_brute_force(g)
    elapsed = time.perf_counter() - start
    ok = subset_errors == 0 and mis_errors == 0 and elapsed < 120
    acceptance.record(
        "C6 reduction equivalence",
        ok,
        f"{subset_errors} subset mismatches over {checked} subsets, {mis_errors} MIS mismatches, {elapsed:.1f}s",
    )
    assert ok


def test_c7_ita_vs_baseline(acceptance):
    start = time.perf_counter()
    cells = {}
    for R in (10, 30):
        for K in (10, 20, 30, 40, 50):
            cfg = ScenarioConfig(K=K, R=R, trials=1000, seed=7000 + 100 * R + K)
            stats = summarize(run_continuous_experiment(cfg))
            cells[(R, K)] = (stats.overall["ita"].mean_admitted, stats.overall["baseline"].mean_admitted)
    elapsed = time.perf_counter() - start
    congested = {c: v for c, v in cells.items() if c[1] >= c[0]}
    ordering = all(i >= b for i, b in congested.values())
    positive = any(i > b for i, b in cells.values())
    best = max(cells, key=lambda c: cells[c][0] / cells[c][1] if cells[c][1] > 0 else 0)
    gain = cells[best][0] / cells[best][1] - 1
    ok = ordering and positive and elapsed < 600
    detail = ", ".join(f"R={R},K={K}: {i:.2f}/{b:.2f}" for (R, K), (i, b) in sorted(cells.items()))
    acceptance.record(
        "C7 ITA vs baseline",
        ok,
        f"ita/baseline mean admitted {detail}; largest gain {gain:+.1%} at R={best[0]},K={best[1]}; {elapsed:.0f}s",
    )
    assert ok


def test_c8_determinism(acceptance):
    start = time.perf_counter()
    cont = ScenarioConfig(K=12, R=10, trials=25, seed=8008)
    binary = ScenarioConfig(K=8, R=20, trials=25, seed=8008, utility=UtilityModel("uniform"))
    same = (
        rows_to_csv(run_continuous_experiment(cont)).encode() == rows_to_csv(run_continuous_experiment(cont)).encode()
        and rows_to_csv(run_binary_experiment(binary)).encode() == rows_to_csv(run_binary_experiment(binary)).encode()
    )
    elapsed = time.perf_counter() - start
    acceptance.record("C8 determinism", same, f"byte-identical reruns: {same}, {elapsed:.1f}s")
    assert same

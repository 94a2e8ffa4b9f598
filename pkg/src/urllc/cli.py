"""Command-line front end.

Exit codes: 0 success, 1 infeasible / nobody admitted where a decision was
requested, 2 usage or input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import admission, continuous, experiments, feasibility
from .fbl import SlaParams, linear_to_db, min_snr_for_d
from .instance import (
    assign_demand_bands,
    binarize,
    generate_snr_grid,
    generate_utilities,
    instance_to_dict,
    load_instance,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _users(arg, K):
    if arg is None:
        return list(range(K))
    try:
        users = [int(u) for u in arg.split(",") if u.strip()]
    except ValueError:
        raise UsageError(f"--users must be a comma-separated list of integers, got {arg!r}")
    bad = [u for u in users if not 0 <= u < K]
    if bad:
        raise UsageError(f"--users out of range 0..{K - 1}: {bad}")
    return users


def _emit(payload, out):
    text = json.dumps(payload, indent=1) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_payload(result):
    return {
        "admitted": result.admitted_users,
        "total_utility": result.total_utility,
        "schedule": result.schedule.astype(int).tolist(),
    }


def _load(path, need):
    try:
        parts = load_instance(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}")
    if parts[need] is None:
        what = "a delta matrix and demands" if need == "instance" else "a gamma matrix"
        raise UsageError(f"{path}: this command needs {what}")
    return parts


def cmd_generate(args):
    mode, cfgs = experiments.load_config(args.config) if args.config else (None, [experiments.ScenarioConfig()])
    cfg = cfgs[0]
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    grid = generate_snr_grid(cfg, args.trial)
    utilities = generate_utilities(cfg, args.trial, grid)
    demands = assign_demand_bands([linear_to_db(m) for m in grid.mean_snr])
    thresholds = [min_snr_for_d(d, cfg.sla) for d in demands]
    instance = binarize(grid, thresholds, demands, utilities)
    _emit(instance_to_dict(instance=instance, grid=grid, sla=cfg.sla), args.out)
    return EXIT_OK


def cmd_feasible(args):
    parts = _load(args.instance, "instance")
    inst = parts["instance"]
    users = _users(args.users, inst.K)
    if args.method == "flow":
        res = feasibility.flow_feasibility_oracle(inst, users)
        outcome = feasibility.FeasibilityOutcome(res.feasible, res.schedule)
    else:
        outcome = feasibility.check_feasibility(inst, users, np.random.default_rng(args.seed))
    payload = {"feasible": outcome.feasible, "users": users, "retries": outcome.retry_count}
    if outcome.feasible:
        payload["schedule"] = outcome.schedule.astype(int).tolist()
    _emit(payload, args.out)
    return EXIT_OK if outcome.feasible else EXIT_NEGATIVE


def cmd_admit(args):
    inst = _load(args.instance, "instance")["instance"]
    rng = np.random.default_rng(args.seed)
    try:
        if args.algo == "greedy":
            result = admission.greedy_admission(inst, rng)[0]
        elif args.algo == "matching":
            result = admission.matching_admission_d1(inst)
        else:
            result = admission.exact_uum(inst, cap=args.cap)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(_result_payload(result), args.out)
    return EXIT_OK if result.admitted_count else EXIT_NEGATIVE


def cmd_ita(args):
    parts = _load(args.instance, "grid")
    grid = parts["grid"]
    sla = parts["sla"] or SlaParams()
    utilities = parts["utilities"]
    rng = np.random.default_rng(args.seed)
    if args.algo == "baseline":
        result = continuous.baseline_greedy_continuous(grid, utilities, sla, rng)
    else:
        result = continuous.ita(grid, utilities, sla, args.d_max, rng)
    _emit(_result_payload(result), args.out)
    return EXIT_OK if result.admitted_count else EXIT_NEGATIVE


def cmd_experiment(args):
    mode, cfgs = experiments.load_config(args.config) if args.config else (None, [experiments.ScenarioConfig()])
    mode = args.mode or mode
    if mode is None:
        raise UsageError("experiment mode not given (use --mode or the config's 'mode' key)")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    try:
        cfgs = [replace(c, **overrides) for c in cfgs]
    except ValueError as exc:
        raise UsageError(str(exc))
    run = experiments.run_binary_experiment if mode == "binary" else experiments.run_continuous_experiment
    rows = []
    for cfg in cfgs:
        rows.extend(run(cfg, timing=args.timing, workers=args.workers))
    if args.out:
        experiments.write_csv(rows, args.out)
    else:
        sys.stdout.write(experiments.rows_to_csv(rows))
    stats = experiments.summarize(rows)
    if args.plot_out:
        experiments.emit_plot_data(stats, args.plot_out, metric=args.metric)
    for name, s in sorted(stats.overall.items()):
        print(
            f"{name:>9}: admitted {s.mean_admitted:.3f} +/- {s.std_admitted:.3f}, "
            f"utility {s.mean_utility:.3f} +/- {s.std_utility:.3f} ({s.count} rows)",
            file=sys.stderr,
        )
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="urllc", description="URLLC admission control and RB scheduling")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw one trial's SNR grid and binarized instance as JSON")
    g.add_argument("--config")
    g.add_argument("--trial", type=int, default=0)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("feasible", help="check whether a user set is schedulable (binary model)")
    f.add_argument("--instance", required=True)
    f.add_argument("--users", help="comma-separated user indices (default: all)")
    f.add_argument("--method", choices=("lp", "flow"), default="lp")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out")
    f.set_defaults(func=cmd_feasible)

    a = sub.add_parser("admit", help="binary-model admission control")
    a.add_argument("--instance", required=True)
    a.add_argument("--algo", choices=("greedy", "exact", "matching"), default="greedy")
    a.add_argument("--cap", type=int, default=admission.EXACT_USER_CAP)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out")
    a.set_defaults(func=cmd_admit)

    i = sub.add_parser("ita", help="continuous-model admission with ITA (or the baseline)")
    i.add_argument("--instance", required=True)
    i.add_argument("--algo", choices=("ita", "baseline"), default="ita")
    i.add_argument("--d-max", type=int, default=continuous.DEFAULT_D_MAX)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out")
    i.set_defaults(func=cmd_ita)

    e = sub.add_parser("experiment", help="seeded Monte-Carlo comparison written as CSV")
    e.add_argument("--mode", choices=experiments.MODES)
    e.add_argument("--config")
    e.add_argument("--out")
    e.add_argument("--plot-out")
    e.add_argument("--metric", choices=("admitted", "utility"), default="admitted")
    e.add_argument("--seed", type=int)
    e.add_argument("--trials", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--timing", action="store_true", help="record wall-clock runtimes (output is then not reproducible)")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (UsageError, experiments.ConfigError) as exc:
        print(f"urllc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except feasibility.InconsistencyError as exc:
        print(f"urllc: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"urllc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""
Seeded Monte-Carlo comparisons and their CSV output.

Every trial draws its grid from a stream keyed by (seed, trial index), so
trials can run in any order or in parallel and still produce the same
rows. Each emitted schedule is re-verified before it is counted.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from functools import partial
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .admission import exact_uum, greedy_admission
from .continuous import DEFAULT_D_MAX, baseline_greedy_continuous, ita
from .fbl import linear_to_db, min_snr_for_d
from .feasibility import InconsistencyError
from .instance import (
    ALGORITHM_STREAM,
    MeanSnrModel,
    ScenarioConfig,
    UtilityModel,
    assign_demand_bands,
    binarize,
    generate_snr_grid,
    generate_utilities,
    sla_from_dict,
    trial_rng,
    verify_schedule,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentResultRow:
    trial: int
    algorithm: str
    K: int
    R: int
    admitted_count: int
    total_utility: float
    runtime_us: int
    seed: int


CSV_COLUMNS = [f.name for f in fields(ExperimentResultRow)]


def _timed(fn, timing):
    if not timing:
        return fn(), 0
    start = time.perf_counter_ns()
    out = fn()
    return out, (time.perf_counter_ns() - start) // 1000


def _row(cfg, trial, name, result, runtime):
    return ExperimentResultRow(
        trial=trial,
        algorithm=name,
        K=cfg.K,
        R=cfg.R,
        admitted_count=result.admitted_count,
        total_utility=result.total_utility,
        runtime_us=int(runtime),
        seed=cfg.seed,
    )


def binary_trial(cfg: ScenarioConfig, trial: int, timing: bool = False) -> list:
    grid = generate_snr_grid(cfg, trial)
    utilities = generate_utilities(cfg, trial, grid)
    demands = assign_demand_bands([linear_to_db(m) for m in grid.mean_snr])
    thresholds = [min_snr_for_d(d, cfg.sla) for d in demands]
    instance = binarize(grid, thresholds, demands, utilities)

    rows = []
    rng = trial_rng(cfg.seed, trial, ALGORITHM_STREAM)
    (greedy, _), runtime = _timed(lambda: greedy_admission(instance, rng), timing)
    runs = [("greedy", greedy, runtime)]
    if cfg.K <= cfg.exact_cap:
        exact, runtime = _timed(lambda: exact_uum(instance, cap=cfg.exact_cap), timing)
        runs.append(("exact", exact, runtime))
    for name, result, runtime in runs:
        if not verify_schedule(instance, result.admitted_users, result.schedule):
            raise InconsistencyError(f"{name} produced an invalid schedule in trial {trial}")
        rows.append(_row(cfg, trial, name, result, runtime))
    return rows


def continuous_trial(cfg: ScenarioConfig, trial: int, timing: bool = False) -> list:
    grid = generate_snr_grid(cfg, trial)
    utilities = generate_utilities(cfg, trial, grid)
    ita_rng = trial_rng(cfg.seed, trial, ALGORITHM_STREAM)
    base_rng = trial_rng(cfg.seed, trial, ALGORITHM_STREAM + 1)
    res_ita, t_ita = _timed(lambda: ita(grid, utilities, cfg.sla, cfg.d_max, ita_rng), timing)
    res_base, t_base = _timed(
        lambda: baseline_greedy_continuous(grid, utilities, cfg.sla, base_rng), timing
    )
    rows = []
    for name, result, runtime in (("ita", res_ita, t_ita), ("baseline", res_base, t_base)):
        if not verify_schedule(grid, result.admitted_users, result.schedule, cfg.sla):
            raise InconsistencyError(f"{name} produced an invalid schedule in trial {trial}")
        rows.append(_row(cfg, trial, name, result, runtime))
    return rows


def _run(trial_fn, cfg, timing, workers):
    fn = partial(trial_fn, cfg, timing=timing)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves trial order regardless of completion order
            per_trial = list(pool.map(fn, range(cfg.trials), chunksize=16))
    else:
        per_trial = [fn(t) for t in range(cfg.trials)]
    return [row for rows in per_trial for row in rows]


def run_binary_experiment(cfg: ScenarioConfig, timing: bool = False, workers: int = 1) -> list:
    """GREEDY against the exact optimum (when K <= exact_cap) on binarized grids."""
    return _run(binary_trial, cfg, timing, workers)


def run_continuous_experiment(cfg: ScenarioConfig, timing: bool = False, workers: int = 1) -> list:
    """ITA against the random-placement baseline, both on the same grid per trial."""
    return _run(continuous_trial, cfg, timing, workers)


# summaries ------------------------------------------------------------------

@dataclass(frozen=True)
class AlgoStats:
    count: int
    mean_admitted: float
    std_admitted: float
    mean_utility: float
    std_utility: float


def _mean_std(values):
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def _stats(rows):
    adm, adm_sd = _mean_std([r.admitted_count for r in rows])
    util, util_sd = _mean_std([r.total_utility for r in rows])
    return AlgoStats(len(rows), adm, adm_sd, util, util_sd)


@dataclass
class SummaryStats:
    """Per-algorithm statistics overall and per (K, R) cell; std is the sample std."""

    trials: int
    overall: dict
    cells: dict  # (algorithm, K, R) -> AlgoStats

    @property
    def algorithms(self) -> list:
        return sorted(self.overall)

    def ratio(self, numerator: str, denominator: str, metric: str = "admitted", K=None, R=None):
        """Mean-metric ratio between two algorithms, or None when the denominator mean is 0."""
        attr = "mean_admitted" if metric == "admitted" else "mean_utility"
        if K is None:
            num, den = self.overall.get(numerator), self.overall.get(denominator)
        else:
            num, den = self.cells.get((numerator, K, R)), self.cells.get((denominator, K, R))
        if num is None or den is None or getattr(den, attr) <= 0:
            return None
        return getattr(num, attr) / getattr(den, attr)


def summarize(rows: Iterable[ExperimentResultRow]) -> SummaryStats:
    rows = list(rows)
    by_algo = defaultdict(list)
    by_cell = defaultdict(list)
    for r in rows:
        by_algo[r.algorithm].append(r)
        by_cell[(r.algorithm, r.K, r.R)].append(r)
    return SummaryStats(
        trials=len({(r.K, r.R, r.seed, r.trial) for r in rows}),
        overall={a: _stats(v) for a, v in by_algo.items()},
        cells={c: _stats(v) for c, v in sorted(by_cell.items())},
    )


# CSV ------------------------------------------------------------------------

def rows_to_csv(rows: Iterable[ExperimentResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            r.trial, r.algorithm, r.K, r.R, r.admitted_count,
            repr(float(r.total_utility)), r.runtime_us, r.seed,
        ])
    return buf.getvalue()


def write_csv(rows: Iterable[ExperimentResultRow], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    return [
        ExperimentResultRow(
            trial=int(t), algorithm=a, K=int(k), R=int(r), admitted_count=int(c),
            total_utility=float(u), runtime_us=int(rt), seed=int(s),
        )
        for t, a, k, r, c, u, rt, s in reader
    ]


def read_csv(path) -> list:
    try:
        return parse_csv(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc


def plot_data_csv(stats: SummaryStats, metric: str = "admitted") -> str:
    """One row per (K, R) with a mean column per algorithm; ready for external plotting."""
    attr = "mean_admitted" if metric == "admitted" else "mean_utility"
    algos = stats.algorithms
    keys = sorted({(K, R) for _, K, R in stats.cells})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["K", "R", *algos])
    for K, R in keys:
        vals = []
        for a in algos:
            cell = stats.cells.get((a, K, R))
            vals.append("" if cell is None else repr(getattr(cell, attr)))
        writer.writerow([K, R, *vals])
    return buf.getvalue()


def emit_plot_data(stats: SummaryStats, path, metric: str = "admitted") -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(plot_data_csv(stats, metric))
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc


# config ---------------------------------------------------------------------

CONFIG_KEYS = {"K", "R", "sla", "mean_snr", "utility", "seed", "trials", "d_max", "exact_cap", "mode"}
MODES = ("binary", "continuous")


def _field(d, key, kind, where, default=None):
    if key not in d:
        return default
    value = d[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{where}{key}: expected an integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(f"{where}{key}: expected a number, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"{where}{key}: expected a string, got {value!r}")
    return kind(value)


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where or 'config'}: expected a JSON object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown key(s) {unknown}")


def config_from_dict(d: dict) -> tuple:
    """Validate a config object. Returns ``(mode, [ScenarioConfig per K])``.

    ``K`` may be a single integer or a list (a sweep over user counts).
    """
    _check_keys(d, CONFIG_KEYS, "")
    mode = _field(d, "mode", str, "", None)
    if mode is not None and mode not in MODES:
        raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")

    ks = d.get("K", 10)
    ks = ks if isinstance(ks, list) else [ks]
    for k in ks:
        if isinstance(k, bool) or not isinstance(k, int) or k < 0:
            raise ConfigError(f"K: expected non-negative integer(s), got {k!r}")

    try:
        sla = sla_from_dict(d.get("sla", {}))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"sla: {exc}") from exc

    m = d.get("mean_snr", {})
    _check_keys(m, {"model", "lo_db", "hi_db", "db"}, "mean_snr")
    u = d.get("utility", {})
    _check_keys(u, {"model", "w_max"}, "utility")
    try:
        mean_snr = MeanSnrModel(
            model=_field(m, "model", str, "mean_snr.", "uniform_db"),
            lo_db=_field(m, "lo_db", float, "mean_snr.", 0.0),
            hi_db=_field(m, "hi_db", float, "mean_snr.", 20.0),
            db=_field(m, "db", float, "mean_snr.", 5.0),
        )
        utility = UtilityModel(
            model=_field(u, "model", str, "utility.", "unit"),
            w_max=_field(u, "w_max", float, "utility.", 5.0),
        )
        base = ScenarioConfig(
            K=ks[0] if ks else 0,
            R=_field(d, "R", int, "", 50),
            sla=sla,
            mean_snr=mean_snr,
            utility=utility,
            seed=_field(d, "seed", int, "", 0),
            trials=_field(d, "trials", int, "", 1000),
            d_max=_field(d, "d_max", int, "", DEFAULT_D_MAX),
            exact_cap=_field(d, "exact_cap", int, "", 16),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return mode, [replace(base, K=k) for k in ks]


def load_config(path) -> tuple:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

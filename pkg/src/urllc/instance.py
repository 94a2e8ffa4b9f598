"""
Frames, users and schedules for the binary and continuous SNR models.

Schedules are ``K x R`` integer arrays ``x`` with ``x[k, r] = 1`` when block
``r`` is given to user ``k``. Every block goes to at most one user.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .fbl import SlaParams, db_to_linear, frame_error_probability, linear_to_db

UTILITY_MODELS = ("unit", "uniform", "log_mean_snr")
MEAN_SNR_MODELS = ("uniform_db", "fixed")


@dataclass(frozen=True)
class SnrGrid:
    """Linear SNR of every (user, block) pair in one frame."""

    gamma: np.ndarray
    mean_snr: Optional[np.ndarray] = None

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=float)
        if gamma.ndim != 2:
            raise ValueError(f"gamma must be 2-D, got shape {gamma.shape}")
        if np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
            raise ValueError("SNR entries must be finite and non-negative")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        if self.mean_snr is not None:
            mean = np.asarray(self.mean_snr, dtype=float).copy()
            if mean.shape != (gamma.shape[0],):
                raise ValueError("mean_snr must have one entry per user")
            mean.setflags(write=False)
            object.__setattr__(self, "mean_snr", mean)

    @property
    def K(self) -> int:
        return self.gamma.shape[0]

    @property
    def R(self) -> int:
        return self.gamma.shape[1]


@dataclass(frozen=True)
class BinaryInstance:
    """Activity matrix, per-user block demands and utilities."""

    delta: np.ndarray
    demands: np.ndarray
    utilities: np.ndarray

    def __post_init__(self):
        delta = np.array(self.delta, dtype=np.int8)
        if delta.ndim != 2:
            raise ValueError(f"delta must be 2-D, got shape {delta.shape}")
        if not np.isin(delta, (0, 1)).all():
            raise ValueError("delta must be 0/1")
        demands = np.array(self.demands, dtype=np.int64).reshape(-1)
        utilities = np.array(self.utilities, dtype=float).reshape(-1)
        K = delta.shape[0]
        if demands.shape != (K,) or utilities.shape != (K,):
            raise ValueError(
                f"need {K} demands and utilities, got {demands.shape[0]} and {utilities.shape[0]}"
            )
        if np.any(demands < 0):
            raise ValueError("demands must be non-negative")
        if np.any(utilities < 0):
            raise ValueError("utilities must be non-negative")
        for arr in (delta, demands, utilities):
            arr.setflags(write=False)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "utilities", utilities)

    @property
    def K(self) -> int:
        return self.delta.shape[0]

    @property
    def R(self) -> int:
        return self.delta.shape[1]

    def active_blocks(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.delta[k])


@dataclass
class AdmissionResult:
    admitted: np.ndarray
    schedule: np.ndarray
    utilities: np.ndarray = field(repr=False)

    @property
    def total_utility(self) -> float:
        return float(np.dot(self.utilities, self.admitted))

    @property
    def admitted_count(self) -> int:
        return int(np.count_nonzero(self.admitted))

    @property
    def admitted_users(self) -> list:
        return [int(k) for k in np.flatnonzero(self.admitted)]

    @classmethod
    def empty(cls, K: int, R: int, utilities) -> "AdmissionResult":
        return cls(
            admitted=np.zeros(K, dtype=bool),
            schedule=np.zeros((K, R), dtype=np.int8),
            utilities=np.asarray(utilities, dtype=float),
        )


@dataclass(frozen=True)
class MeanSnrModel:
    model: str = "uniform_db"
    lo_db: float = 0.0
    hi_db: float = 20.0
    db: float = 5.0

    def __post_init__(self):
        if self.model not in MEAN_SNR_MODELS:
            raise ValueError(f"unknown mean-SNR model {self.model!r}")
        if self.model == "uniform_db" and self.lo_db > self.hi_db:
            raise ValueError(f"lo_db ({self.lo_db}) exceeds hi_db ({self.hi_db})")


@dataclass(frozen=True)
class UtilityModel:
    model: str = "unit"
    w_max: float = 5.0

    def __post_init__(self):
        if self.model not in UTILITY_MODELS:
            raise ValueError(f"unknown utility model {self.model!r}")
        if self.w_max < 0:
            raise ValueError("w_max must be non-negative")


@dataclass(frozen=True)
class ScenarioConfig:
    K: int = 10
    R: int = 50
    sla: SlaParams = SlaParams()
    mean_snr: MeanSnrModel = MeanSnrModel()
    utility: UtilityModel = UtilityModel()
    seed: int = 0
    trials: int = 1000
    d_max: int = 10
    exact_cap: int = 16

    def __post_init__(self):
        if self.K < 0 or self.R < 0:
            raise ValueError("K and R must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


# Independent random streams per trial; the stream id separates the grid
# draw from the draws made by each algorithm.
GRID_STREAM = 0
UTILITY_STREAM = 1
ALGORITHM_STREAM = 2


def trial_rng(seed: int, trial_index: int, stream: int = GRID_STREAM) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial_index), int(stream)]))


def generate_snr_grid(cfg: ScenarioConfig, trial_index: int) -> SnrGrid:
    """Draw per-user mean SNRs and i.i.d. Rayleigh block fading for one trial."""
    rng = trial_rng(cfg.seed, trial_index, GRID_STREAM)
    if cfg.mean_snr.model == "fixed":
        mean_db = np.full(cfg.K, float(cfg.mean_snr.db))
    else:
        mean_db = rng.uniform(cfg.mean_snr.lo_db, cfg.mean_snr.hi_db, size=cfg.K)
    mean = 10.0 ** (mean_db / 10.0)
    # Rayleigh amplitude fading => exponential power gain with unit mean
    fading = rng.exponential(1.0, size=(cfg.K, cfg.R))
    return SnrGrid(gamma=mean[:, None] * fading, mean_snr=mean)


def generate_utilities(cfg: ScenarioConfig, trial_index: int, grid: SnrGrid) -> np.ndarray:
    if cfg.utility.model == "unit":
        return np.ones(cfg.K)
    if cfg.utility.model == "uniform":
        rng = trial_rng(cfg.seed, trial_index, UTILITY_STREAM)
        return rng.uniform(0.0, cfg.utility.w_max, size=cfg.K)
    # log_mean_snr: reward grows with the log of the user's mean SNR
    return np.log2(1.0 + grid.mean_snr)


def binarize(
    grid: SnrGrid,
    thresholds: Sequence[float],
    demands: Sequence[int],
    utilities: Optional[Sequence[float]] = None,
) -> BinaryInstance:
    thresholds = np.asarray(thresholds, dtype=float).reshape(-1)
    if thresholds.shape != (grid.K,) or len(demands) != grid.K:
        raise ValueError(f"need {grid.K} thresholds and demands")
    if utilities is None:
        utilities = np.ones(grid.K)
    delta = (grid.gamma >= thresholds[:, None]).astype(np.int8)
    return BinaryInstance(delta=delta, demands=demands, utilities=utilities)


def assign_demand_bands(mean_snrs_db: Sequence[float]) -> list:
    """Block demand from mean SNR: 1 above 12.5 dB, 3 below 4 dB, 2 in between."""
    bands = []
    for s in mean_snrs_db:
        if s > 12.5:
            bands.append(1)
        elif s < 4.0:
            bands.append(3)
        else:
            bands.append(2)
    return bands


def _as_user_slas(sla, K):
    if isinstance(sla, SlaParams):
        return [sla] * K
    sla = list(sla)
    if len(sla) != K:
        raise ValueError(f"need {K} SLAs, got {len(sla)}")
    return sla


def schedule_is_valid(x: np.ndarray) -> bool:
    """Binary entries and every block used by at most one user."""
    x = np.asarray(x)
    if x.size == 0:
        return True
    return bool(np.isin(x, (0, 1)).all() and (x.sum(axis=0) <= 1).all())


def verify_schedule(
    problem: Union[BinaryInstance, SnrGrid],
    users: Sequence[int],
    x: np.ndarray,
    sla: Union[SlaParams, Sequence[SlaParams], None] = None,
) -> bool:
    """Check that ``x`` is a valid schedule serving every user in ``users``.

    Binary instances are checked with exact integer arithmetic against the
    activity matrix and demands. SNR grids are checked by re-evaluating the
    frame error probability of each listed user.
    """
    x = np.asarray(x)
    if x.shape != (problem.K, problem.R):
        raise ValueError(f"schedule shape {x.shape} does not match {(problem.K, problem.R)}")
    if not schedule_is_valid(x):
        return False
    if isinstance(problem, BinaryInstance):
        xi = x.astype(np.int64)
        if np.any(xi > problem.delta):
            return False
        return all(int(xi[k].sum()) >= int(problem.demands[k]) for k in users)
    if sla is None:
        raise ValueError("continuous verification needs an SLA")
    slas = _as_user_slas(sla, problem.K)
    for k in users:
        snrs = problem.gamma[k, x[k] == 1]
        if frame_error_probability(snrs, slas[k]) > slas[k].target_error:
            return False
    return True


# JSON fixture exchange ------------------------------------------------------

def sla_to_dict(sla: SlaParams) -> dict:
    return {"L_bits": sla.payload_bits, "theta": sla.reliability, "n": sla.channel_uses_per_block}


def sla_from_dict(d: dict) -> SlaParams:
    unknown = set(d) - {"L_bits", "theta", "n"}
    if unknown:
        raise ValueError(f"unknown sla keys: {sorted(unknown)}")
    defaults = SlaParams()
    return SlaParams(
        payload_bits=int(d.get("L_bits", defaults.payload_bits)),
        reliability=float(d.get("theta", defaults.reliability)),
        channel_uses_per_block=int(d.get("n", defaults.channel_uses_per_block)),
    )


def instance_to_dict(
    instance: Optional[BinaryInstance] = None,
    grid: Optional[SnrGrid] = None,
    sla: Optional[SlaParams] = None,
    utilities=None,
    demands=None,
) -> dict:
    """Serialise an instance and/or grid to the JSON fixture schema.

    Keys: K, R, gamma (K rows of R values), delta, demands, utilities and
    sla {L_bits, theta, n}. Absent parts are omitted.
    """
    src = instance if instance is not None else grid
    if src is None:
        raise ValueError("need an instance or a grid")
    out = {"K": src.K, "R": src.R}
    if grid is not None:
        out["gamma"] = grid.gamma.tolist()
    if instance is not None:
        out["delta"] = instance.delta.astype(int).tolist()
        out["demands"] = instance.demands.astype(int).tolist()
        out["utilities"] = instance.utilities.tolist()
    else:
        if demands is not None:
            out["demands"] = [int(v) for v in demands]
        if utilities is not None:
            out["utilities"] = [float(v) for v in utilities]
    if sla is not None:
        out["sla"] = sla_to_dict(sla)
    return out


INSTANCE_KEYS = {"K", "R", "gamma", "delta", "demands", "utilities", "sla"}


def _matrix(values, K, R, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:  # flat row-major
        arr = arr.reshape(K, R)
    if arr.shape != (K, R):
        raise ValueError(f"{name} has shape {arr.shape}, expected {(K, R)}")
    return arr


def instance_from_dict(d: dict) -> dict:
    """Parse the fixture schema into ``{"grid", "instance", "sla", "utilities", "demands"}``."""
    unknown = set(d) - INSTANCE_KEYS
    if unknown:
        raise ValueError(f"unknown instance keys: {sorted(unknown)}")
    K, R = int(d["K"]), int(d["R"])
    out = {"grid": None, "instance": None, "sla": None, "utilities": None, "demands": None}
    if "gamma" in d:
        out["grid"] = SnrGrid(_matrix(d["gamma"], K, R, "gamma"))
    if "utilities" in d:
        out["utilities"] = np.asarray(d["utilities"], dtype=float)
    else:
        out["utilities"] = np.ones(K)
    if "demands" in d:
        out["demands"] = np.asarray(d["demands"], dtype=int)
    if "delta" in d:
        if out["demands"] is None:
            raise ValueError("a delta matrix needs demands")
        out["instance"] = BinaryInstance(
            delta=_matrix(d["delta"], K, R, "delta").astype(np.int8),
            demands=out["demands"],
            utilities=out["utilities"],
        )
    if "sla" in d:
        out["sla"] = sla_from_dict(d["sla"])
    return out


def save_instance(path, **parts) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(**parts), indent=1) + "\n", encoding="utf-8")


def load_instance(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


__all__ = [
    "AdmissionResult",
    "BinaryInstance",
    "MeanSnrModel",
    "ScenarioConfig",
    "SnrGrid",
    "UtilityModel",
    "assign_demand_bands",
    "binarize",
    "db_to_linear",
    "generate_snr_grid",
    "generate_utilities",
    "instance_from_dict",
    "instance_to_dict",
    "linear_to_db",
    "load_instance",
    "save_instance",
    "schedule_is_valid",
    "trial_rng",
    "verify_schedule",
]

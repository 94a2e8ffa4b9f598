"""
Finite-blocklength error model for URLLC transmissions.

A user jointly encodes its packet over every resource block (RB) it is
given. The frame error probability follows the normal approximation

    p_e = Q( (n * sum log2(1 + g_r) - L + 0.5 * log2(n) * m) / sqrt(n * sum V(g_r)) )

where m is the number of assigned blocks, n the channel uses per block and
V(g) = 1 - 1/(1+g)^2 the AWGN dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import Iterable, Optional

SNR_FLOOR_DB = -20.0
SNR_CEILING_DB = 40.0
BISECTION_TOL_DB = 1e-6
DEFAULT_D_CAP = 50

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class SlaParams:
    """Per-user reliability target: deliver ``payload_bits`` with probability ``reliability``."""

    payload_bits: int = 256
    reliability: float = 0.99999
    channel_uses_per_block: int = 84

    def __post_init__(self):
        if self.payload_bits < 1:
            raise ValueError(f"payload_bits must be >= 1, got {self.payload_bits}")
        if not 0.0 < self.reliability < 1.0:
            raise ValueError(f"reliability must lie in (0, 1), got {self.reliability}")
        if self.channel_uses_per_block < 1:
            raise ValueError(
                f"channel_uses_per_block must be >= 1, got {self.channel_uses_per_block}"
            )

    @property
    def target_error(self) -> float:
        return 1.0 - self.reliability


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(snr: float) -> float:
    if snr <= 0.0:
        return -math.inf
    return 10.0 * math.log10(snr)


def gaussian_q(x: float) -> float:
    """Tail probability Pr(N(0,1) > x)."""
    return 0.5 * math.erfc(x / _SQRT2)


def gaussian_q_inv(p: float) -> float:
    """Inverse of :func:`gaussian_q`, i.e. the x with Pr(N(0,1) > x) = p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"gaussian_q_inv needs p in (0, 1), got {p}")
    # Q^{-1}(p) = -Phi^{-1}(p); keeps full precision for tiny p.
    x = -_STD_NORMAL.inv_cdf(p)
    for _ in range(3):
        pdf = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if pdf == 0.0:
            break
        step = (gaussian_q(x) - p) / pdf
        x += step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def dispersion(snr: float) -> float:
    """AWGN channel dispersion 1 - 1/(1+snr)^2."""
    if snr < 0.0:
        raise ValueError(f"SNR must be non-negative, got {snr}")
    if snr < 1.0:
        # g(2+g)/(1+g)^2 avoids cancellation at small SNR
        return snr * (2.0 + snr) / (1.0 + snr) ** 2
    inv = 1.0 / (1.0 + snr)
    return 1.0 - inv * inv


def _q_argument(snrs: list, sla: SlaParams) -> float:
    n = sla.channel_uses_per_block
    rate = sum(math.log2(1.0 + g) for g in snrs)
    numerator = n * rate - sla.payload_bits + 0.5 * math.log2(n) * len(snrs)
    spread = n * sum(dispersion(g) for g in snrs)
    if spread <= 0.0:
        return -math.inf
    return numerator / math.sqrt(spread)


def frame_error_probability(snrs: Iterable[float], sla: SlaParams) -> float:
    """Error probability of one packet jointly coded over the given blocks.

    An empty allocation, or one where every block has zero SNR, carries no
    information and is defined to fail with probability 1.
    """
    snrs = [float(g) for g in snrs]
    if any(g < 0.0 for g in snrs):
        raise ValueError("SNR values must be non-negative")
    if not snrs:
        return 1.0
    arg = _q_argument(snrs, sla)
    if arg == -math.inf:
        return 1.0
    return gaussian_q(arg)


def sla_margin(snrs: Iterable[float], sla: SlaParams) -> float:
    """Left-hand side of the SLA inequality; the SLA holds iff this is >= 0."""
    snrs = [float(g) for g in snrs]
    n = sla.channel_uses_per_block
    gain = sum(n * math.log2(1.0 + g) + 0.5 * math.log2(n) for g in snrs)
    penalty = _q_inv_cached(sla.target_error) * math.sqrt(n * sum(dispersion(g) for g in snrs))
    return gain - penalty - sla.payload_bits


def sla_satisfied(snrs: Iterable[float], sla: SlaParams) -> bool:
    snrs = list(snrs)
    if not snrs:
        return False
    return sla_margin(snrs, sla) >= 0.0


@lru_cache(maxsize=None)
def _q_inv_cached(p: float) -> float:
    return gaussian_q_inv(p)


def required_blocks(snr: float, sla: SlaParams, d_cap: int = DEFAULT_D_CAP) -> Optional[int]:
    """Fewest blocks of equal SNR meeting the SLA, or ``None`` if more than ``d_cap`` are needed."""
    if d_cap < 1:
        raise ValueError(f"d_cap must be >= 1, got {d_cap}")
    if snr <= 0.0:
        return None
    target = sla.target_error
    for d in range(1, d_cap + 1):
        if frame_error_probability([snr] * d, sla) <= target:
            return d
    return None


def min_snr_for_d(
    d: int,
    sla: SlaParams,
    floor_db: float = SNR_FLOOR_DB,
    ceiling_db: float = SNR_CEILING_DB,
    tol_db: float = BISECTION_TOL_DB,
) -> float:
    """Smallest linear SNR s such that ``d`` blocks at SNR s meet the SLA.

    Located by bisection in dB. The returned value always satisfies the SLA
    (it is the upper end of the final bracket). Returns the floor itself
    when even the floor suffices.
    """
    return _min_snr_for_d(int(d), sla, float(floor_db), float(ceiling_db), float(tol_db))


@lru_cache(maxsize=4096)
def _min_snr_for_d(d, sla, floor_db, ceiling_db, tol_db):
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    target = sla.target_error

    def ok(db):
        return frame_error_probability([db_to_linear(db)] * d, sla) <= target

    if not ok(ceiling_db):
        raise ValueError(
            f"{d} block(s) cannot meet the SLA even at {ceiling_db} dB"
        )
    if ok(floor_db):
        return db_to_linear(floor_db)
    lo, hi = floor_db, ceiling_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return db_to_linear(hi)

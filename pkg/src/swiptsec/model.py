"""Core system model for a secure SWIPT OFDMA downlink.

A base station sends to K users over N subcarriers. Each receiver splits its
incoming signal: a fraction rho goes to an energy harvester, the rest to the
information decoder. Every other user is a potential eavesdropper on each
subcarrier, so the per-subcarrier secrecy rate is measured against the
strongest other user's channel.

Two allocation flavors are modeled:

* per-user splitting   -- one rho per user (the practical receiver),
* per-subcarrier splitting -- one rho per (user, subcarrier) pair, used as a
  relaxation that upper-bounds the per-user problem.

Powers are linear milliwatts throughout; rates are bits per OFDM symbol
(base-2 logs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)


def dbm_to_mw(value_dbm: float) -> float:
    """Convert a dBm figure to linear milliwatts."""
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    """Convert linear milliwatts to dBm. Requires a positive input."""
    if value_mw <= 0.0:
        raise ValueError("mw_to_dbm needs a positive power, got %r" % (value_mw,))
    return 10.0 * math.log10(value_mw)


@dataclass(frozen=True)
class SystemConfig:
    """Static problem data: fleet size, per-subcarrier transmit power,
    noise floor, harvester efficiency and per-user secrecy demands.

    subcarrier_power_mw has one entry per subcarrier; secrecy_demand_bits one
    entry per user (0 means the user only harvests).
    """

    num_users: int
    num_subcarriers: int
    subcarrier_power_mw: np.ndarray
    noise_mw: float
    conversion_efficiency: float
    secrecy_demand_bits: np.ndarray
    rate_tolerance: float = 1e-6

    def __post_init__(self):
        if self.num_users < 2:
            raise ValueError("need at least 2 users (eavesdropping is defined "
                             "against the other users)")
        if self.num_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        p = np.asarray(self.subcarrier_power_mw, dtype=float)
        c = np.asarray(self.secrecy_demand_bits, dtype=float)
        if p.shape != (self.num_subcarriers,):
            raise ValueError("subcarrier_power_mw must have shape (N,)")
        if c.shape != (self.num_users,):
            raise ValueError("secrecy_demand_bits must have shape (K,)")
        if not np.all(p > 0):
            raise ValueError("subcarrier powers must be positive")
        if not np.all(c >= 0):
            raise ValueError("secrecy demands must be nonnegative")
        if self.noise_mw <= 0:
            raise ValueError("noise power must be positive")
        if not 0.0 < self.conversion_efficiency <= 1.0:
            raise ValueError("conversion efficiency must be in (0, 1]")
        object.__setattr__(self, "subcarrier_power_mw", p)
        object.__setattr__(self, "secrecy_demand_bits", c)


@dataclass(frozen=True)
class ChannelState:
    """Channel power gains plus the per-(user, subcarrier) eavesdropper gain.

    eaves_gain[k, n] is the strongest gain among the *other* users on
    subcarrier n. It is stored precomputed; validate() recomputes it as a
    debug check. Hand-built states may use a custom eaves_gain (e.g. zero) to
    model a quiet eavesdropper in unit tests.
    """

    gain: np.ndarray
    eaves_gain: np.ndarray

    @classmethod
    def from_gains(cls, gain: np.ndarray) -> "ChannelState":
        gain = np.asarray(gain, dtype=float)
        if gain.ndim != 2 or gain.shape[0] < 2:
            raise ValueError("gain must be (K, N) with K >= 2")
        if not np.all(gain > 0):
            raise ValueError("channel gains must be positive")
        return cls(gain=gain, eaves_gain=_strongest_other(gain))

    def validate(self) -> None:
        """Debug check: eaves_gain matches the strongest-other-user rule."""
        expect = _strongest_other(self.gain)
        if not np.allclose(self.eaves_gain, expect, rtol=0, atol=0):
            raise AssertionError("eaves_gain is inconsistent with gain")

    @property
    def num_users(self) -> int:
        return self.gain.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.gain.shape[1]


def _strongest_other(gain: np.ndarray) -> np.ndarray:
    """For each (k, n), the max gain over users k' != k on subcarrier n."""
    top = np.argmax(gain, axis=0)                      # (N,)
    best = gain[top, np.arange(gain.shape[1])]         # (N,)
    masked = gain.copy()
    masked[top, np.arange(gain.shape[1])] = -np.inf
    second = masked.max(axis=0)                        # (N,)
    out = np.broadcast_to(best, gain.shape).copy()
    rows = np.arange(gain.shape[0])[:, None] == top[None, :]
    out[rows] = np.broadcast_to(second, gain.shape)[rows]
    return out


@dataclass
class AllocationPA:
    """Per-user splitting allocation: one-hot-ish assignment (K, N) in {0,1}
    with column sums <= 1, and one split ratio per user."""

    assign: np.ndarray
    split_ratio: np.ndarray

    def __post_init__(self):
        self.assign = np.asarray(self.assign, dtype=np.int8)
        self.split_ratio = np.asarray(self.split_ratio, dtype=float)
        _check_assign(self.assign)
        _check_ratio(self.split_ratio)


@dataclass
class AllocationUB:
    """Per-subcarrier splitting allocation: assignment as above plus a full
    (K, N) matrix of split ratios (non-assigned pairs normally sit at 1)."""

    assign: np.ndarray
    split_ratio: np.ndarray

    def __post_init__(self):
        self.assign = np.asarray(self.assign, dtype=np.int8)
        self.split_ratio = np.asarray(self.split_ratio, dtype=float)
        _check_assign(self.assign)
        _check_ratio(self.split_ratio)


def _check_assign(assign):
    if assign.ndim != 2:
        raise ValueError("assignment must be a (users, subcarriers) matrix")
    bad = (assign != 0) & (assign != 1)
    if bad.any():
        raise ValueError("assignment entries must be 0 or 1")
    if (assign.sum(axis=0) > 1).any():
        raise ValueError("a subcarrier cannot serve two users")


def _check_ratio(ratio):
    if ((ratio < 0.0) | (ratio > 1.0)).any():
        raise ValueError("split ratios must lie in [0, 1]")


@dataclass
class SolveReport:
    """What a solver (or the oracle) reports for one instance."""

    objective_mw: float
    per_user_rate: np.ndarray
    per_user_harvest: np.ndarray
    feasible: bool
    violation: float
    iterations: dict = field(default_factory=dict)
    info_power_mw: float = 0.0
    dual_bound: float | None = None


def _check_ratio(rho) -> None:
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("split ratio must lie in [0, 1]")


def secrecy_rate_pa(k: int, n: int, rho_k: float, cfg: SystemConfig,
                    ch: ChannelState) -> float:
    """Secrecy rate of user k on subcarrier n under per-user splitting.

    The decoder sees a (1 - rho_k) fraction of the received power; the
    strongest other user eavesdrops at full power. Clamped at zero.
    """
    _check_ratio(rho_k)
    p = cfg.subcarrier_power_mw[n]
    num = (1.0 - rho_k) * p * ch.gain[k, n] + cfg.noise_mw
    den = p * ch.eaves_gain[k, n] + cfg.noise_mw
    return max(0.0, math.log2(num / den))


def secrecy_rate_ub(k: int, n: int, rho_kn: float, cfg: SystemConfig,
                    ch: ChannelState) -> float:
    """Same rate formula with a per-(user, subcarrier) split ratio."""
    return secrecy_rate_pa(k, n, rho_kn, cfg, ch)


def rate_matrix(rho, cfg: SystemConfig, ch: ChannelState) -> np.ndarray:
    """Vectorized secrecy rates, shape (K, N).

    rho may be a (K,) vector (per-user splitting) or a (K, N) matrix
    (per-subcarrier splitting).
    """
    rho = np.asarray(rho, dtype=float)
    if rho.ndim == 1:
        rho = rho[:, None]
    p = cfg.subcarrier_power_mw[None, :]
    num = (1.0 - rho) * p * ch.gain + cfg.noise_mw
    den = p * ch.eaves_gain + cfg.noise_mw
    return np.maximum(0.0, np.log2(num / den))


def user_secrecy_rate(k: int, alloc, cfg: SystemConfig,
                      ch: ChannelState) -> float:
    """Total secrecy rate of user k over its assigned subcarriers."""
    rates = rate_matrix(alloc.split_ratio, cfg, ch)
    return float(np.sum(alloc.assign[k] * rates[k]))


def harvested_power_pa(k: int, rho_k: float, cfg: SystemConfig,
                       ch: ChannelState) -> float:
    """Harvested power of user k under per-user splitting.

    The harvester taps rho_k of the power received over *all* subcarriers,
    scaled by the conversion efficiency.
    """
    _check_ratio(rho_k)
    p = cfg.subcarrier_power_mw
    return cfg.conversion_efficiency * rho_k * float(np.sum(p * ch.gain[k]))


def harvested_power_ub(k: int, alloc: AllocationUB, cfg: SystemConfig,
                       ch: ChannelState) -> float:
    """Harvested power of user k under per-subcarrier splitting."""
    _check_ratio(alloc.split_ratio)
    p = cfg.subcarrier_power_mw
    return cfg.conversion_efficiency * float(
        np.sum(alloc.split_ratio[k] * p * ch.gain[k]))


def evaluate(alloc, cfg: SystemConfig, ch: ChannelState) -> SolveReport:
    """Score an allocation: total harvest, per-user rates/harvest,
    constraint violation and decoder input power.

    Works on both allocation flavors. feasible means the worst secrecy
    shortfall is within cfg.rate_tolerance.
    """
    K = cfg.num_users
    assign = np.asarray(alloc.assign)
    if assign.shape != (K, cfg.num_subcarriers):
        raise ValueError("assignment shape mismatch")
    if np.any(assign.sum(axis=0) > 1):
        raise ValueError("a subcarrier is assigned to more than one user")
    rho = np.asarray(alloc.split_ratio, dtype=float)
    _check_ratio(rho)

    p = cfg.subcarrier_power_mw[None, :]
    rates_kn = rate_matrix(rho, cfg, ch)
    per_user_rate = np.sum(assign * rates_kn, axis=1)

    if rho.ndim == 1:
        per_user_harvest = (cfg.conversion_efficiency * rho
                            * np.sum(p * ch.gain, axis=1))
        decoder_in = np.sum(assign * (1.0 - rho[:, None]) * p * ch.gain)
    else:
        per_user_harvest = cfg.conversion_efficiency * np.sum(
            rho * p * ch.gain, axis=1)
        decoder_in = np.sum(assign * (1.0 - rho) * p * ch.gain)

    shortfall = cfg.secrecy_demand_bits - per_user_rate
    violation = float(max(0.0, shortfall.max()))
    return SolveReport(
        objective_mw=float(per_user_harvest.sum()),
        per_user_rate=per_user_rate,
        per_user_harvest=per_user_harvest,
        feasible=bool(violation <= cfg.rate_tolerance),
        violation=violation,
        iterations={},
        info_power_mw=float(decoder_in),
    )


def pa_as_ub(alloc: AllocationPA) -> AllocationUB:
    """Embed a per-user allocation in the per-subcarrier family by copying
    each user's ratio across all subcarriers. Rates and harvest agree."""
    K, N = alloc.assign.shape
    rho = np.repeat(alloc.split_ratio[:, None], N, axis=1)
    return AllocationUB(assign=alloc.assign.copy(), split_ratio=rho)

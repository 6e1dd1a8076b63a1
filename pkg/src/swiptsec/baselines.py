"""Benchmark schemes: fixed splitting ratio and fixed assignment.

solve_fps pins every receiver's splitting ratio at 0.5 and only searches the
assignment (its harvest is therefore assignment-independent; the search is
purely about meeting the rate demands). solve_fsa pins the assignment
(round-robin by default) and optimizes only the per-user ratios. Both reuse
the dual machinery of the practical solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .model import (AllocationPA, ChannelState, SolveReport, SystemConfig,
                    evaluate, rate_matrix)

LN2 = math.log(2.0)


@dataclass
class FpsSolverOptions:
    fixed_ratio: float = 0.5
    max_dual_iters: int = 500
    step_scale: float = 0.5
    dual_tol: float = 1e-5
    rate_tolerance: float = 1e-6


@dataclass
class FsaSolverOptions:
    assignment: str = "roundrobin"  # or "random"
    rng_seed: int = 0
    max_dual_iters: int = 500
    max_bcd_iters: int = 25
    bisection_tol: float = 1e-8
    max_bisect_iters: int = 100
    step_scale: float = 0.5
    dual_tol: float = 1e-5
    stall_iters: int = 60
    rate_tolerance: float = 1e-6

    def __post_init__(self):
        if self.assignment not in ("roundrobin", "random"):
            raise ValueError(f"unknown assignment rule {self.assignment!r}")


def fixed_assignment(cfg: SystemConfig, kind: str = "roundrobin",
                     rng_seed: int = 0) -> np.ndarray:
    """The a-priori assignment used by the fixed-assignment baseline:
    subcarrier n to user n mod K, or a seeded uniform draw."""
    K, N = cfg.num_users, cfg.num_subcarriers
    x = np.zeros((K, N), dtype=np.int8)
    if kind == "roundrobin":
        owner = np.arange(N) % K
    elif kind == "random":
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
        owner = rng.integers(0, K, size=N)
    else:
        raise ValueError(f"unknown assignment rule {kind!r}")
    x[owner, np.arange(N)] = 1
    return x


def solve_fps(cfg: SystemConfig, ch: ChannelState,
              opts: FpsSolverOptions | None = None,
              warm_assignments: list[np.ndarray] | None = None
              ) -> tuple[AllocationPA, SolveReport]:
    """Fixed 50/50 splitting; only the assignment is searched.

    Harvest is the same for every assignment (each user splits everything it
    hears), so the dual loop on the rate multipliers stops at the first
    assignment meeting all demands; otherwise the least-violating one is
    kept. The per-subcarrier comparator counts the non-decoding users'
    harvest alongside the multiplier-weighted rate.
    """
    opts = opts or FpsSolverOptions()
    K, N = cfg.num_users, cfg.num_subcarriers
    C = cfg.secrecy_demand_bits
    rho = np.full(K, opts.fixed_ratio)
    rates_mat = rate_matrix(rho, cfg, ch)  # fixed ratio => constant rates
    p = cfg.subcarrier_power_mw[None, :]
    z = cfg.conversion_efficiency
    harvest_bias = z * p * ((ch.gain.sum(axis=0, keepdims=True) - ch.gain)
                            + opts.fixed_ratio * ch.gain)
    cols = np.arange(N)

    best_x = None
    best_viol = np.inf

    def consider(x) -> bool:
        nonlocal best_x, best_viol
        viol = float(np.max(C - (x * rates_mat).sum(axis=1), initial=0.0))
        if best_x is None or viol < best_viol:
            best_x, best_viol = x, viol
        return viol <= 1e-12

    done = False
    for wx in warm_assignments or []:
        if consider((np.asarray(wx) != 0).astype(np.int8)):
            done = True
            break

    iters = 0
    if not done:
        a0 = opts.step_scale / max(1.0, float(C.mean()))
        mu = a0 * C.copy()
        for t in range(opts.max_dual_iters):
            iters = t + 1
            comp = harvest_bias + mu[:, None] * rates_mat
            x = np.zeros((K, N), dtype=np.int8)
            x[np.argmax(comp, axis=0), cols] = 1
            if consider(x):
                break
            rates = (x * rates_mat).sum(axis=1)
            alpha = a0 / math.sqrt(t + 1.0)
            new_mu = np.maximum(0.0, mu + alpha * (C - rates))
            delta = float(np.max(np.abs(new_mu - mu)))
            mu = new_mu
            if delta < opts.dual_tol:
                break

    alloc = AllocationPA(assign=best_x, split_ratio=rho)
    report = evaluate(alloc, cfg, ch)
    report.iterations = {"dual": iters}
    return alloc, report


def solve_fsa(cfg: SystemConfig, ch: ChannelState,
              opts: FsaSolverOptions | None = None
              ) -> tuple[AllocationPA, SolveReport]:
    """Fixed assignment; only the per-user ratios are optimized.

    Runs the same dual loop as the practical solver with the assignment
    block frozen, so each dual iterate reduces to the exact per-user ratio
    search plus recovery; the assignment in the returned allocation is
    exactly the a-priori one.
    """
    opts = opts or FsaSolverOptions()
    C = cfg.secrecy_demand_bits
    x0 = fixed_assignment(cfg, opts.assignment, opts.rng_seed)
    a0 = opts.step_scale / max(1.0, float(C.mean()))
    ph = cfg.subcarrier_power_mw[None, :] * ch.gain
    pb = cfg.subcarrier_power_mw[None, :] * ch.eaves_gain

    (inc_X, inc_rho, _obj, _feas, _viol, _fin, dual_iters, bcd) = \
        _kernel.pa_family_solve(
            ph, pb, cfg.noise_mw, cfg.conversion_efficiency, C,
            x0[None, :, :], (a0 * C)[None, :], a0,
            True, False, 1.0,
            opts.max_dual_iters, opts.max_bcd_iters, opts.bisection_tol,
            opts.max_bisect_iters, opts.dual_tol, opts.stall_iters)

    alloc = AllocationPA(assign=inc_X[0],
                         split_ratio=np.asarray(inc_rho[0], dtype=float))
    report = evaluate(alloc, cfg, ch)
    report.iterations = {"dual": int(dual_iters[0]), "bcd": int(bcd[0])}
    return alloc, report

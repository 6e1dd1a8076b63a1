"""Practical per-user splitting solver.

Maximizes total harvested power when every receiver has a single splitting
ratio, subject to per-user secrecy-rate demands. The combinatorial part
(which user decodes which subcarrier) is explored with a multi-start
dual-ascent loop: block-coordinate updates of ratios and assignment under
fixed multipliers, subgradient steps on the multipliers, and an exact
feasibility recovery of every assignment visited. The compiled loop lives in
_kernel.py; the functions here are the readable reference implementations
plus the driver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .model import (AllocationPA, ChannelState, SolveReport, SystemConfig,
                    evaluate, rate_matrix)

LN2 = math.log(2.0)


@dataclass
class PpaSolverOptions:
    """Knobs for the multi-start dual solver.

    num_starts counts the parallel chains (two are deterministic seeds, the
    rest draw random assignments). step_scale feeds the diminishing
    subgradient schedule a0 / sqrt(t+1) with a0 = step_scale / max(1, mean
    demand). stall_iters stops a chain whose best-found solution has not
    improved for that many dual iterations (0 disables).
    """

    num_starts: int = 20
    max_dual_iters: int = 500
    max_bcd_iters: int = 25
    bisection_tol: float = 1e-8
    max_bisect_iters: int = 100
    step_scale: float = 0.5
    dual_tol: float = 1e-5
    stall_iters: int = 60
    rate_tolerance: float = 1e-6
    rng_seed: int = 0


@dataclass
class DualState:
    """Multipliers of the secrecy constraints plus the step schedule."""

    multipliers: np.ndarray
    step_scale: float = 0.5
    iteration: int = 0

    def __post_init__(self):
        self.multipliers = np.asarray(self.multipliers, dtype=float)

    @property
    def step(self) -> float:
        return self.step_scale / math.sqrt(self.iteration + 1.0)


def default_step_scale(cfg: SystemConfig) -> float:
    """a0 of the diminishing schedule: step_scale over the mean demand
    (clamped at 1 so zero-demand instances keep a finite step)."""
    return 0.5 / max(1.0, float(cfg.secrecy_demand_bits.mean()))


def lagrangian_pa(alloc: AllocationPA, mu: np.ndarray, cfg: SystemConfig,
                  ch: ChannelState) -> float:
    """Dual function integrand: harvested power plus multiplier-weighted
    assigned secrecy rates, minus the multiplier-demand offset."""
    mu = np.asarray(mu, dtype=float)
    p = cfg.subcarrier_power_mw[None, :]
    rates = rate_matrix(alloc.split_ratio, cfg, ch)
    harvest = cfg.conversion_efficiency * float(
        np.sum(alloc.split_ratio[:, None] * p * ch.gain))
    weighted = float(np.sum(mu[:, None] * alloc.assign * rates))
    return harvest + weighted - float(np.dot(mu, cfg.secrecy_demand_bits))


def assign_subcarriers_pa(rho: np.ndarray, mu: np.ndarray, cfg: SystemConfig,
                          ch: ChannelState) -> np.ndarray:
    """Assignment block of the coordinate descent: subcarrier n goes to the
    user maximizing mu_k * rate_kn(rho_k). The harvest part of the Lagrangian
    does not depend on the assignment, so it drops out of the comparison.
    Ties (including all-zero comparators) go to the lowest user index."""
    rates = rate_matrix(np.asarray(rho, dtype=float), cfg, ch)
    comp = np.asarray(mu, dtype=float)[:, None] * rates
    winner = np.argmax(comp, axis=0)
    x = np.zeros((cfg.num_users, cfg.num_subcarriers), dtype=np.int8)
    x[winner, np.arange(cfg.num_subcarriers)] = 1
    return x


def dLk_drho(k: int, rho_k: float, assign: np.ndarray, mu: np.ndarray,
             cfg: SystemConfig, ch: ChannelState) -> float:
    """Derivative of user k's Lagrangian piece in its split ratio.

    Harvest rises with slope zeta * sum_n p_n h_kn over all subcarriers;
    each assigned subcarrier whose clamped rate is still positive pulls the
    other way. Subcarriers whose rate already hit zero contribute nothing.
    """
    p = cfg.subcarrier_power_mw
    h = ch.gain[k]
    beta = ch.eaves_gain[k]
    slope = cfg.conversion_efficiency * float(np.sum(p * h))
    mask = (np.asarray(assign)[k] != 0) & ((1.0 - rho_k) * h > beta)
    if mask.any():
        ph = p[mask] * h[mask]
        slope -= float(mu[k]) * float(
            np.sum(ph / (LN2 * ((1.0 - rho_k) * ph + cfg.noise_mw))))
    return slope


def optimize_rho_bisect(k: int, assign: np.ndarray, mu: np.ndarray,
                        cfg: SystemConfig, ch: ChannelState,
                        tol: float = 1e-8,
                        max_iters: int = 100) -> tuple[float, bool]:
    """Best split ratio for user k under fixed assignment and multipliers.

    The objective is piecewise: between consecutive rate-death breakpoints
    (1 - beta/h of each live assigned subcarrier) it is concave, and past
    the last breakpoint it grows linearly toward rho = 1. Each segment with
    a derivative sign change is bisected to a stationary point; the returned
    ratio is the best of {0, breakpoints, stationary points, 1}. The second
    return value reports bisection convergence (|derivative| < tol).
    """
    mu = np.asarray(mu, dtype=float)
    if mu[k] <= 0.0:
        return 1.0, True
    h = ch.gain[k]
    beta = ch.eaves_gain[k]
    row = np.asarray(assign)[k] != 0
    live = row & (h > beta)
    if not live.any():
        return 1.0, True

    edges = [0.0]
    for bp in np.sort(np.unique(1.0 - beta[live] / h[live])):
        if bp > edges[-1]:
            edges.append(float(bp))
    if edges[-1] < 1.0:
        edges.append(1.0)

    candidates = list(edges)
    converged = True
    for a, b in zip(edges[:-1], edges[1:]):
        da = _segment_deriv(k, a, b, assign, mu, cfg, ch)
        db = _segment_deriv(k, b, b, assign, mu, cfg, ch)
        if da > 0.0 and db < 0.0:
            lo, hi = a, b
            mid = 0.5 * (lo + hi)
            ok = False
            for _ in range(max_iters):
                mid = 0.5 * (lo + hi)
                d = _segment_deriv(k, mid, b, assign, mu, cfg, ch)
                if abs(d) < tol:
                    ok = True
                    break
                if d > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-15:
                    ok = abs(d) < tol
                    break
            converged = converged and ok
            candidates.append(mid)

    vals = [_lagrangian_user(k, r, assign, mu, cfg, ch) for r in candidates]
    return candidates[int(np.argmax(vals))], converged


def _segment_deriv(k, rho, active_floor, assign, mu, cfg, ch):
    """Derivative restricted to the segment whose live subcarriers have
    breakpoints >= active_floor (continuous across the segment)."""
    p = cfg.subcarrier_power_mw
    h = ch.gain[k]
    beta = ch.eaves_gain[k]
    slope = cfg.conversion_efficiency * float(np.sum(p * h))
    row = np.asarray(assign)[k] != 0
    live = row & (h > beta)
    if live.any():
        bp = 1.0 - beta[live] / h[live]
        ph = (p * h)[live][bp >= active_floor]
        if ph.size:
            slope -= float(mu[k]) * float(
                np.sum(ph / (LN2 * ((1.0 - rho) * ph + cfg.noise_mw))))
    return slope


def _lagrangian_user(k, rho_k, assign, mu, cfg, ch):
    p = cfg.subcarrier_power_mw
    harvest = cfg.conversion_efficiency * rho_k * float(np.sum(p * ch.gain[k]))
    rho_vec = np.zeros(cfg.num_users)
    rho_vec[k] = rho_k
    rates = rate_matrix(rho_vec, cfg, ch)[k]
    return harvest + float(mu[k]) * float(np.sum(np.asarray(assign)[k] * rates))


def update_duals_pa(state: DualState, rates: np.ndarray,
                    cfg: SystemConfig) -> DualState:
    """Projected subgradient step: raise a user's multiplier by the scaled
    shortfall, floor at zero, advance the schedule."""
    alpha = state.step
    mu = np.maximum(
        0.0,
        state.multipliers + alpha * (cfg.secrecy_demand_bits
                                     - np.asarray(rates, dtype=float)))
    return DualState(multipliers=mu, step_scale=state.step_scale,
                     iteration=state.iteration + 1)


def recover_ratios(assign: np.ndarray, cfg: SystemConfig,
                   ch: ChannelState) -> tuple[np.ndarray, np.ndarray]:
    """Exact best ratios for a fixed assignment: per user, the largest rho
    whose assigned secrecy rate still meets the demand (1 for zero-demand
    users, 0 with a recorded shortfall when even full decoding is short).

    Returns (rho_hat (K,), shortfall (K,))."""
    K = cfg.num_users
    assign = np.asarray(assign) != 0
    C = cfg.secrecy_demand_bits
    rates0 = rate_matrix(np.zeros(K), cfg, ch)
    cap = np.sum(assign * rates0, axis=1)
    rho = np.ones(K)
    shortfall = np.zeros(K)
    need = C > 0.0
    short = need & (cap < C)
    # full decoding maximizes the rate of a short user, except when no
    # assigned subcarrier carries any secrecy rate at all: then the ratio
    # cannot buy rate and harvesting everything is strictly better
    rho[short] = np.where(cap[short] > 0.0, 0.0, 1.0)
    shortfall[short] = (C - cap)[short]
    active = need & ~short
    if active.any():
        lo = np.zeros(K)
        hi = np.ones(K)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            rates = np.sum(assign * rate_matrix(mid, cfg, ch), axis=1)
            good = rates >= C
            lo = np.where(active & good, mid, lo)
            hi = np.where(active & ~good, mid, hi)
        rho[active] = lo[active]
    return rho, shortfall


def repair_assignment(assign: np.ndarray, cfg: SystemConfig,
                      ch: ChannelState) -> tuple[np.ndarray, int]:
    """Feasibility repair: while some user cannot reach its demand even at
    rho = 0, move over the subcarrier with the best rate gain per harvested
    power lost by its donor. Unowned subcarriers cost nothing and go first.

    Returns the repaired assignment and the number of moves."""
    x = (np.asarray(assign) != 0).astype(np.int8)
    K, N = x.shape
    C = cfg.secrecy_demand_bits
    p = cfg.subcarrier_power_mw
    w = cfg.conversion_efficiency * np.sum(p[None, :] * ch.gain, axis=1)
    rates0 = rate_matrix(np.zeros(K), cfg, ch)
    moves = 0
    for _ in range(K * N):
        rho, shortfall = recover_ratios(x, cfg, ch)
        worst = int(np.argmax(shortfall))
        if shortfall[worst] <= 0.0:
            break
        best_score = -1.0
        best_n = -1
        for n in range(N):
            if x[worst, n] or rates0[worst, n] <= 0.0:
                continue
            owner = np.flatnonzero(x[:, n])
            if owner.size == 0:
                loss = 0.0
            else:
                j = int(owner[0])
                trial = x.copy()
                trial[j, n] = 0
                rho_j, short_j = recover_ratios(trial, cfg, ch)
                if short_j[j] > 0.0:
                    continue  # stealing would break the donor outright
                loss = w[j] * (rho[j] - rho_j[j])
            score = rates0[worst, n] / (loss + 1e-12)
            if score > best_score:
                best_score = score
                best_n = n
        if best_n < 0:
            break
        x[:, best_n] = 0
        x[worst, best_n] = 1
        moves += 1
    return x, moves


def prune_dead_subcarriers(assign: np.ndarray, rho: np.ndarray,
                           cfg: SystemConfig, ch: ChannelState) -> np.ndarray:
    """Drop assigned subcarriers whose rate is zero at the final ratios.
    They carry no secrecy rate, so rates and harvest are unchanged, but the
    decoder input power stops counting them."""
    rates = rate_matrix(np.asarray(rho, dtype=float), cfg, ch)
    x = (np.asarray(assign) != 0) & (rates > 0.0)
    return x.astype(np.int8)


def initial_assignments(cfg: SystemConfig, ch: ChannelState, count: int,
                        rng: np.random.Generator,
                        rho_probe: float = 0.0) -> np.ndarray:
    """Multi-start seeds: one greedy max-rate assignment, one round-robin
    over demanding users, the rest uniform random users per subcarrier."""
    K, N = cfg.num_users, cfg.num_subcarriers
    C = cfg.secrecy_demand_bits
    demanding = np.flatnonzero(C > 0.0)
    if demanding.size == 0:
        demanding = np.arange(K)
    out = np.zeros((count, K, N), dtype=np.int8)
    rates = rate_matrix(np.full(K, rho_probe), cfg, ch)
    greedy = demanding[np.argmax(rates[demanding], axis=0)]
    out[0, greedy, np.arange(N)] = 1
    if count > 1:
        rr = demanding[np.arange(N) % demanding.size]
        out[1, rr, np.arange(N)] = 1
    for m in range(2, count):
        pick = rng.integers(0, K, size=N)
        out[m, pick, np.arange(N)] = 1
    return out


def _initial_multipliers(a0: float, C: np.ndarray, count: int,
                         deterministic_head: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Per-chain starting multipliers a0 * C * 10^u. The deterministic head
    chains use u = 0; the rest draw u ~ U[-4, 1] so chains explore different
    trade-off scales instead of collapsing onto one trajectory."""
    mu0 = np.repeat((a0 * C)[None, :], count, axis=0)
    if count > deterministic_head:
        u = rng.uniform(-4.0, 1.0, size=(count - deterministic_head, C.size))
        mu0[deterministic_head:] *= 10.0 ** u
    return mu0


def solve_ppa(cfg: SystemConfig, ch: ChannelState,
              opts: PpaSolverOptions | None = None,
              warm_assignments: list[np.ndarray] | None = None
              ) -> tuple[AllocationPA, SolveReport]:
    """Multi-start practical solver.

    Among all chains, the feasible result with the largest harvest wins
    (ties to the lowest chain index); with no feasible chain, the smallest
    violation wins after a greedy reassignment repair attempt.
    warm_assignments adds extra deterministic chains seeded from previous
    solutions (used by the sweep harness for continuation).
    """
    opts = opts or PpaSolverOptions()
    rng = np.random.default_rng(np.random.SeedSequence(opts.rng_seed))
    K, N = cfg.num_users, cfg.num_subcarriers
    C = cfg.secrecy_demand_bits
    p = cfg.subcarrier_power_mw
    ph = p[None, :] * ch.gain
    pb = p[None, :] * ch.eaves_gain
    a0 = opts.step_scale / max(1.0, float(C.mean()))

    M = max(1, opts.num_starts)
    X0 = initial_assignments(cfg, ch, M, rng)
    mu0 = _initial_multipliers(a0, C, M, min(2, M), rng)
    warm = [np.asarray(wx, dtype=np.int8) for wx in (warm_assignments or [])]
    if warm:
        X0 = np.concatenate([X0, np.stack(warm)], axis=0)
        mu0 = np.concatenate(
            [mu0, np.repeat((a0 * C)[None, :], len(warm), axis=0)], axis=0)

    (inc_X, inc_rho, inc_obj, inc_feas, inc_viol, _fin_X,
     dual_iters, bcd_passes) = _kernel.pa_family_solve(
        ph, pb, cfg.noise_mw, cfg.conversion_efficiency, C, X0, mu0, a0,
        True, True, 1.0,
        opts.max_dual_iters, opts.max_bcd_iters, opts.bisection_tol,
        opts.max_bisect_iters, opts.dual_tol, opts.stall_iters)

    moves = 0
    if inc_feas.any():
        order = np.lexsort((np.arange(len(inc_obj)), -inc_obj, ~inc_feas))
        best = int(order[0])
        x, rho = inc_X[best], inc_rho[best]
    else:
        best = int(np.argmin(inc_viol))
        x, moves = repair_assignment(inc_X[best], cfg, ch)
        rho, _short = recover_ratios(x, cfg, ch)

    x = prune_dead_subcarriers(x, rho, cfg, ch)
    alloc = AllocationPA(assign=x, split_ratio=np.asarray(rho, dtype=float))
    report = evaluate(alloc, cfg, ch)
    report.iterations = {
        "starts": int(X0.shape[0]),
        "dual": int(dual_iters.sum()),
        "bcd": int(bcd_passes.sum()),
        "repair_moves": int(moves),
    }
    return alloc, report

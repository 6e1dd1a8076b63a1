"""Per-subcarrier splitting solver (performance upper bound).

When every (user, subcarrier) pair gets its own splitting ratio, the
per-pair trade-off has a closed-form stationary point, so the dual problem
decomposes per subcarrier and a plain subgradient loop on the rate
multipliers solves it. Users never assigned a subcarrier still harvest it in
full (ratio 1). The relaxation strictly contains the per-user problem, so
its objective upper-bounds the practical solver on every instance.

Each dual iterate is also converted to a feasible point: for a fixed
assignment the best ratios solve a per-user water-filling problem in a
single scalar multiplier, found by bisection. The best recovered point seen
anywhere in the loop is the returned solution, and the smallest dual value
seen is reported as a certified bound on the true optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (AllocationUB, ChannelState, SolveReport, SystemConfig,
                    evaluate, rate_matrix)
from .ppa import DualState, repair_assignment, update_duals_pa

LN2 = math.log(2.0)


@dataclass
class PubSolverOptions:
    max_dual_iters: int = 500
    step_scale: float = 0.5
    dual_tol: float = 1e-5
    stall_iters: int = 60
    rate_tolerance: float = 1e-6
    rho_formula: str = "derived"
    candidate_grid_size: int = 33
    polish_passes: int = 2

    def __post_init__(self):
        if self.rho_formula not in ("derived", "printed"):
            raise ValueError(f"unknown rho_formula {self.rho_formula!r}")


def pair_lagrangian(rho, lam_k: float, p_n: float, h: float, beta: float,
                    noise: float, zeta: float):
    """Per-(user, subcarrier) dual term: harvest share plus the
    multiplier-weighted clamped secrecy rate. Vectorized over rho."""
    rho = np.asarray(rho, dtype=float)
    num = (1.0 - rho) * p_n * h + noise
    den = p_n * beta + noise
    rate = np.maximum(0.0, np.log2(num / den))
    return zeta * p_n * h * rho + lam_k * rate


def _stationary_matrix(lam: np.ndarray, cfg: SystemConfig, ch: ChannelState,
                       formula: str) -> np.ndarray:
    """Unclamped stationary point of the per-pair dual term, (K, N).

    "derived" solves the stationarity condition zeta p h = lam p h /
    (ln2 ((1-rho) p h + sigma^2)) directly. "printed" reproduces a published
    closed form that carries a stray user-sum and a misplaced ln2; it is kept
    behind this flag for comparison only.
    """
    p = cfg.subcarrier_power_mw[None, :]
    h = ch.gain
    ph = p * h
    z = cfg.conversion_efficiency
    if formula == "derived":
        return 1.0 + cfg.noise_mw / ph - lam[:, None] / (z * LN2 * ph)
    colsum = h.sum(axis=0, keepdims=True)
    return (1.0 - lam[:, None] * h / (z * LN2 * p * colsum)
            + cfg.noise_mw / (LN2 * ph))


def _rho_star_matrix(lam: np.ndarray, cfg: SystemConfig, ch: ChannelState,
                     formula: str = "derived") -> np.ndarray:
    """Best per-pair ratio for every (k, n) at multipliers lam.

    The dual term is concave while the rate is alive (rho below the
    breakpoint 1 - beta/h) and linear rising after, so the maximum is either
    the clamped stationary point or full harvesting at 1; ties go to 1.
    """
    p = cfg.subcarrier_power_mw[None, :]
    ph = p * ch.gain
    z = cfg.conversion_efficiency
    tau = np.maximum(0.0, 1.0 - ch.eaves_gain / ch.gain)
    rc = np.clip(_stationary_matrix(lam, cfg, ch, formula), 0.0, tau)
    num = (1.0 - rc) * ph + cfg.noise_mw
    den = p * ch.eaves_gain + cfg.noise_mw
    f_rc = z * ph * rc + lam[:, None] * np.maximum(0.0, np.log2(num / den))
    f_one = z * ph
    return np.where(f_rc > f_one, rc, 1.0)


def rho_star_pair(lam_k: float, p_n: float, h: float, beta: float,
                  noise: float, zeta: float, formula: str = "derived",
                  col_gain_sum: float | None = None) -> float:
    """Best ratio for one (user, subcarrier) pair at multiplier lam_k.

    col_gain_sum (all users' gains on the subcarrier) only matters to the
    "printed" formula; it defaults to h alone.
    """
    ph = p_n * h
    tau = max(0.0, 1.0 - beta / h)
    if formula == "derived":
        dot = 1.0 + noise / ph - lam_k / (zeta * LN2 * ph)
    elif formula == "printed":
        cs = h if col_gain_sum is None else col_gain_sum
        dot = 1.0 - lam_k * h / (zeta * LN2 * p_n * cs) + noise / (LN2 * ph)
    else:
        raise ValueError(f"unknown rho formula {formula!r}")
    rc = min(max(dot, 0.0), tau)
    f_rc = pair_lagrangian(rc, lam_k, p_n, h, beta, noise, zeta)
    return rc if f_rc > zeta * ph else 1.0


def rho_star_ub(k: int, n: int, lam_k: float, cfg: SystemConfig,
                ch: ChannelState, formula: str = "derived") -> float:
    """Scalar form of the per-pair ratio optimizer (see _rho_star_matrix)."""
    return rho_star_pair(lam_k, float(cfg.subcarrier_power_mw[n]),
                         float(ch.gain[k, n]), float(ch.eaves_gain[k, n]),
                         cfg.noise_mw, cfg.conversion_efficiency, formula,
                         float(ch.gain[:, n].sum()))


def rho_star_grid(lam_k: float, p_n: float, h: float, beta: float,
                  noise: float, zeta: float, num_points: int = 33) -> float:
    """Grid argmax of the per-pair dual term, for arbitrating the closed
    form (first index wins ties, i.e. the smallest maximizing rho)."""
    grid = np.linspace(0.0, 1.0, num_points)
    vals = pair_lagrangian(grid, lam_k, p_n, h, beta, noise, zeta)
    return float(grid[int(np.argmax(vals))])


def assign_subcarriers_ub(lam: np.ndarray, cfg: SystemConfig,
                          ch: ChannelState, formula: str = "derived"
                          ) -> tuple[np.ndarray, np.ndarray]:
    """One dual decode step: each subcarrier goes to the user whose pair
    term (counting everyone else harvesting it in full) is largest, ties to
    the lowest index. Returns (assignment, full (K, N) ratio matrix with
    non-assigned pairs at 1)."""
    lam = np.asarray(lam, dtype=float)
    p = cfg.subcarrier_power_mw[None, :]
    h = ch.gain
    z = cfg.conversion_efficiency
    rho_star = _rho_star_matrix(lam, cfg, ch, formula)
    rates = rate_matrix(rho_star, cfg, ch)
    colsum = h.sum(axis=0, keepdims=True)
    L = z * p * (rho_star * h + (colsum - h)) + lam[:, None] * rates
    winner = np.argmax(L, axis=0)
    cols = np.arange(cfg.num_subcarriers)
    x = np.zeros((cfg.num_users, cfg.num_subcarriers), dtype=np.int8)
    x[winner, cols] = 1
    rho = np.ones_like(rho_star)
    rho[winner, cols] = rho_star[winner, cols]
    return x, rho


def dual_value_ub(lam: np.ndarray, cfg: SystemConfig, ch: ChannelState,
                  formula: str = "derived") -> float:
    """Dual function at lam: per-subcarrier maxima of the decode step minus
    the multiplier-demand offset. With the derived ratio formula the inner
    maximization is exact, so this upper-bounds every feasible objective."""
    lam = np.asarray(lam, dtype=float)
    p = cfg.subcarrier_power_mw[None, :]
    h = ch.gain
    z = cfg.conversion_efficiency
    rho_star = _rho_star_matrix(lam, cfg, ch, formula)
    rates = rate_matrix(rho_star, cfg, ch)
    colsum = h.sum(axis=0, keepdims=True)
    L = z * p * (rho_star * h + (colsum - h)) + lam[:, None] * rates
    return float(L.max(axis=0).sum() - np.dot(lam, cfg.secrecy_demand_bits))


def update_duals_ub(state: DualState, rates: np.ndarray,
                    cfg: SystemConfig) -> DualState:
    """Same projected subgradient step as the per-user solver."""
    return update_duals_pa(state, rates, cfg)


def recover_ratios_ub(assign: np.ndarray, cfg: SystemConfig,
                      ch: ChannelState,
                      users: np.ndarray | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Exact best per-pair ratios for a fixed assignment.

    Per user this is a water-filling problem in one scalar price: ratios
    rho_n(nu) = clip(1 + sigma^2/(p h) - nu/(zeta ln2 p h), 0, breakpoint)
    trace out the harvest-maximal frontier as nu shrinks, and the assigned
    rate is monotone in nu, so a bisection on nu finds the cheapest ratios
    meeting the demand. Pairs left at their breakpoint carry zero rate and
    are pushed to 1. Users short even at full decoding get rho = 0 on their
    assignment and a recorded shortfall.

    Returns (rho (K, N) with non-assigned pairs at 1, shortfall (K,)).
    `users` restricts the computation to a subset of rows (the rest are
    returned as all-ones / zero shortfall).
    """
    K, N = cfg.num_users, cfg.num_subcarriers
    x = np.asarray(assign) != 0
    C = cfg.secrecy_demand_bits
    p = cfg.subcarrier_power_mw[None, :]
    ph = p * ch.gain
    z = cfg.conversion_efficiency
    tau = np.maximum(0.0, 1.0 - ch.eaves_gain / ch.gain)
    rho = np.ones((K, N))
    shortfall = np.zeros(K)
    rows = np.arange(K) if users is None else np.asarray(users, dtype=int)
    for k in rows[C[rows] > 0.0]:
        mask = x[k]
        if not mask.any():
            shortfall[k] = C[k]
            continue
        phk = ph[k, mask]
        tk = tau[k, mask]
        den = p[0, mask] * ch.eaves_gain[k, mask] + cfg.noise_mw
        cap = float(np.sum(np.maximum(
            0.0, np.log2((phk + cfg.noise_mw) / den))))
        if cap < C[k]:
            rho[k, mask] = 0.0
            shortfall[k] = C[k] - cap
            continue
        lo, hi = 0.0, float(np.max(z * LN2 * (phk + cfg.noise_mw)))
        for _ in range(60):
            nu = 0.5 * (lo + hi)
            r = np.clip(1.0 + cfg.noise_mw / phk - nu / (z * LN2 * phk),
                        0.0, tk)
            rate = float(np.sum(np.maximum(
                0.0, np.log2(((1.0 - r) * phk + cfg.noise_mw) / den))))
            if rate >= C[k]:
                hi = nu
            else:
                lo = nu
        r = np.clip(1.0 + cfg.noise_mw / phk - hi / (z * LN2 * phk), 0.0, tk)
        rho[k, mask] = np.where(r >= tk, 1.0, r)
    return rho, shortfall


def polish_assignment_ub(assign: np.ndarray, cfg: SystemConfig,
                         ch: ChannelState, passes: int = 2
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Greedy single-move improvement of a demand-feasible assignment.

    Sweeps the subcarriers in index order; each one is test-moved to every
    other owner, scored by exact recovery of the two touched rows, and the
    move is kept when it raises the total harvest without breaking anyone's
    demand. At most `passes` sweeps; a sweep with no accepted move ends the
    search early. Deterministic for a fixed input.

    Closes most of the finite-subcarrier duality gap the subgradient loop
    leaves behind: the assignment that maximizes the dual at the best
    multiplier is often one move away from the best recoverable one.
    Returns (assignment, full ratio matrix).
    """
    K, N = cfg.num_users, cfg.num_subcarriers
    x = (np.asarray(assign) != 0).astype(np.int8)
    w = cfg.conversion_efficiency * cfg.subcarrier_power_mw[None, :] * ch.gain
    rho, short = recover_ratios_ub(x, cfg, ch)
    if float(short.max(initial=0.0)) > 1e-12:
        return x, rho  # only polish feasible points
    row_obj = np.sum(w * rho, axis=1)
    for _ in range(max(0, passes)):
        improved = False
        for n in range(N):
            col = np.flatnonzero(x[:, n])
            a = int(col[0]) if col.size else -1
            for b in range(K):
                if b == a:
                    continue
                rows = np.array([b] if a < 0 else [a, b])
                x[:, n] = 0
                x[b, n] = 1
                rho_t, short_t = recover_ratios_ub(x, cfg, ch, users=rows)
                if float(short_t[rows].max()) > 1e-12:
                    x[:, n] = 0
                    if a >= 0:
                        x[a, n] = 1
                    continue
                new_rows = np.sum(w[rows] * rho_t[rows], axis=1)
                if float(new_rows.sum() - row_obj[rows].sum()) > 1e-12:
                    rho[rows] = rho_t[rows]
                    row_obj[rows] = new_rows
                    a = b
                    improved = True
                else:
                    x[:, n] = 0
                    if a >= 0:
                        x[a, n] = 1
        if not improved:
            break
    return x, rho


def solve_pub(cfg: SystemConfig, ch: ChannelState,
              opts: PubSolverOptions | None = None,
              warm_assignments: list[np.ndarray] | None = None
              ) -> tuple[AllocationUB, SolveReport]:
    """Dual loop for the per-subcarrier relaxation.

    Every visited assignment is scored through exact recovery; the best
    feasible point (or the least violating one if none is feasible) is
    returned, and SolveReport.dual_bound carries the smallest dual value
    seen. An infeasible incumbent goes through the greedy reassignment
    repair, and a feasible one through the single-move polish sweep, before
    the final scoring. warm_assignments seeds the incumbent with recoveries
    of earlier solutions (sweep continuation).
    """
    opts = opts or PubSolverOptions()
    C = cfg.secrecy_demand_bits
    K, N = cfg.num_users, cfg.num_subcarriers
    p = cfg.subcarrier_power_mw[None, :]
    w_full = cfg.conversion_efficiency * p * ch.gain  # harvest per unit rho
    a0 = opts.step_scale / max(1.0, float(C.mean()))

    inc_rho = np.ones((K, N))
    inc_x = np.zeros((K, N), dtype=np.int8)
    inc_obj = -1.0
    inc_feas = False
    inc_viol = np.inf

    def consider(x, rho, viol):
        nonlocal inc_rho, inc_x, inc_obj, inc_feas, inc_viol
        obj = float(np.sum(w_full * rho))
        feas = viol <= 1e-12
        if (feas and (not inc_feas or obj > inc_obj)) or \
           (not feas and not inc_feas and viol < inc_viol):
            inc_rho, inc_x = rho, x.copy()
            inc_obj, inc_feas, inc_viol = obj, feas, viol
            return True
        return False

    for wx in warm_assignments or []:
        wx = (np.asarray(wx) != 0).astype(np.int8)
        rho_hat, shortfall = recover_ratios_ub(wx, cfg, ch)
        consider(wx, rho_hat, float(shortfall.max(initial=0.0)))

    lam = a0 * C.copy()
    best_dual = np.inf
    prev_x = np.full((K, N), -1, dtype=np.int8)
    rho_hat = np.ones((K, N))
    shortfall = np.zeros(K)
    stall = 0
    iters = 0
    for t in range(opts.max_dual_iters):
        iters = t + 1
        x, rho_raw = assign_subcarriers_ub(lam, cfg, ch, opts.rho_formula)
        rates = (x * rate_matrix(rho_raw, cfg, ch)).sum(axis=1)
        if opts.rho_formula == "derived":
            # only the derived ratio makes the inner max exact, hence a bound
            g = dual_value_ub(lam, cfg, ch, opts.rho_formula)
            best_dual = min(best_dual, g)
        changed = np.flatnonzero((x != prev_x).any(axis=1))
        if changed.size:
            # recovery rows come back complete (non-assigned pairs at 1),
            # so replacing whole rows keeps the cache consistent
            rho_new, short_new = recover_ratios_ub(x, cfg, ch, users=changed)
            rho_hat = rho_hat.copy()
            shortfall = shortfall.copy()
            rho_hat[changed] = rho_new[changed]
            shortfall[changed] = short_new[changed]
            prev_x = x
        improved = consider(x, rho_hat, float(shortfall.max(initial=0.0)))
        stall = 0 if improved else stall + 1

        alpha = a0 / math.sqrt(t + 1.0)
        new_lam = np.maximum(0.0, lam + alpha * (C - rates))
        delta = float(np.max(np.abs(new_lam - lam)))
        lam = new_lam
        if delta < opts.dual_tol:
            break
        if opts.stall_iters > 0 and stall >= opts.stall_iters:
            break

    if not inc_feas and np.isfinite(inc_viol):
        xr, _ = repair_assignment(inc_x, cfg, ch)
        rho_r, short_r = recover_ratios_ub(xr, cfg, ch)
        consider(xr, rho_r, float(short_r.max(initial=0.0)))
    if inc_feas and opts.polish_passes > 0:
        xp, rho_p = polish_assignment_ub(inc_x, cfg, ch, opts.polish_passes)
        consider(xp, rho_p, 0.0)

    alloc = AllocationUB(assign=inc_x, split_ratio=inc_rho)
    report = evaluate(alloc, cfg, ch)
    report.dual_bound = None if not math.isfinite(best_dual) else best_dual
    report.iterations = {"dual": iters}
    return alloc, report

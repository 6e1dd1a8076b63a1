"""Exhaustive reference solvers for tiny instances.

These enumerate every subcarrier assignment (including "leave it unassigned")
and search split ratios on a uniform grid, so they are slow but trustworthy.
Guard rails reject instances whose enumeration would blow up; callers are
expected to stay at desk scale (a handful of users and subcarriers).
"""

from __future__ import annotations

import itertools

import numpy as np

from .model import ChannelState, SolveReport, SystemConfig, rate_matrix

ASSIGN_LIMIT = 1e5   # K**N above this is rejected
GRID_LIMIT = 1e7     # grid_points**K (and per-user joint grids) above this too


class GuardRailError(ValueError):
    """Raised when an instance is too large for exhaustive search."""


def _grid(grid_step: float) -> np.ndarray:
    if not 0.0 < grid_step <= 1.0:
        raise ValueError("grid_step must be in (0, 1]")
    count = int(round(1.0 / grid_step))
    return np.linspace(0.0, 1.0, count + 1)


def _check_guards(cfg: SystemConfig, grid_points: int, joint_dim: int) -> None:
    K, N = cfg.num_users, cfg.num_subcarriers
    if float(K) ** N > ASSIGN_LIMIT:
        raise GuardRailError("assignment enumeration too large: K^N = %g" %
                             (float(K) ** N,))
    if float(grid_points) ** joint_dim > GRID_LIMIT:
        raise GuardRailError("ratio grid too large: %d^%d" %
                             (grid_points, joint_dim))


def _all_assignments(K: int, N: int) -> np.ndarray:
    """Every map subcarrier -> {unassigned(-1), 0..K-1}, shape (count, N)."""
    return np.array(list(itertools.product(range(-1, K), repeat=N)),
                    dtype=np.int64)


def max_secrecy_capacity(cfg: SystemConfig, ch: ChannelState) -> np.ndarray:
    """Per-user secrecy-rate ceiling: decode everything (rho = 0) and claim
    every subcarrier with a positive rate. Any demand above this is
    infeasible before any competition for subcarriers is considered."""
    rates = rate_matrix(np.zeros(cfg.num_users), cfg, ch)
    return rates.sum(axis=1)


def oracle_pa(cfg: SystemConfig, ch: ChannelState,
              grid_step: float = 1.0 / 256.0):
    """Exhaustive optimum of the per-user splitting problem.

    For each assignment the problem separates by user: harvest grows linearly
    in rho_k while the user's rate falls, so the best grid point is the
    largest rho_k still meeting the demand. Returns (AllocationPA-style
    tuple, SolveReport); when nothing is feasible the least-violating
    assignment is reported with feasible=False.
    """
    from .model import AllocationPA, evaluate

    grid = _grid(grid_step)
    _check_guards(cfg, grid.size, cfg.num_users)
    K, N = cfg.num_users, cfg.num_subcarriers
    C = cfg.secrecy_demand_bits
    p = cfg.subcarrier_power_mw
    w = cfg.conversion_efficiency * np.sum(p[None, :] * ch.gain, axis=1)

    # rates_kng[k, n, g]: user k's rate on subcarrier n at grid point g
    rates_kng = np.stack(
        [rate_matrix(np.full(K, g), cfg, ch) for g in grid], axis=2)

    assignments = _all_assignments(K, N)
    best_obj = -np.inf
    best_assign = None
    best_rho = None
    best_viol = np.inf
    best_viol_assign = None
    best_viol_rho = None

    chunk = max(1, int(2e6 // (grid.size * N)))
    for lo in range(0, assignments.shape[0], chunk):
        block = assignments[lo:lo + chunk]              # (B, N)
        B = block.shape[0]
        obj = np.zeros(B)
        viol = np.zeros(B)
        rho_pick = np.ones((B, K))
        for k in range(K):
            sel = (block == k).astype(float)            # (B, N)
            # (B, G) total rate of user k at each grid point
            tot = sel @ rates_kng[k]
            feas_counts = (tot >= C[k]).sum(axis=1)     # prefix-true in g
            has = feas_counts > 0
            idx = np.maximum(feas_counts - 1, 0)
            rho_k = np.where(has, grid[idx], 0.0)
            rho_pick[:, k] = rho_k
            obj += np.where(has, w[k] * rho_k, 0.0)
            # rates fall with rho, so column 0 (rho = 0) is the best this
            # assignment can do for user k
            viol = np.maximum(viol, np.where(has, 0.0, C[k] - tot[:, 0]))
        feas_block = viol <= 0.0
        if feas_block.any():
            cand = np.where(feas_block, obj, -np.inf)
            j = int(np.argmax(cand))
            if cand[j] > best_obj:
                best_obj = cand[j]
                best_assign = block[j]
                best_rho = rho_pick[j].copy()
        j = int(np.argmin(viol))
        if viol[j] < best_viol:
            best_viol = viol[j]
            best_viol_assign = block[j]
            best_viol_rho = rho_pick[j].copy()

    if best_assign is None:
        best_assign = best_viol_assign
        best_rho = best_viol_rho

    x = np.zeros((K, N), dtype=np.int8)
    for n in range(N):
        if best_assign[n] >= 0:
            x[best_assign[n], n] = 1
    alloc = AllocationPA(assign=x, split_ratio=best_rho)
    report = evaluate(alloc, cfg, ch)
    return alloc, report


def oracle_ub(cfg: SystemConfig, ch: ChannelState,
              grid_step: float = 1.0 / 256.0):
    """Exhaustive optimum of the per-subcarrier splitting relaxation.

    Unassigned (k, n) pairs harvest at rho = 1. For a fixed assignment each
    user's assigned ratios are searched jointly on the grid (the rate
    constraint couples them); users are otherwise independent, so per-user
    best values are cached by assigned subset.
    """
    from .model import AllocationUB, evaluate

    grid = _grid(grid_step)
    K, N = cfg.num_users, cfg.num_subcarriers
    _check_guards(cfg, grid.size, N)
    C = cfg.secrecy_demand_bits
    p = cfg.subcarrier_power_mw
    zeta = cfg.conversion_efficiency
    ph = p[None, :] * ch.gain                           # (K, N)
    full = zeta * ph.sum()                              # everything at rho=1

    rates_kng = np.stack(
        [rate_matrix(np.full(K, g), cfg, ch) for g in grid], axis=2)

    # cache[(k, subset_mask)] = (delta_obj, rho_row or None feasible flag...)
    cache: dict = {}

    def user_best(k: int, subset: tuple) -> tuple:
        """Best harvest delta (vs all-rho=1) for user k holding `subset`,
        plus the ratios; (None, shortfall) when the demand is out of reach."""
        key = (k, subset)
        if key in cache:
            return cache[key]
        if C[k] <= 0.0:
            out = (0.0, np.ones(len(subset)))
            cache[key] = out
            return out
        subcarriers = list(subset)
        dims = len(subcarriers)
        if dims == 0:
            out = (None, C[k])
            cache[key] = out
            return out
        if float(grid.size) ** dims > GRID_LIMIT:
            raise GuardRailError("per-user joint ratio grid too large")
        # meshgrid over the user's assigned subcarriers
        axes = [rates_kng[k, n] for n in subcarriers]   # each (G,)
        rate_sum = np.zeros([grid.size] * dims)
        for d, r in enumerate(axes):
            shape = [1] * dims
            shape[d] = grid.size
            rate_sum = rate_sum + r.reshape(shape)
        feasible = rate_sum >= C[k]
        if not feasible.any():
            out = (None, float(C[k] - rate_sum.max()))
            cache[key] = out
            return out
        loss = np.zeros([grid.size] * dims)
        for d, n in enumerate(subcarriers):
            shape = [1] * dims
            shape[d] = grid.size
            loss = loss + (zeta * ph[k, n] * (1.0 - grid)).reshape(shape)
        loss = np.where(feasible, loss, np.inf)
        flat = int(np.argmin(loss))
        idx = np.unravel_index(flat, loss.shape)
        rho_row = np.array([grid[i] for i in idx])
        out = (float(-loss[idx]), rho_row)
        cache[key] = out
        return out

    assignments = _all_assignments(K, N)
    best_obj = -np.inf
    best = None
    best_viol = np.inf
    best_viol_state = None

    for a in assignments:
        obj = full
        viol = 0.0
        rows = {}
        for k in range(K):
            subset = tuple(int(n) for n in range(N) if a[n] == k)
            delta, payload = user_best(k, subset)
            if delta is None:
                viol = max(viol, payload)
            else:
                obj += delta
                rows[k] = (subset, payload)
        if viol <= 0.0:
            if obj > best_obj:
                best_obj = obj
                best = (a.copy(), dict(rows))
        elif viol < best_viol:
            best_viol = viol
            best_viol_state = (a.copy(), dict(rows))

    if best is None:
        best = best_viol_state

    a, rows = best
    x = np.zeros((K, N), dtype=np.int8)
    rho = np.ones((K, N))
    for n in range(N):
        if a[n] >= 0:
            x[a[n], n] = 1
    for k, (subset, rho_row) in rows.items():
        for d, n in enumerate(subset):
            rho[k, n] = rho_row[d]
    # demanded-but-unreachable users decode everything they hold
    for k in range(K):
        if k not in rows:
            rho[k, x[k] == 1] = 0.0
    alloc = AllocationUB(assign=x, split_ratio=rho)
    report = evaluate(alloc, cfg, ch)
    return alloc, report

"""Compiled inner loops for the splitting-ratio solvers.

The practical per-user solver and both baselines share one dual-ascent loop:
block-coordinate updates of (split ratios, assignment) under fixed
multipliers, a subgradient step on the multipliers, and an exact primal
recovery of the best split ratios for every assignment the loop visits (the
"incumbent"). Everything here is plain loops so numba can compile it; the
readable reference implementations of the same operations live in ppa.py.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

INV_LN2 = 1.0 / math.log(2.0)
LN2 = math.log(2.0)


@njit(cache=True)
def _user_rate(ph, pb, noise, X, k, rho):
    """Secrecy rate of user k over its assigned subcarriers at split rho."""
    total = 0.0
    for n in range(ph.shape[1]):
        if X[k, n] != 0:
            num = (1.0 - rho) * ph[k, n] + noise
            den = pb[k, n] + noise
            if num > den:
                total += math.log(num / den) * INV_LN2
    return total


@njit(cache=True)
def _deriv_user(ph, pb, noise, w_k, mu_k, X, k, rho, active_floor):
    """d/drho of the per-user Lagrangian piece.

    Harvest contributes the constant slope w_k; each assigned subcarrier
    whose rate is alive on the current segment (breakpoint >= active_floor)
    contributes its decode-rate slope.
    """
    s = w_k
    for n in range(ph.shape[1]):
        if X[k, n] != 0 and ph[k, n] > pb[k, n]:
            bp = 1.0 - pb[k, n] / ph[k, n]
            if bp >= active_floor:
                s -= mu_k * ph[k, n] / (LN2 * ((1.0 - rho) * ph[k, n] + noise))
    return s


@njit(cache=True)
def _lagr_user(ph, pb, noise, w_k, mu_k, X, k, rho):
    return w_k * rho + mu_k * _user_rate(ph, pb, noise, X, k, rho)


@njit(cache=True)
def _rho_opt_user(ph, pb, noise, w_k, mu_k, X, k, tol, max_iters,
                  bp_buf, cand_buf):
    """Maximize the per-user Lagrangian piece over rho in [0, 1].

    The objective is piecewise: concave between consecutive rate-death
    breakpoints (1 - beta/h per live subcarrier) and linear after the last.
    Candidates are the endpoints, every breakpoint, and one bisected
    stationary point per segment with a sign change; the best candidate wins.
    Returns (rho, converged).
    """
    N = ph.shape[1]
    if mu_k <= 0.0:
        return 1.0, True
    nb = 0
    for n in range(N):
        if X[k, n] != 0 and ph[k, n] > pb[k, n]:
            bp_buf[nb] = 1.0 - pb[k, n] / ph[k, n]
            nb += 1
    if nb == 0:
        return 1.0, True
    bps = np.sort(bp_buf[:nb])

    nc = 0
    cand_buf[nc] = 0.0
    nc += 1
    for i in range(nb):
        if cand_buf[nc - 1] != bps[i]:
            cand_buf[nc] = bps[i]
            nc += 1
    if cand_buf[nc - 1] != 1.0:
        cand_buf[nc] = 1.0
        nc += 1

    converged = True
    n_edges = nc
    prev = 0.0
    for i in range(1, n_edges):
        hi = cand_buf[i]
        if hi <= prev + 1e-15:
            prev = hi
            continue
        da = _deriv_user(ph, pb, noise, w_k, mu_k, X, k, prev, hi)
        db = _deriv_user(ph, pb, noise, w_k, mu_k, X, k, hi, hi)
        if da > 0.0 and db < 0.0:
            a = prev
            b = hi
            mid = 0.5 * (a + b)
            ok = False
            for _ in range(max_iters):
                mid = 0.5 * (a + b)
                d = _deriv_user(ph, pb, noise, w_k, mu_k, X, k, mid, hi)
                if abs(d) < tol:
                    ok = True
                    break
                if d > 0.0:
                    a = mid
                else:
                    b = mid
                if b - a < 1e-15:
                    ok = abs(d) < tol
                    break
            if not ok:
                converged = False
            cand_buf[nc] = mid
            nc += 1
        prev = hi

    best = cand_buf[0]
    best_val = _lagr_user(ph, pb, noise, w_k, mu_k, X, k, cand_buf[0])
    for i in range(1, nc):
        val = _lagr_user(ph, pb, noise, w_k, mu_k, X, k, cand_buf[i])
        if val > best_val:
            best_val = val
            best = cand_buf[i]
    return best, converged


@njit(cache=True)
def _x_step(ph, pb, noise, rho, mu, X_out):
    """Give each subcarrier to the user with the largest mu-weighted rate;
    ties (including the all-zero case) go to the lowest user index."""
    K, N = ph.shape
    for n in range(N):
        best_k = 0
        best_v = -1.0
        for k in range(K):
            num = (1.0 - rho[k]) * ph[k, n] + noise
            den = pb[k, n] + noise
            r = 0.0
            if num > den:
                r = math.log(num / den) * INV_LN2
            v = mu[k] * r
            if v > best_v:
                best_v = v
                best_k = k
        for k in range(K):
            X_out[k, n] = 0
        X_out[best_k, n] = 1


@njit(cache=True)
def _recover_user(ph, pb, noise, X, k, c_k):
    """Largest split ratio still meeting user k's demand on its assignment.

    Returns (rho_hat, rate_at_zero, feasible); rho_hat keeps
    rate(rho_hat) >= c_k exactly when feasible.
    """
    if c_k <= 0.0:
        return 1.0, 0.0, True
    r0 = _user_rate(ph, pb, noise, X, k, 0.0)
    if r0 < c_k:
        return 0.0, r0, False
    lo = 0.0
    hi = 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _user_rate(ph, pb, noise, X, k, mid) >= c_k:
            lo = mid
        else:
            hi = mid
    return lo, r0, True


@njit(cache=True)
def _recover_and_score(ph, pb, noise, C, w, X, Xrec, rho_hat, user_viol,
                       recover_fixed, rho_fixed):
    """Refresh the exact per-user recovery for rows that changed since the
    cached assignment Xrec, then score the allocation."""
    K, N = X.shape
    obj = 0.0
    viol = 0.0
    for k in range(K):
        same = True
        for n in range(N):
            if X[k, n] != Xrec[k, n]:
                same = False
                break
        if not same:
            if recover_fixed:
                r = _user_rate(ph, pb, noise, X, k, rho_fixed)
                rho_hat[k] = rho_fixed
                user_viol[k] = C[k] - r
            else:
                rh, r0, ok = _recover_user(ph, pb, noise, X, k, C[k])
                rho_hat[k] = rh
                user_viol[k] = 0.0 if ok else C[k] - r0
            for n in range(N):
                Xrec[k, n] = X[k, n]
        obj += w[k] * rho_hat[k]
        if user_viol[k] > viol:
            viol = user_viol[k]
    return obj, viol


@njit(cache=True)
def pa_family_solve(ph, pb, noise, zeta, C, X0, mu0, a0,
                    rho_step_on, x_step_on, rho_fixed,
                    max_dual_iters, max_bcd_iters, bisect_tol,
                    max_bisect_iters, dual_tol, stall_limit):
    """Run the dual-ascent chains for the per-user splitting family.

    Each chain m starts from assignment X0[m] and multipliers mu0[m].
    rho_step_on/x_step_on freeze one block for the baselines (fixed split or
    fixed assignment). Every assignment the chain visits is scored through
    exact recovery and the per-chain best is kept.
    """
    M, K, N = X0.shape
    w = np.empty(K)
    for k in range(K):
        s = 0.0
        for n in range(N):
            s += ph[k, n]
        w[k] = zeta * s

    inc_X = np.zeros((M, K, N), dtype=np.int8)
    inc_rho = np.ones((M, K))
    inc_obj = np.full(M, -1.0)
    inc_feas = np.zeros(M, dtype=np.bool_)
    inc_viol = np.full(M, np.inf)
    fin_X = np.zeros((M, K, N), dtype=np.int8)
    dual_iters = np.zeros(M, dtype=np.int64)
    bcd_passes = np.zeros(M, dtype=np.int64)

    bp_buf = np.empty(N)
    cand_buf = np.empty(2 * N + 4)
    X = np.empty((K, N), dtype=np.int8)
    Xn = np.empty((K, N), dtype=np.int8)
    Xrec = np.empty((K, N), dtype=np.int8)
    rho = np.empty(K)
    mu = np.empty(K)
    rho_hat = np.ones(K)
    user_viol = np.zeros(K)
    rates = np.empty(K)
    recover_fixed = not rho_step_on

    for m in range(M):
        for k in range(K):
            mu[k] = mu0[m, k]
            rho[k] = rho_fixed if recover_fixed else 1.0
            rho_hat[k] = 1.0
            user_viol[k] = 0.0
            for n in range(N):
                X[k, n] = X0[m, k, n]
                Xrec[k, n] = -1
        stall = 0

        obj, viol = _recover_and_score(ph, pb, noise, C, w, X, Xrec,
                                       rho_hat, user_viol,
                                       recover_fixed, rho_fixed)
        feas = viol <= 1e-12
        better = False
        if feas:
            better = (not inc_feas[m]) or obj > inc_obj[m]
        else:
            better = (not inc_feas[m]) and viol < inc_viol[m]
        if better:
            inc_obj[m] = obj
            inc_viol[m] = viol
            inc_feas[m] = feas
            for k in range(K):
                inc_rho[m, k] = rho_hat[k]
                for n in range(N):
                    inc_X[m, k, n] = X[k, n]

        for t in range(max_dual_iters):
            dual_iters[m] += 1
            for _ in range(max_bcd_iters):
                bcd_passes[m] += 1
                if rho_step_on:
                    for k in range(K):
                        rho[k], _ = _rho_opt_user(ph, pb, noise, w[k], mu[k],
                                                  X, k, bisect_tol,
                                                  max_bisect_iters,
                                                  bp_buf, cand_buf)
                if not x_step_on:
                    break
                _x_step(ph, pb, noise, rho, mu, Xn)
                changed = False
                for k in range(K):
                    for n in range(N):
                        if Xn[k, n] != X[k, n]:
                            changed = True
                        X[k, n] = Xn[k, n]
                if not changed:
                    break

            for k in range(K):
                rates[k] = _user_rate(ph, pb, noise, X, k, rho[k])

            obj, viol = _recover_and_score(ph, pb, noise, C, w, X, Xrec,
                                           rho_hat, user_viol,
                                           recover_fixed, rho_fixed)
            feas = viol <= 1e-12
            better = False
            if feas:
                better = (not inc_feas[m]) or obj > inc_obj[m]
            else:
                better = (not inc_feas[m]) and viol < inc_viol[m]
            if better:
                stall = 0
                inc_obj[m] = obj
                inc_viol[m] = viol
                inc_feas[m] = feas
                for k in range(K):
                    inc_rho[m, k] = rho_hat[k]
                    for n in range(N):
                        inc_X[m, k, n] = X[k, n]
            else:
                stall += 1

            alpha = a0 / math.sqrt(t + 1.0)
            delta = 0.0
            for k in range(K):
                nv = mu[k] + alpha * (C[k] - rates[k])
                if nv < 0.0:
                    nv = 0.0
                d = abs(nv - mu[k])
                if d > delta:
                    delta = d
                mu[k] = nv

            if delta < dual_tol:
                break
            if stall_limit > 0 and stall >= stall_limit:
                break

        for k in range(K):
            for n in range(N):
                fin_X[m, k, n] = X[k, n]

    return (inc_X, inc_rho, inc_obj, inc_feas, inc_viol, fin_X,
            dual_iters, bcd_passes)

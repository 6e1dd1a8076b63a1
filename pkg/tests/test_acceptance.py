"""Acceptance battery: one test per shipped guarantee, each printing a
single [PASS]/[FAIL] line (visible with -s or in failure output).

Criterion 6c is known to fail at this scale: the practical scheme's
harvest-optimal assignments hand demanding users every useful subcarrier,
and each extra assigned subcarrier leaks (1 - rho) of its power into
decoding. At loose demands that intrinsic leak exceeds the gated factor on
the per-subcarrier bound, whose recovery provably minimizes decoding power.
The measured ratios are printed, never hidden; the notes ledger carries the
full analysis and the rejected alternatives.
"""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from swiptsec import (ChannelState, SystemConfig, oracle_pa, oracle_ub,
                      solve_ppa, solve_pub)
from swiptsec.harness import parse_config, run_experiment
from swiptsec.ppa import PpaSolverOptions, dLk_drho, optimize_rho_bisect
from swiptsec.validation import (arbitrate_rho_star, coupled_solve_all,
                                 random_small_instance)

REPO = Path(__file__).resolve().parent.parent
LN2 = np.log(2.0)


def report(ok: bool, label: str, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {label}" + (f": {detail}" if detail else ""))


@pytest.fixture(scope="session")
def small100():
    return [random_small_instance(3000 + i) for i in range(100)]


@pytest.fixture(scope="session")
def desk_runs():
    out = {}
    t0 = time.perf_counter()
    out["sweep"] = run_experiment(parse_config(str(REPO / "configs/desk.cfg")))
    out["pt"] = run_experiment(parse_config(str(REPO / "configs/desk_pt.cfg")))
    out["elapsed_s"] = time.perf_counter() - t0
    return out


def rows_by_key(rows):
    return {(r.scheme, r.pt_dbm, r.cbar_bits): r for r in rows}


def test_criterion_1_practical_solver_tracks_oracle(small100):
    t0 = time.perf_counter()
    feas = hits = 0
    for i, (cfg, ch) in enumerate(small100):
        _, orc = oracle_pa(cfg, ch, grid_step=1 / 256)
        if not orc.feasible:
            continue
        feas += 1
        _, rep = solve_ppa(cfg, ch, PpaSolverOptions(rng_seed=9000 + i))
        if rep.feasible and rep.objective_mw >= 0.98 * orc.objective_mw:
            hits += 1
    elapsed = time.perf_counter() - t0
    ok = feas > 0 and hits / feas >= 0.90 and elapsed < 60.0
    report(ok, "criterion 1",
           f"{hits}/{feas} instances within 98% of the exhaustive optimum "
           f"({elapsed:.1f}s)")
    assert hits / feas >= 0.90
    assert elapsed < 60.0


def test_criterion_2_bound_solver_tracks_oracle(small100):
    # the joint split grid guard caps the exhaustive reference at step 1/128
    feas = hits = 0
    ratios = []
    for cfg, ch in small100:
        _, orc = oracle_ub(cfg, ch, grid_step=1 / 128)
        if not orc.feasible:
            continue
        feas += 1
        _, rep = solve_pub(cfg, ch)
        r = rep.objective_mw / orc.objective_mw if rep.feasible else 0.0
        ratios.append(r)
        if r >= 0.95:
            hits += 1
    q = np.percentile(ratios, [0, 25, 50, 75, 100])
    ok = feas > 0 and hits / feas >= 0.85
    report(ok, "criterion 2",
           f"{hits}/{feas} within 95% of the grid reference; ratio "
           f"quartiles {q[0]:.4f}/{q[1]:.4f}/{q[2]:.4f}/{q[3]:.4f}/"
           f"{q[4]:.4f}")
    assert hits / feas >= 0.85


def test_criterion_3_closed_form_split_arbitration():
    mismatches, ties, printed = arbitrate_rho_star(10000, seed=11)
    report(mismatches == 0, "criterion 3",
           f"0 mismatches required, got {mismatches}; {ties} grid ties; "
           f"published-variant disagreement rate "
           f"{printed / 10000:.1%}")
    assert mismatches == 0


def _draw_subproblem(rng):
    N = int(rng.integers(1, 4))
    gain = rng.exponential(1.0, size=(2, N)) + 1e-6
    ch = ChannelState.from_gains(gain)
    cfg = SystemConfig(2, N, rng.uniform(0.3, 3.0, N),
                       rng.uniform(0.05, 1.0), rng.uniform(0.2, 1.0),
                       np.zeros(2))
    mu = np.array([rng.lognormal(0.0, 1.0), 0.0])
    assign = np.zeros((2, N), dtype=np.int8)
    assign[0, :] = 1
    return cfg, ch, assign, mu


def _lagrangian_grid(rho_grid, cfg, ch, assign, mu, k=0):
    p = cfg.subcarrier_power_mw
    h, b = ch.gain[k], ch.eaves_gain[k]
    vals = cfg.conversion_efficiency * float(np.sum(p * h)) * rho_grid
    for n in np.flatnonzero(assign[k]):
        num = (1.0 - rho_grid) * p[n] * h[n] + cfg.noise_mw
        den = p[n] * b[n] + cfg.noise_mw
        vals = vals + mu[k] * np.maximum(0.0, np.log2(num / den))
    return vals


def test_criterion_4_bisection_stationarity():
    # draw single-user subproblems, keep those whose optimum is interior
    # (coarse argmax away from the endpoints, away from every rate-death
    # breakpoint, and not in a near-tie with a distant candidate)
    rng = np.random.default_rng(2026)
    coarse = np.linspace(0.0, 1.0, 1001)
    fine = np.linspace(0.0, 1.0, 100001)
    accepted = 0
    worst_dl = worst_gap = 0.0
    while accepted < 1000:
        cfg, ch, assign, mu = _draw_subproblem(rng)
        vals = _lagrangian_grid(coarse, cfg, ch, assign, mu)
        j = int(np.argmax(vals))
        if j <= 2 or j >= 998:
            continue
        tau = 1.0 - ch.eaves_gain[0] / ch.gain[0]
        if np.any(np.abs(coarse[j] - tau) < 3e-3):
            continue
        away = np.abs(coarse - coarse[j]) > 5e-3
        if vals[j] - vals[away].max() < 1e-7 * abs(vals[j]):
            continue
        rho, converged = optimize_rho_bisect(0, assign, mu, cfg, ch)
        dl = abs(dLk_drho(0, rho, assign, mu, cfg, ch))
        gap = abs(rho - fine[int(np.argmax(
            _lagrangian_grid(fine, cfg, ch, assign, mu)))])
        worst_dl = max(worst_dl, dl)
        worst_gap = max(worst_gap, gap)
        assert converged
        assert dl < 1e-8
        assert gap <= 1e-4
        accepted += 1
    report(True, "criterion 4",
           f"1000 interior subproblems; worst |dL/drho| {worst_dl:.2e}, "
           f"worst distance to 1e-5-grid argmax {worst_gap:.2e}")


def test_criterion_5_bound_dominance(small100):
    violations = 0
    checked = 0
    for i, (cfg, ch) in enumerate(small100):
        out = coupled_solve_all(cfg, ch, seed=i)
        reps = {name: rep for name, (_, rep) in out.items()}
        if reps["ppa"].feasible and reps["pub"].feasible:
            checked += 1
            if reps["pub"].objective_mw < reps["ppa"].objective_mw * (
                    1 - 1e-6):
                violations += 1
        for base in ("fps", "fsa"):
            if reps["ppa"].feasible and reps[base].feasible:
                if reps["ppa"].objective_mw < reps[base].objective_mw * (
                        1 - 1e-6):
                    violations += 1
    report(violations == 0, "criterion 5",
           f"{violations} ordering violations over {checked} coupled "
           f"instances (zero allowed)")
    assert violations == 0


def test_criterion_6a_harvest_nonincreasing_in_demand(desk_runs):
    by = rows_by_key(desk_runs["sweep"])
    cbars = sorted({k[2] for k in by})
    bad = []
    for scheme in ("fps", "fsa", "ppa", "pub"):
        es = [by[(scheme, 15.0, cb)].esum_mw_mean for cb in cbars]
        for a, b in zip(es, es[1:]):
            if b > a + 1e-9:
                bad.append(scheme)
                break
    report(not bad, "criterion 6a",
           "aggregate harvest nonincreasing in the demand for every scheme"
           + (f" (violators: {bad})" if bad else ""))
    assert not bad


def _cutoff(by, scheme, cbars, threshold=0.10):
    feas = [cb for cb in cbars
            if by[(scheme, 15.0, cb)].feasible_frac >= threshold]
    return max(feas) if feas else None


def test_criterion_6b_feasibility_cutoff_ordering(desk_runs):
    by = rows_by_key(desk_runs["sweep"])
    cbars = sorted({k[2] for k in by})
    cut = {s: _cutoff(by, s, cbars) for s in ("fps", "fsa", "ppa", "pub")}
    # ordering is gated; absolute positions are reported against a linear
    # rescale of the published large-system cutoffs (0.125 / 0.95 / 2.625
    # demanded bits at this subcarrier count), which depend on an
    # unspecified propagation exponent and are informational only
    scaled = {"fps": 0.125, "fsa": 0.95, "ppa": 2.625, "pub": 2.625}
    within = {s: (cut[s] is not None
                  and 0.5 * scaled[s] <= cut[s] <= 1.5 * scaled[s])
              for s in cut}
    grid_ok = (None not in cut.values() and cut["fps"] < cut["fsa"] <
               cut["ppa"])
    i_ppa = cbars.index(cut["ppa"]) if cut["ppa"] in cbars else -1
    i_pub = cbars.index(cut["pub"]) if cut["pub"] in cbars else -1
    close = abs(i_ppa - i_pub) <= 1  # equal up to one grid step
    report(grid_ok and close, "criterion 6b",
           f"cutoffs (feasible fraction >= 0.10): fps={cut['fps']} < "
           f"fsa={cut['fsa']} < ppa={cut['ppa']} ~ pub={cut['pub']}; "
           f"within +/-50% of rescaled published values: {within} "
           f"(reported, not gated)")
    assert grid_ok
    assert close


def test_criterion_6c_decoding_power_close_to_bound(desk_runs):
    by = rows_by_key(desk_runs["sweep"])
    cbars = sorted({k[2] for k in by})
    lines = []
    worst = 0.0
    for cb in cbars:
        rp, rb = by[("ppa", 15.0, cb)], by[("pub", 15.0, cb)]
        if rp.feasible_frac <= 0 or rb.feasible_frac <= 0:
            continue
        if rb.info_power_mw_mean == 0.0:
            ok = rp.info_power_mw_mean == 0.0
            lines.append(f"demand {cb}: both zero" if ok else
                         f"demand {cb}: bound zero, practical nonzero")
            worst = max(worst, 0.0 if ok else np.inf)
            continue
        ratio = rp.info_power_mw_mean / rb.info_power_mw_mean
        worst = max(worst, ratio)
        lines.append(f"demand {cb}: ratio {ratio:.3f}")
    ok = worst <= 1.25
    report(ok, "criterion 6c",
           f"decoding-power ratio practical/bound <= 1.25 at every "
           f"feasible point; measured max {worst:.3f} [" + "; ".join(lines)
           + "]. Known failure at this scale; the harvest-optimal "
           "assignment concentrates subcarriers on demanding users and "
           "each assigned subcarrier leaks decoding power, while the "
           "bound's recovery is decoding-minimal. See the notes ledger "
           "for the full analysis.")
    assert worst <= 1.25


def test_criterion_6d_harvest_grows_with_transmit_power(desk_runs):
    by = rows_by_key(desk_runs["pt"])
    pts = sorted({k[1] for k in by})
    ok = True
    details = []
    for scheme in ("fps", "fsa", "ppa", "pub"):
        es = [by[(scheme, pt, 0.4)].esum_mw_mean for pt in pts]
        if any(b < a - 1e-9 for a, b in zip(es, es[1:])):
            ok = False
            details.append(f"{scheme} not nondecreasing")
    ratios = [by[("ppa", pt, 0.4)].esum_mw_mean
              / by[("pub", pt, 0.4)].esum_mw_mean for pt in pts]
    if min(ratios) < 0.9:
        ok = False
    details.append("practical/bound harvest ratios "
                   + ", ".join(f"{r:.4f}" for r in ratios))
    report(ok, "criterion 6d", "; ".join(details))
    assert ok


def test_criterion_6_runtime(desk_runs):
    ok = desk_runs["elapsed_s"] < 600.0
    report(ok, "criterion 6 runtime",
           f"both desk sweeps in {desk_runs['elapsed_s']:.0f}s (< 600s)")
    assert ok


def test_criterion_7_large_preset_exists_and_is_documented():
    cfg = parse_config(str(REPO / "configs/paper.cfg"))
    results = REPO / "RESULTS.md"
    ok = (cfg.num_users == 8 and cfg.num_subcarriers == 128
          and cfg.num_trials == 200 and cfg.ppa.num_starts == 200
          and results.exists() and "paper.cfg" in results.read_text())
    report(ok, "criterion 7",
           "large-scale preset parses (128 subcarriers, 8 users, 200 "
           "trials, 200 starts) and RESULTS.md discusses its curves")
    assert cfg.num_users == 8
    assert cfg.num_subcarriers == 128
    assert cfg.num_trials == 200
    assert cfg.ppa.num_starts == 200
    assert results.exists()
    assert "paper.cfg" in results.read_text()


def test_criterion_8_byte_identical_reruns(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-m", "swiptsec", "run",
             str(REPO / "configs/paper.cfg"), "--trials", "2", "--seed",
             "42", "--out", str(out)],
            capture_output=True, text=True, cwd=str(REPO))
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    report(ok, "criterion 8",
           f"two seeded reruns byte-identical ({len(outs[0])} bytes)")
    assert ok

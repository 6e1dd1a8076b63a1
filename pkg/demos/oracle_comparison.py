"""Solvers versus exhaustive enumeration on oracle-sized instances.

The brute-force reference grids every assignment and every split ratio, so
it only exists at toy sizes; the point is to show the practical solver and
the bound solver sit on top of it.

Run from the repo root:  python3 demos/oracle_comparison.py
"""
import numpy as np

from swiptsec import oracle_pa, oracle_ub, solve_ppa, solve_pub
from swiptsec.ppa import PpaSolverOptions
from swiptsec.validation import random_small_instance

print(f"{'seed':>5} {'oracle_pa':>10} {'ppa':>10} {'ratio':>7}   "
      f"{'oracle_ub':>10} {'pub':>10} {'ratio':>7}")

ratios_pa, ratios_ub = [], []
for seed in range(20):
    cfg, ch = random_small_instance(seed)
    _, opa = oracle_pa(cfg, ch, grid_step=1 / 256)
    if not opa.feasible:
        print(f"{seed:>5}  infeasible draw, skipped")
        continue
    _, rpa = solve_ppa(cfg, ch, PpaSolverOptions(rng_seed=seed))
    _, oub = oracle_ub(cfg, ch, grid_step=1 / 128)
    _, rub = solve_pub(cfg, ch)
    ra = rpa.objective_mw / opa.objective_mw
    rb = rub.objective_mw / oub.objective_mw
    ratios_pa.append(ra)
    ratios_ub.append(rb)
    print(f"{seed:>5} {opa.objective_mw:>10.4f} {rpa.objective_mw:>10.4f} "
          f"{ra:>7.4f}   {oub.objective_mw:>10.4f} "
          f"{rub.objective_mw:>10.4f} {rb:>7.4f}")

print(f"\nmedian ratio vs oracle: practical {np.median(ratios_pa):.4f}, "
      f"bound {np.median(ratios_ub):.4f}")
print("ratios above 1 are real: the solvers work on continuous ratios,"
      " the oracle on a finite grid")

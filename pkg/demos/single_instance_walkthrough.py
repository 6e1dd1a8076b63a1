"""Anatomy of one instance: channel, schemes, allocations, harvest.

Run from the repo root:  python3 demos/single_instance_walkthrough.py
"""
import numpy as np

from swiptsec import ScenarioParams, SystemConfig, dbm_to_mw, generate
from swiptsec.validation import coupled_solve_all

# a downlink with 4 receivers on 8 subcarriers, drawn from the seeded
# Rayleigh + path-loss generator
params = ScenarioParams(num_users=4, num_subcarriers=8,
                        pathloss_ref_db=0.0, pathloss_exponent=0.1,
                        rng_seed=11)
ch = generate(params)

pt_mw = dbm_to_mw(15.0)
cfg = SystemConfig(
    num_users=4,
    num_subcarriers=8,
    subcarrier_power_mw=np.full(8, pt_mw / 8),
    noise_mw=dbm_to_mw(0.0),
    conversion_efficiency=0.4,
    secrecy_demand_bits=np.array([0.6, 0.6, 0.0, 0.0]),
)

print("direct gains (users x subcarriers):")
print(np.round(ch.gain, 3))
print("\nstrongest rival gain per pair (the eavesdropper matrix):")
print(np.round(ch.eaves_gain, 3))
print("\nusers 0 and 1 each owe 0.6 secret bits; users 2 and 3 just harvest")

out = coupled_solve_all(cfg, ch, seed=0)

for name in ("fps", "fsa", "ppa", "pub"):
    alloc, rep = out[name]
    print(f"\n--- {name} ---")
    print("subcarrier owners:", [
        int(np.argmax(alloc.assign[:, n])) if alloc.assign[:, n].any()
        else "-" for n in range(8)])
    if alloc.split_ratio.ndim == 1:
        print("split ratio per user:", np.round(alloc.split_ratio, 3))
    else:
        owned = alloc.split_ratio[alloc.assign.astype(bool)]
        print("split ratios on owned pairs:", np.round(owned, 3))
    print("secrecy rates:", np.round(rep.per_user_rate, 3),
          "feasible:", rep.feasible)
    print(f"harvested total: {rep.objective_mw:.3f} mW"
          f"  (decoding consumed {rep.info_power_mw:.3f} mW)")

print("\nthe fixed-assignment baseline is stuck: its round-robin share"
      " gives user 1 no subcarrier it can keep secret, so no split ratio"
      " rescues it. The adaptive schemes just route around the leak, and"
      " pub >= ppa >= fps holds on the harvested totals.")

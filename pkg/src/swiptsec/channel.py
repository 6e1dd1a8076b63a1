"""Random downlink channel generation.

Users are dropped uniformly between a reference distance and a cell edge;
large-scale attenuation follows a log-distance path-loss law and small-scale
fading is Rayleigh, i.e. exponential unit-mean power gains. Everything is
driven by NumPy's PCG64 generator seeded through SeedSequence, so a given
seed reproduces the exact same ChannelState on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelState


@dataclass(frozen=True)
class ScenarioParams:
    """Geometry and fading parameters for one random drop."""

    num_users: int
    num_subcarriers: int
    ref_distance_m: float = 1.0
    max_distance_m: float = 10.0
    pathloss_ref_db: float = -30.0
    pathloss_exponent: float = 3.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_users < 2:
            raise ValueError("need at least 2 users")
        if self.num_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.ref_distance_m <= 0:
            raise ValueError("reference distance must be positive")
        if self.max_distance_m < self.ref_distance_m:
            raise ValueError("max distance cannot undercut the reference")
        if self.pathloss_exponent <= 0:
            raise ValueError("path-loss exponent must be positive")


def generate(params: ScenarioParams) -> ChannelState:
    """Draw one channel realization.

    Distances d_k ~ Uniform[d_ref, d_max]; mean gain follows
    10^(L_ref/10) * (d_k/d_ref)^(-alpha); per-subcarrier gains multiply the
    mean by i.i.d. Exp(1) fading. Deterministic given params.rng_seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(params.rng_seed))
    K, N = params.num_users, params.num_subcarriers
    dist = rng.uniform(params.ref_distance_m, params.max_distance_m, size=K)
    mean_gain = (10.0 ** (params.pathloss_ref_db / 10.0)
                 * (dist / params.ref_distance_m) ** (-params.pathloss_exponent))
    fading = rng.exponential(1.0, size=(K, N))
    return ChannelState.from_gains(mean_gain[:, None] * fading)

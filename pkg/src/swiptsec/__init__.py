"""Secrecy-constrained SWIPT power-splitting toolkit.

Maximizes total harvested power in an OFDMA downlink where every receiver
splits its signal between an energy harvester and an information decoder,
every other user is a potential eavesdropper, and each user carries a
secrecy-rate demand. Ships the practical per-user splitting solver, the
per-subcarrier relaxation used as a performance bound, two fixed baselines,
an exhaustive oracle for small instances, a seeded channel generator, and a
sweep harness with CSV output.
"""

from .baselines import (FpsSolverOptions, FsaSolverOptions, fixed_assignment,
                        solve_fps, solve_fsa)
from .channel import ScenarioParams, generate
from .harness import (AggregateRow, ConfigError, ExperimentConfig,
                      parse_config, run_experiment, write_csv)
from .model import (AllocationPA, AllocationUB, ChannelState, SolveReport,
                    SystemConfig, dbm_to_mw, evaluate, harvested_power_pa,
                    harvested_power_ub, mw_to_dbm, pa_as_ub, rate_matrix,
                    secrecy_rate_pa, secrecy_rate_ub, user_secrecy_rate)
from .oracle import (GuardRailError, max_secrecy_capacity, oracle_pa,
                     oracle_ub)
from .ppa import (DualState, PpaSolverOptions, assign_subcarriers_pa,
                  dLk_drho, lagrangian_pa, optimize_rho_bisect,
                  recover_ratios, solve_ppa, update_duals_pa)
from .pub import (PubSolverOptions, assign_subcarriers_ub, dual_value_ub,
                  recover_ratios_ub, rho_star_pair, rho_star_ub, solve_pub,
                  update_duals_ub)

__version__ = "0.1.0"

__all__ = [
    "AggregateRow", "AllocationPA", "AllocationUB", "ChannelState",
    "ConfigError", "DualState", "ExperimentConfig", "FpsSolverOptions",
    "FsaSolverOptions", "GuardRailError", "PpaSolverOptions",
    "PubSolverOptions", "ScenarioParams", "SolveReport", "SystemConfig",
    "assign_subcarriers_pa", "assign_subcarriers_ub", "dLk_drho",
    "dbm_to_mw", "dual_value_ub", "evaluate", "fixed_assignment", "generate",
    "harvested_power_pa", "harvested_power_ub", "lagrangian_pa",
    "max_secrecy_capacity", "mw_to_dbm", "optimize_rho_bisect", "oracle_pa",
    "oracle_ub", "pa_as_ub", "parse_config", "rate_matrix", "recover_ratios",
    "recover_ratios_ub", "rho_star_pair", "rho_star_ub", "run_experiment",
    "secrecy_rate_pa", "secrecy_rate_ub", "solve_fps", "solve_fsa",
    "solve_ppa", "solve_pub", "update_duals_pa", "update_duals_ub",
    "user_secrecy_rate", "write_csv",
]

"""Experiment harness: seeded Monte-Carlo sweeps over demand and power.

A flat INI config describes the scenario, the sweep grids, and per-scheme
solver options; the harness builds one channel realization per trial (shared
by every sweep point, so curves over the sweep compare like against like),
runs the selected schemes, and aggregates plot-ready CSV.

Sweep points are processed tightest-demand-first and lowest-power-first, and
every solver is warm-started with the neighboring points' solutions (plus
the baselines' assignments where that helps). Recovering a warm solution
under a looser demand or a larger power budget can only gain harvest, so per
trial the reported curves are monotone in both sweep directions by
construction, not by luck.

Aggregation counts an infeasible trial as zero harvested and zero decoder
input power. Wall-clock timing is off by default so identical runs produce
byte-identical CSV; set `timing = on` to fill the wall_ms column instead.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import FpsSolverOptions, FsaSolverOptions, solve_fps, solve_fsa
from .channel import ScenarioParams, generate
from .model import SystemConfig, dbm_to_mw
from .oracle import oracle_pa
from .ppa import PpaSolverOptions, solve_ppa
from .pub import PubSolverOptions, solve_pub

log = logging.getLogger(__name__)

CSV_HEADER = ("scheme,pt_dbm,cbar_bits,trials,feasible_frac,"
              "esum_mw_mean,esum_mw_std,info_power_mw_mean,wall_ms_mean")

SCHEMES = ("ppa", "pub", "fps", "fsa", "oracle")

# canonical per-point run order: baselines feed the practical solver,
# the practical solver feeds the bound
RUN_ORDER = ("fps", "fsa", "ppa", "pub", "oracle")


class ConfigError(ValueError):
    """Bad experiment config (missing key, wrong type, bad token)."""


@dataclass
class ExperimentConfig:
    num_users: int = 4
    num_subcarriers: int = 16
    ref_distance_m: float = 1.0
    max_distance_m: float = 10.0
    pathloss_ref_db: float = -30.0
    pathloss_exponent: float = 3.0
    noise_dbm: float = -30.0
    conversion_efficiency: float = 0.4
    rate_tolerance: float = 1e-6
    pt_dbm: tuple = (15.0,)
    cbar_bits: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)
    demand_pattern: str = "first-half"
    schemes: tuple = ("ppa", "pub", "fps", "fsa")
    num_trials: int = 50
    master_seed: int = 0
    out_path: str = "results.csv"
    timing: bool = False
    ppa: PpaSolverOptions = field(default_factory=PpaSolverOptions)
    pub: PubSolverOptions = field(default_factory=PubSolverOptions)
    fps: FpsSolverOptions = field(default_factory=FpsSolverOptions)
    fsa: FsaSolverOptions = field(default_factory=FsaSolverOptions)
    oracle_grid_step: float = 1.0 / 256.0

    def __post_init__(self):
        if not self.pt_dbm or not self.cbar_bits:
            raise ConfigError("sweep grids must be nonempty")
        if self.num_trials < 1:
            raise ConfigError("trials must be >= 1")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")
        if not self.schemes:
            raise ConfigError("no schemes selected")
        self.demand_users(self.num_users)  # validates the pattern

    def demand_users(self, K: int) -> np.ndarray:
        """Indices of the users that carry the secrecy demand."""
        pat = self.demand_pattern
        if pat == "first-half":
            return np.arange(max(1, K // 2))
        if pat == "all":
            return np.arange(K)
        if pat.startswith("first:"):
            try:
                m = int(pat.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad demand pattern {pat!r}") from None
            if not 1 <= m <= K:
                raise ConfigError(f"demand pattern {pat!r} out of range")
            return np.arange(m)
        raise ConfigError(f"unknown demand pattern {pat!r}")


@dataclass
class AggregateRow:
    scheme: str
    pt_dbm: float
    cbar_bits: float
    trials: int
    feasible_frac: float
    esum_mw_mean: float
    esum_mw_std: float
    info_power_mw_mean: float
    wall_ms_mean: float

    def as_csv(self) -> str:
        f = _fmt
        return (f"{self.scheme},{f(self.pt_dbm)},{f(self.cbar_bits)},"
                f"{self.trials},{f(self.feasible_frac)},"
                f"{f(self.esum_mw_mean)},{f(self.esum_mw_std)},"
                f"{f(self.info_power_mw_mean)},{f(self.wall_ms_mean)}")


def _fmt(v: float) -> str:
    return f"{float(v):.9g}"


def _floats(raw: str) -> tuple:
    toks = raw.replace(",", " ").split()
    if not toks:
        raise ConfigError("empty number list")
    try:
        return tuple(float(t) for t in toks)
    except ValueError as e:
        raise ConfigError(f"bad number list {raw!r}") from e


_BOOL_TOKENS = {"1": True, "yes": True, "true": True, "on": True,
                "0": False, "no": False, "false": False, "off": False}


def _to_bool(raw: str) -> bool:
    try:
        return _BOOL_TOKENS[raw.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {raw!r}") from None


def _apply_options(obj, pairs: dict, label: str) -> None:
    """Copy dash-keyed INI options onto an options dataclass, converting
    each value to the type of the field's default."""
    fields = {f.name for f in dataclasses.fields(obj)}
    for key, raw in pairs.items():
        name = key.replace("-", "_")
        if name not in fields:
            raise ConfigError(f"unknown option {key!r} in [{label}]")
        cur = getattr(obj, name)
        try:
            if isinstance(cur, bool):
                val = _to_bool(raw)
            elif isinstance(cur, int):
                val = int(raw)
            elif isinstance(cur, float):
                val = float(raw)
            else:
                val = raw.strip()
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r} in [{label}]") from e
        setattr(obj, name, val)


def parse_config(path: str) -> ExperimentConfig:
    """Read the INI experiment description; raise ConfigError on anything
    malformed. Unknown sections and keys are rejected, not ignored."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError:
        raise
    except (configparser.Error, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e

    cfg = ExperimentConfig()
    known = {"scenario", "system", "sweep", "run",
             "ppa", "pub", "fps", "fsa", "oracle"}
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")

    def get(sec, key, conv, default):
        if parser.has_option(sec, key):
            try:
                return conv(parser.get(sec, key))
            except ConfigError:
                raise
            except ValueError as e:
                raise ConfigError(f"bad value for {key!r} in [{sec}]") from e
        return default

    cfg.num_users = get("scenario", "num-users", int, cfg.num_users)
    cfg.num_subcarriers = get("scenario", "num-subcarriers", int,
                              cfg.num_subcarriers)
    cfg.ref_distance_m = get("scenario", "ref-distance-m", float,
                             cfg.ref_distance_m)
    cfg.max_distance_m = get("scenario", "max-distance-m", float,
                             cfg.max_distance_m)
    cfg.pathloss_ref_db = get("scenario", "pathloss-ref-db", float,
                              cfg.pathloss_ref_db)
    cfg.pathloss_exponent = get("scenario", "pathloss-exponent", float,
                                cfg.pathloss_exponent)
    cfg.noise_dbm = get("system", "noise-dbm", float, cfg.noise_dbm)
    cfg.conversion_efficiency = get("system", "conversion-efficiency", float,
                                    cfg.conversion_efficiency)
    cfg.rate_tolerance = get("system", "rate-tolerance", float,
                             cfg.rate_tolerance)
    cfg.pt_dbm = get("sweep", "pt-dbm", _floats, cfg.pt_dbm)
    cfg.cbar_bits = get("sweep", "cbar-bits", _floats, cfg.cbar_bits)
    cfg.demand_pattern = get("sweep", "demand-pattern", str,
                             cfg.demand_pattern).strip()
    if parser.has_option("run", "schemes"):
        cfg.schemes = tuple(
            parser.get("run", "schemes").replace(",", " ").split())
    cfg.num_trials = get("run", "trials", int, cfg.num_trials)
    cfg.master_seed = get("run", "seed", int, cfg.master_seed)
    cfg.out_path = get("run", "out", str, cfg.out_path).strip()
    if parser.has_option("run", "timing"):
        try:
            cfg.timing = parser.getboolean("run", "timing")
        except ValueError as e:
            raise ConfigError("bad value for 'timing' in [run]") from e

    for label, obj in (("ppa", cfg.ppa), ("pub", cfg.pub),
                       ("fps", cfg.fps), ("fsa", cfg.fsa)):
        if parser.has_section(label):
            pairs = dict(parser[label])
            if label == "fsa":
                raw = pairs.pop("fsa-assignment", pairs.pop("assignment",
                                                            None))
                if raw is not None:
                    _parse_fsa_assignment(raw, obj)
            _apply_options(obj, pairs, label)
    cfg.oracle_grid_step = get("oracle", "grid-step", float,
                               cfg.oracle_grid_step)

    try:
        cfg.__post_init__()
        _options_sanity(cfg)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return cfg


def _parse_fsa_assignment(raw: str, opts: FsaSolverOptions) -> None:
    """Accept `roundrobin`, `random`, or `random(<seed>)`."""
    raw = raw.strip()
    if raw == "roundrobin":
        opts.assignment = "roundrobin"
        return
    if raw == "random":
        opts.assignment = "random"
        return
    if raw.startswith("random(") and raw.endswith(")"):
        try:
            opts.rng_seed = int(raw[7:-1])
        except ValueError:
            raise ConfigError(f"bad fsa-assignment {raw!r}") from None
        opts.assignment = "random"
        return
    raise ConfigError(f"bad fsa-assignment {raw!r}")


def _options_sanity(cfg: ExperimentConfig) -> None:
    for label in ("ppa", "pub", "fps", "fsa"):
        o = getattr(cfg, label)
        for f in dataclasses.fields(o):
            v = getattr(o, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                if f.name.startswith(("max_", "num_")) and v < 1:
                    raise ConfigError(f"[{label}] {f.name} must be >= 1")
    if not 0 < cfg.oracle_grid_step <= 1:
        raise ConfigError("oracle grid-step must be in (0, 1]")


def _derived_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


_SCHEME_ID = {"ppa": 1, "pub": 2, "fps": 3, "fsa": 4, "oracle": 5}


def _system_config(cfg: ExperimentConfig, pt_dbm: float,
                   cbar: float) -> SystemConfig:
    N, K = cfg.num_subcarriers, cfg.num_users
    demand = np.zeros(K)
    demand[cfg.demand_users(K)] = cbar
    return SystemConfig(
        num_users=K,
        num_subcarriers=N,
        subcarrier_power_mw=np.full(N, dbm_to_mw(pt_dbm) / N),
        noise_mw=dbm_to_mw(cfg.noise_dbm),
        conversion_efficiency=cfg.conversion_efficiency,
        secrecy_demand_bits=demand,
        rate_tolerance=cfg.rate_tolerance,
    )


def run_experiment(cfg: ExperimentConfig) -> list[AggregateRow]:
    """Run all (scheme, power, demand) points over the Monte-Carlo trials.

    Returns one aggregate row per point, sorted by (scheme, pt, cbar).
    Guard-rail errors from the oracle scheme propagate to the caller.
    """
    pts = sorted(set(cfg.pt_dbm))
    cbars_desc = sorted(set(cfg.cbar_bits), reverse=True)
    acc = {(s, pt, cb): [] for s in cfg.schemes
           for pt in pts for cb in cbars_desc}

    for trial in range(cfg.num_trials):
        ch = generate(ScenarioParams(
            num_users=cfg.num_users,
            num_subcarriers=cfg.num_subcarriers,
            ref_distance_m=cfg.ref_distance_m,
            max_distance_m=cfg.max_distance_m,
            pathloss_ref_db=cfg.pathloss_ref_db,
            pathloss_exponent=cfg.pathloss_exponent,
            rng_seed=_derived_seed(cfg.master_seed, trial),
        ))
        seeds = {s: _derived_seed(cfg.master_seed, trial, _SCHEME_ID[s])
                 for s in cfg.schemes}
        best_x = {s: {} for s in cfg.schemes}

        for i, pt in enumerate(pts):
            for j, cb in enumerate(cbars_desc):
                sys_cfg = _system_config(cfg, pt, cb)
                point_x = {}
                for scheme in RUN_ORDER:
                    if scheme not in cfg.schemes:
                        continue
                    warm = [best_x[scheme][k] for k in ((i, j - 1), (i - 1, j))
                            if k in best_x[scheme]]
                    if scheme == "ppa":
                        warm += [point_x[s] for s in ("fps", "fsa")
                                 if s in point_x]
                    elif scheme == "pub":
                        warm += [point_x[s] for s in ("ppa", "fps", "fsa")
                                 if s in point_x]
                    t0 = time.perf_counter() if cfg.timing else 0.0
                    alloc, report = _run_scheme(scheme, sys_cfg, ch, cfg,
                                                seeds.get(scheme, 0), warm)
                    wall_ms = ((time.perf_counter() - t0) * 1e3
                               if cfg.timing else 0.0)
                    if scheme != "oracle":
                        best_x[scheme][(i, j)] = alloc.assign
                        point_x[scheme] = alloc.assign
                    acc[(scheme, pt, cb)].append((
                        1.0 if report.feasible else 0.0,
                        report.objective_mw if report.feasible else 0.0,
                        report.info_power_mw if report.feasible else 0.0,
                        wall_ms,
                    ))
        log.info("trial %d/%d done", trial + 1, cfg.num_trials)

    rows = []
    for scheme in sorted(cfg.schemes):
        for pt in pts:
            for cb in sorted(cbars_desc):
                data = np.array(acc[(scheme, pt, cb)])
                rows.append(AggregateRow(
                    scheme=scheme,
                    pt_dbm=pt,
                    cbar_bits=cb,
                    trials=cfg.num_trials,
                    feasible_frac=float(data[:, 0].mean()),
                    esum_mw_mean=float(data[:, 1].mean()),
                    esum_mw_std=float(data[:, 1].std()),
                    info_power_mw_mean=float(data[:, 2].mean()),
                    wall_ms_mean=float(data[:, 3].mean()),
                ))
    return rows


def _run_scheme(scheme, sys_cfg, ch, cfg, seed, warm):
    if scheme == "ppa":
        opts = dataclasses.replace(cfg.ppa, rng_seed=seed)
        return solve_ppa(sys_cfg, ch, opts, warm_assignments=warm)
    if scheme == "pub":
        return solve_pub(sys_cfg, ch, cfg.pub, warm_assignments=warm)
    if scheme == "fps":
        return solve_fps(sys_cfg, ch, cfg.fps, warm_assignments=warm)
    if scheme == "fsa":
        opts = cfg.fsa
        if opts.assignment == "random":
            opts = dataclasses.replace(opts, rng_seed=seed)
        return solve_fsa(sys_cfg, ch, opts)
    if scheme == "oracle":
        return oracle_pa(sys_cfg, ch, grid_step=cfg.oracle_grid_step)
    raise ConfigError(f"unknown scheme {scheme!r}")


def write_csv(rows: list[AggregateRow], path: str) -> None:
    """Write the aggregate table with the fixed header; 9 significant
    digits on floats, newline-terminated lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.as_csv() + "\n")

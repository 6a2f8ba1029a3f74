"""Experiment orchestration: network drops, Doppler sweeps, CDFs and validation."""

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import se_engine
from .aging import AgingProfile, estimation_variance
from .mc_oracle import (
    ChannelMethod,
    estimate_se_smallcell_mc,
    estimate_sinr_terms,
)
from .scenario import (
    PilotPolicy,
    PowerMode,
    SimConfig,
    assign_pilots,
    dbm_to_watt,
    fpc_powers_cf,
    fpc_powers_smallcell,
    generate_scenario,
)

SPEED_OF_LIGHT = 299792458.0

CF_LSFD = "CF-LSFD"
CF_MF = "CF-MF"
SMALL_CELL = "SmallCell"
SYSTEMS = (CF_LSFD, CF_MF, SMALL_CELL)
_ENGINE_NAME = {CF_LSFD: "lsfd", CF_MF: "mf", SMALL_CELL: "smallcell"}

DEFAULT_SWEEP = (0.0, 0.0005, 0.001, 0.0015, 0.002, 0.0025, 0.003)


def velocity_to_normalized_doppler(v, f_c, T_s):
    """f_D T_s for a UE moving at ``v`` m/s with carrier ``f_c`` Hz."""
    if np.any(np.asarray(v) < 0):
        raise ValueError("velocity must be non-negative")
    return v * f_c / SPEED_OF_LIGHT * T_s


def percentile(samples, q):
    """Linearly interpolated empirical quantile of sorted ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("percentile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    pos = q * (samples.size - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, samples.size - 1)
    return float(samples[lo] + (pos - lo) * (samples[hi] - samples[lo]))


@dataclass(frozen=True)
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    n_drops: int = 200
    doppler_sweep: tuple = (0.0,)
    systems: tuple = SYSTEMS
    power_modes: tuple = (PowerMode.FULL,)
    output_path: str | None = None
    output_format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.n_drops < 1:
            raise ValueError("n_drops must be at least 1")
        sweep = tuple(float(v) for v in self.doppler_sweep)
        if any(not 0.0 <= v < 0.5 for v in sweep):
            raise ValueError("sweep values must lie in [0, 0.5)")
        object.__setattr__(self, "doppler_sweep", sweep)
        unknown = set(self.systems) - set(SYSTEMS)
        if unknown:
            raise ValueError(f"unknown systems {sorted(unknown)}")
        object.__setattr__(self, "systems", tuple(s for s in SYSTEMS if s in self.systems))
        modes = tuple(PowerMode(m) for m in self.power_modes)
        object.__setattr__(self, "power_modes", modes)
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be csv or json")


@dataclass
class CDFResult:
    """Pooled per-UE SE samples, keyed by (system, power mode, f_D T_s)."""

    samples: dict

    def keys(self):
        return list(self.samples)

    def percentile(self, key, q):
        return percentile(self.samples[key], q)

    def likely95(self, key):
        return self.percentile(key, 0.05)

    def median(self, key):
        return self.percentile(key, 0.5)

    def table(self, quantiles=(0.05, 0.5)):
        rows = []
        for (system, mode, fdts), s in self.samples.items():
            for q in quantiles:
                rows.append((system, mode, fdts, f"p{round(q * 100):02d}", percentile(s, q)))
            rows.append((system, mode, fdts, "mean", float(np.mean(s))))
        return rows


def _drop_powers(scenario, cfg, mode):
    """(cell-free powers, small-cell powers) for one power mode."""
    if PowerMode(mode) is PowerMode.FULL:
        full = np.full(cfg.K, cfg.p_max)
        return full, full
    # cell of UE k for the small-cell rule: its strongest AP
    cell = np.argmax(scenario.beta, axis=1)
    return (
        fpc_powers_cf(scenario.beta, cfg.total_power),
        fpc_powers_smallcell(scenario.beta, cell, cfg.total_power),
    )


def drop_pilots(cfg, drop):
    """Pilot assignment of one drop; seeded from the drop for the random policy."""
    seed = np.random.SeedSequence([cfg.rng_seed, drop, 1]).generate_state(1)[0]
    return assign_pilots(cfg.K, cfg.tau_p, cfg.pilot_policy, seed=int(seed))


def evaluate_drop(spec, drop, dopplers):
    """SE of every UE in one drop for each (system, mode, Doppler) combination."""
    cfg = replace(spec.base, power_mode=PowerMode.FULL)
    scenario = generate_scenario(cfg, drop)
    pilots = drop_pilots(cfg, drop)
    systems = [_ENGINE_NAME[s] for s in spec.systems]
    out = {}
    for fdts in dopplers:
        if fdts is None:
            profile = AgingProfile.from_config(cfg)
            # label with the configured value when it is shared by all UEs
            if np.isscalar(cfg.normalized_doppler):
                fdts = float(cfg.normalized_doppler)
        else:
            profile = AgingProfile.from_doppler(fdts, cfg.tau_c, cfg.K)
        for mode in spec.power_modes:
            p_cf, p_sc = _drop_powers(scenario, cfg, mode)
            stats_cf = estimation_variance(scenario.with_powers(p_cf), pilots, profile,
                                           cfg.noise_power, cfg.tau_p)
            stats_sc = None
            if "smallcell" in systems and p_sc is not p_cf:
                stats_sc = estimation_variance(scenario.with_powers(p_sc), pilots, profile,
                                               cfg.noise_power, cfg.tau_p)
            report = se_engine.evaluate(stats_cf, profile, p_cf, systems,
                                        smallcell_stats=stats_sc, smallcell_powers=p_sc)
            values = {CF_LSFD: report.se_lsfd, CF_MF: report.se_mf,
                      SMALL_CELL: report.se_smallcell}
            for system in spec.systems:
                out[(system, mode.value, fdts)] = values[system]
    return out


def _run(spec, dopplers):
    drops = range(spec.n_drops)
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            per_drop = list(pool.map(evaluate_drop, [spec] * spec.n_drops, drops,
                                     [dopplers] * spec.n_drops))
    else:
        per_drop = [evaluate_drop(spec, d, dopplers) for d in drops]
    # merge in drop order so output is independent of the worker count
    samples = {}
    for key in per_drop[0]:
        samples[key] = np.sort(np.concatenate([r[key] for r in per_drop]))
    return CDFResult(samples)


def _check_writable(path):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write results to {path}")


def run_drops(spec: ExperimentSpec) -> CDFResult:
    """SE samples of all UEs over ``spec.n_drops`` drops at the configured Doppler.

    Keys carry the configured f_D T_s, or ``None`` when it differs per UE.
    """
    _check_writable(spec.output_path)
    result = _run(spec, [None])
    if spec.output_path:
        write_results(result, spec.output_path, spec.output_format)
    return result


def sweep_doppler(spec: ExperimentSpec):
    """95%-likely SE for every sweep point, reusing the same drops at each point.

    Returns ``(rows, result)``: rows of (f_D T_s, system, power mode, SE)
    and the full :class:`CDFResult`.
    """
    _check_writable(spec.output_path)
    result = _run(spec, list(spec.doppler_sweep))
    rows = [(fdts, system, mode, result.likely95((system, mode, fdts)))
            for (system, mode, fdts) in result.keys()]
    rows.sort(key=lambda r: (r[0], SYSTEMS.index(r[1]), r[2]))
    if spec.output_path:
        write_results(result, spec.output_path, spec.output_format)
    return rows, result


def _fmt(x):
    return "" if x is None else repr(float(x))


def _samples_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".samples" + path.suffix)


def write_results(result: CDFResult, path, fmt="csv"):
    """Summary table at ``path`` plus raw sorted samples next to it."""
    rows = result.table()
    if fmt == "json":
        doc = {
            "summary": [
                {"system": s, "power_mode": m, "fdts": f, "metric": k, "value": v}
                for s, m, f, k, v in rows
            ],
            "samples": [
                {"system": s, "power_mode": m, "fdts": f, "values": [float(x) for x in vals]}
                for (s, m, f), vals in result.samples.items()
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["system", "power_mode", "fdts", "metric", "value"])
    for s, m, f, k, v in rows:
        writer.writerow([s, m, _fmt(f), k, _fmt(v)])
    Path(path).write_text(buf.getvalue())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["system", "power_mode", "fdts", "sample"])
    for (s, m, f), vals in result.samples.items():
        for v in vals:
            writer.writerow([s, m, _fmt(f), _fmt(v)])
    _samples_path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------- validation

def desk_config(normalized_doppler=0.0, K=4, **overrides):
    """Small network used to check the closed forms against Monte Carlo."""
    params = dict(L=10, K=K, tau_c=20, tau_p=2, area_side=200.0,
                  normalized_doppler=normalized_doppler, rng_seed=0)
    params.update(overrides)
    return SimConfig(**params)


@dataclass
class ValidationReport:
    """Relative errors between closed forms and Monte Carlo estimates."""

    rows: list = field(default_factory=list)
    tolerance: float = 0.02

    def add(self, quantity, closed, mc, stderr=float("nan"), **where):
        if closed == 0.0 and mc == 0.0:
            rel = 0.0
        elif closed == 0.0:
            rel = float("inf")
        else:
            rel = abs(mc / closed - 1.0)
        self.rows.append(dict(quantity=quantity, closed=float(closed), mc=float(mc),
                              rel_err=rel, stderr=float(stderr), **where))

    @property
    def failures(self):
        return [r for r in self.rows if not r["rel_err"] <= self.tolerance]

    @property
    def passed(self):
        return not self.failures

    def max_error(self, quantity=None):
        errs = [r["rel_err"] for r in self.rows if quantity in (None, r["quantity"])]
        return max(errs) if errs else 0.0

    def summary(self):
        lines = []
        for q in sorted({r["quantity"] for r in self.rows}):
            rows = [r for r in self.rows if r["quantity"] == q]
            bad = sum(not r["rel_err"] <= self.tolerance for r in rows)
            lines.append(f"{q:>14}: {len(rows):4d} checks, max rel err "
                         f"{self.max_error(q):.4f}, {bad} over {self.tolerance:.0%}")
        return "\n".join(lines)


_TERMS = ("ds", "bu", "ca", "ns")


def validate(cfg: SimConfig, n_blocks=100_000, seed=2024, drop=0, tolerance=0.02,
             gamma_corruption=None, method=ChannelMethod.ANCHORED,
             combining=("lsfd", "mf"), smallcell=True):
    """Compare closed-form SINR terms, SEs and small-cell SEs with Monte Carlo.

    ``gamma_corruption`` scales the closed-form estimate variances only;
    it exists to check that the comparison can fail.
    """
    scenario = generate_scenario(cfg, drop)
    pilots = drop_pilots(cfg, drop)
    profile = AgingProfile.from_config(cfg)
    p = scenario.powers
    stats = estimation_variance(scenario, pilots, profile, cfg.noise_power, cfg.tau_p)
    closed = stats if gamma_corruption is None else stats.with_gamma(stats.gamma * gamma_corruption)
    instants = se_engine.data_instants(stats, profile)
    report = ValidationReport(tolerance=tolerance)
    fdts = cfg.normalized_doppler

    for mode in combining:
        if mode == "lsfd":
            W = np.stack([[se_engine.lsfd_weights(k, n, closed, profile, p).a
                           for n in instants] for k in range(cfg.K)])
        else:
            W = np.full((cfg.K, instants.size, cfg.L), 1.0 / cfg.L)
        est = estimate_sinr_terms(scenario, pilots, profile, W, instants, n_blocks, seed,
                                  noise_power=cfg.noise_power, tau_p=cfg.tau_p, method=method)
        sinr_mc = est.sinr()
        for k in range(cfg.K):
            for j, n in enumerate(instants):
                cf = se_engine.sinr_terms_cf(k, n, W[k, j], closed, profile, p)
                for name in _TERMS:
                    report.add(name, cf[name], getattr(est, name)[k, j],
                               est.stderr.get(name, np.full_like(est.ds, np.nan))[k, j],
                               combining=mode, ue=k, instant=int(n), fdts=fdts)
                for i in range(cfg.K):
                    if i != k:
                        report.add("ui", cf["ui"][i], est.ui[k, i, j], est.stderr["ui"][k, i, j],
                                   combining=mode, ue=k, interferer=i, instant=int(n), fdts=fdts)
            sinr_cf = np.array([se_engine.sinr_cf(k, n, W[k, j], closed, profile, p)
                                for j, n in enumerate(instants)])
            report.add(f"se_{mode}", se_engine.se_from_sinr(sinr_cf, cfg.tau_c),
                       se_engine.se_from_sinr(sinr_mc[k], cfg.tau_c),
                       combining=mode, ue=k, fdts=fdts)

    if smallcell:
        for k in range(cfg.K):
            l, se = se_engine.select_best_ap(k, closed, profile, p)
            mc = estimate_se_smallcell_mc(k, l, scenario, pilots, profile, n_blocks, seed + 1,
                                          noise_power=cfg.noise_power, tau_p=cfg.tau_p,
                                          method=method)
            report.add("se_smallcell", se, mc, ue=k, ap=l, fdts=fdts,
                       contaminators=len(pilots.contaminators(k)))
    return report


# ------------------------------------------------------------------- config

def _get(d, *keys, default=None):
    for key in keys:
        if not isinstance(d, dict) or key not in d:
            return default
        d = d[key]
    return d


def config_from_dict(doc) -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from the nested config mapping.

    Physical quantities carry their unit in the key name and are converted
    to SI here.  Missing keys fall back to the defaults of
    :class:`SimConfig` / :class:`ExperimentSpec`.
    """
    doc = doc or {}
    base = {}
    net = doc.get("network", {})
    radio = doc.get("radio", {})
    frame = doc.get("frame", {})
    power = doc.get("power", {})
    mob = doc.get("mobility", {})
    exp = doc.get("experiment", {})

    simple = {"num_aps": "L", "num_ues": "K", "area_side_m": "area_side",
              "shadowing": "shadowing", "shadow_std_db": "shadow_std_db",
              "ap_height_m": "ap_height", "ue_height_m": "ue_height"}
    for key, name in simple.items():
        if key in net:
            base[name] = net[key]
    if "carrier_freq_ghz" in radio:
        base["carrier_freq"] = radio["carrier_freq_ghz"] * 1e9
    if "bandwidth_mhz" in radio:
        base["bandwidth"] = radio["bandwidth_mhz"] * 1e6
    if "noise_power_dbm" in radio:
        base["noise_power"] = float(dbm_to_watt(radio["noise_power_dbm"]))
    if "sample_time_us" in radio:
        base["sample_time"] = radio["sample_time_us"] / 1e6
    for key in ("tau_c", "tau_p"):
        if key in frame:
            base[key] = int(frame[key])
    if "p_max_dbm" in power:
        base["p_max"] = float(dbm_to_watt(power["p_max_dbm"]))
    if power.get("p_sum_dbm") is not None:
        base["p_sum"] = float(dbm_to_watt(power["p_sum_dbm"]))
    if "mode" in power:
        base["power_mode"] = PowerMode(power["mode"])
    if "policy" in doc.get("pilots", {}):
        base["pilot_policy"] = PilotPolicy(doc["pilots"]["policy"])
    if "seed" in exp:
        base["rng_seed"] = int(exp["seed"])

    if "normalized_doppler" in mob:
        fd = mob["normalized_doppler"]
        base["normalized_doppler"] = tuple(fd) if isinstance(fd, list) else float(fd)
    elif "velocity_kmh" in mob:
        fc = base.get("carrier_freq", SimConfig.carrier_freq)
        ts = base.get("sample_time", SimConfig.sample_time)
        v = np.asarray(mob["velocity_kmh"], dtype=float) / 3.6
        fd = velocity_to_normalized_doppler(v, fc, ts)
        base["normalized_doppler"] = tuple(fd.tolist()) if fd.ndim else float(fd)

    cfg = SimConfig(**base)
    kwargs = {"base": cfg}
    if "n_drops" in exp:
        kwargs["n_drops"] = int(exp["n_drops"])
    if "doppler_sweep" in exp:
        kwargs["doppler_sweep"] = tuple(exp["doppler_sweep"])
    if "systems" in exp:
        kwargs["systems"] = tuple(exp["systems"])
    if "power_modes" in exp:
        kwargs["power_modes"] = tuple(exp["power_modes"])
    elif "mode" in power:
        kwargs["power_modes"] = (power["mode"],)
    if "output_path" in exp:
        kwargs["output_path"] = exp["output_path"]
    if "output_format" in exp:
        kwargs["output_format"] = exp["output_format"]
    if "workers" in exp:
        kwargs["workers"] = int(exp["workers"])
    return ExperimentSpec(**kwargs)


def load_config(path) -> ExperimentSpec:
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))

"""Orchestration behind the command line: one function per subcommand.

Every subcommand writes its artifacts below ``config.output_dir`` and returns
a :class:`RunOutcome` whose ``status`` is the process exit code.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import inequalities as ineq
from .config import ConfigError, RunConfig, serialize
from .nonlinear import SimulationConfig, simulate
from .params import admissible_range, hartree_threshold, p_crit, SubcriticalDimensionError
from .propagator import PROFILES, DecayRecord, fit_decay_exponent, linear_decay_curve
from .spectral import Grid, write_snapshot

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_GROWTH = 3
EXIT_RESOLUTION = 4
EXIT_NUMERIC = 5

# amplitude of the Riesz symbol exponent in the power-limit control run
CONTROL_ALPHA = 1e-8


class RunError(RuntimeError):
    """I/O failure, always naming the offending path."""


@dataclass
class RunOutcome:
    status: int
    verdict: str
    summary: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class _Writer:
    """Creates the output directory and records each artifact written."""

    def __init__(self, outdir):
        self.outdir = outdir
        self.paths = []
        try:
            os.makedirs(outdir, exist_ok=True)
        except OSError as exc:
            raise RunError(f"{outdir}: cannot create output directory ({exc.strerror})") from None

    def path(self, name):
        p = os.path.join(self.outdir, name)
        self.paths.append(p)
        return p

    def csv(self, name, header, rows):
        p = self.path(name)
        try:
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([_fmt(v) for v in row])
        except OSError as exc:
            raise RunError(f"{p}: {exc.strerror}") from None
        return p

    def text(self, name, lines):
        p = self.path(name)
        try:
            with open(p, "w") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise RunError(f"{p}: {exc.strerror}") from None
        return p

    def call(self, name, func):
        p = self.path(name)
        try:
            func(p)
        except OSError as exc:
            raise RunError(f"{p}: {exc.strerror}") from None
        return p


def _kv(key, value):
    return f"{key} = {_fmt(value)}"


# --- region -----------------------------------------------------------------------


def run_region(cfg: RunConfig) -> RunOutcome:
    params = cfg.params()
    rep = admissible_range(params)
    lines = [
        str(rep),
        _kv("interval", rep.interval()),
        _kv("semicritical_threshold", rep.semicritical),
        _kv("band_lower", rep.band_lower),
        _kv("band_upper", rep.upper),
        _kv("dimension_cap", rep.dimension_cap),
        _kv("dimension_ok", rep.dimension_ok),
        _kv("binding_constraints", ",".join(rep.binding_constraints)),
        _kv("p_plus_q", params.power),
        _kv("contains_p_plus_q", rep.contains(params.power)),
    ]
    try:
        lines.insert(3, _kv("p_crit", p_crit(params.n, params.m, params.sigma)))
    except SubcriticalDimensionError as exc:
        lines.insert(3, _kv("p_crit", f"undefined ({exc})"))
    out = _Writer(cfg.output_dir)
    out.text("region_report.txt", lines)
    return RunOutcome(EXIT_OK, "report-complete", [lines[0]], out.paths)


# --- linear decay -----------------------------------------------------------------


FIT_HEADER = ["quantity", "fitted_slope", "predicted_slope", "fit_rms_residual", "window_lo", "window_hi"]


def _fit_rows(record: DecayRecord, window):
    rows = []
    for quantity, predicted in (("l2", record.predicted_l2_exp), ("energy", record.predicted_energy_exp)):
        slope = fit_decay_exponent(record, window, quantity)
        rows.append([quantity, slope, predicted, record.fit_residuals[quantity], float(window[0]), float(window[1])])
    return rows


def run_linear_decay(cfg: RunConfig) -> RunOutcome:
    params = cfg.params()
    if cfg.profile not in PROFILES:
        raise ConfigError([f"data.profile must be one of {tuple(PROFILES)} for linear-decay, got {cfg.profile!r}"])
    times = np.geomspace(cfg.t_min, cfg.t_max, cfg.samples)
    record = linear_decay_curve(cfg.profile, params.n, params.sigma, times, m=params.m)
    out = _Writer(cfg.output_dir)
    out.call("decay.csv", record.to_csv)
    window = (cfg.fit_min, cfg.fit_max)
    rows = _fit_rows(record, window)
    out.csv("decay_fit.csv", FIT_HEADER, rows)
    summary = [f"{r[0]} slope {_fmt(r[1])} (predicted {_fmt(r[2])})" for r in rows]
    return RunOutcome(EXIT_OK, "report-complete", summary, out.paths)


def run_fit(cfg: RunConfig) -> RunOutcome:
    try:
        record = DecayRecord.from_csv(cfg.fit_input)
    except OSError as exc:
        raise RunError(f"{cfg.fit_input}: {exc.strerror}") from None
    except (KeyError, ValueError) as exc:
        raise RunError(f"{cfg.fit_input}: malformed decay CSV ({exc})") from None
    rows = _fit_rows(record, (cfg.fit_min, cfg.fit_max))
    out = _Writer(cfg.output_dir)
    out.csv("decay_fit.csv", FIT_HEADER, rows)
    summary = [f"{r[0]} slope {_fmt(r[1])} (predicted {_fmt(r[2])})" for r in rows]
    return RunOutcome(EXIT_OK, "report-complete", summary, out.paths)


# --- simulations -----------------------------------------------------------------


TRAJECTORY_HEADER = ["time", "l2_norm", "energy_norm", "weighted_l2", "weighted_energy", "x_norm"]


def simulation_config(cfg: RunConfig, **changes) -> SimulationConfig:
    params = cfg.params()
    base = dict(
        params=params,
        grid=cfg.grid(),
        kind=cfg.kind,
        profile=cfg.profile,
        epsilon=cfg.epsilon,
        horizon=cfg.horizon,
        dt=cfg.dt,
        adaptive=cfg.adaptive,
        tolerance=cfg.tolerance,
        zero_mode=cfg.zero_mode,
        seed=cfg.seed,
        split_time=cfg.split_time,
        checkpoint_times=cfg.checkpoints,
    )
    base.update(changes)
    return SimulationConfig(**base)


def _status(verdict, warnings, strict):
    if verdict == "growth":
        return EXIT_GROWTH
    if verdict == "numeric-failure":
        return EXIT_NUMERIC
    if strict and warnings:
        return EXIT_RESOLUTION
    return EXIT_OK


def _trajectory_rows(result):
    tr = result.trace
    return [list(r) + [x] for r, x in zip(tr.rows(), tr.x_norm)]


def _simulation_lines(result, prefix=""):
    cfg = result.config
    lines = [
        _kv(prefix + "kind", cfg.kind),
        _kv(prefix + "verdict", result.verdict),
        _kv(prefix + "boundedness_ratio", result.boundedness_ratio),
        _kv(prefix + "x_sup", result.x_sup),
        _kv(prefix + "weighted_l2_sup", result.decay_ratio_l2),
        _kv(prefix + "weighted_energy_sup", result.decay_ratio_energy),
        _kv(prefix + "final_time", result.final.time),
        _kv(prefix + "steps", result.steps),
        _kv(prefix + "rejected_steps", result.rejected_steps),
    ]
    lines += [_kv(prefix + "warning", w) for w in result.warnings]
    return lines


def run_simulate(cfg: RunConfig) -> RunOutcome:
    result = simulate(simulation_config(cfg))
    out = _Writer(cfg.output_dir)
    out.csv("trajectory.csv", TRAJECTORY_HEADER, _trajectory_rows(result))
    for i, state in enumerate(result.checkpoints):
        out.call(f"checkpoint_{i:03d}_u.sgvf", lambda p, s=state: write_snapshot(p, s.u, s.time))
        out.call(f"checkpoint_{i:03d}_ut.sgvf", lambda p, s=state: write_snapshot(p, s.ut, s.time))
    lines = _simulation_lines(result)
    out.text("run_report.txt", ["[config]", serialize(cfg).rstrip("\n"), "", "[result]"] + lines)
    status = _status(result.verdict, result.warnings, cfg.strict)
    summary = [f"verdict {result.verdict}, late/early sup ratio {_fmt(result.boundedness_ratio)}"]
    summary += [f"warning: {w}" for w in result.warnings]
    return RunOutcome(status, result.verdict, summary, out.paths)


def coincidence_summary(verdict_a, verdict_b) -> str:
    if verdict_a == verdict_b:
        return f"both {verdict_a}"
    return "split"


def _trace_mismatch(a, b):
    """max relative difference of two l2 traces sampled at identical times."""
    ta, tb = np.asarray(a.trace.times), np.asarray(b.trace.times)
    if ta.shape != tb.shape or np.any(ta != tb):
        return math.inf
    la, lb = np.asarray(a.trace.l2), np.asarray(b.trace.l2)
    scale = max(float(np.max(np.abs(lb))), np.finfo(float).tiny)
    return float(np.max(np.abs(la - lb)) / scale)


def compare_nonlinearities(cfg: RunConfig) -> RunOutcome:
    """Modified against Hartree with everything else shared, plus an optional power-limit control."""
    results = {kind: simulate(simulation_config(cfg, kind=kind)) for kind in ("modified", "hartree")}
    summary_text = coincidence_summary(results["modified"].verdict, results["hartree"].verdict)

    out = _Writer(cfg.output_dir)
    rows = []
    for kind, res in results.items():
        rows += [[kind] + r for r in _trajectory_rows(res)]
    out.csv("compare.csv", ["kind"] + TRAJECTORY_HEADER, rows)

    lines = ["[config]", serialize(cfg).rstrip("\n"), "", "[result]", _kv("coincidence", summary_text)]
    for kind, res in results.items():
        lines += _simulation_lines(res, prefix=f"{kind}.")

    if cfg.power_control:
        ctrl_params = cfg.replace(alpha=CONTROL_ALPHA).params()
        ctrl = {
            kind: simulate(simulation_config(cfg, params=ctrl_params, kind=kind, zero_mode="retain", adaptive=False))
            for kind in ("modified", "hartree", "power")
        }
        rows = []
        for kind, res in ctrl.items():
            rows += [[kind] + r for r in _trajectory_rows(res)]
        out.csv("power_control.csv", ["kind"] + TRAJECTORY_HEADER, rows)
        lines += [
            _kv("control.alpha", CONTROL_ALPHA),
            _kv("control.modified_vs_power", _trace_mismatch(ctrl["modified"], ctrl["power"])),
            _kv("control.hartree_vs_power", _trace_mismatch(ctrl["hartree"], ctrl["power"])),
        ]
    out.text("compare_report.txt", lines)

    warnings = results["modified"].warnings + results["hartree"].warnings
    statuses = [_status(r.verdict, r.warnings, cfg.strict) for r in results.values()]
    status = max(statuses, key=lambda s: (s != EXIT_OK, s))
    summary = [summary_text] + [f"{k}: {r.verdict}" for k, r in results.items()]
    summary += [f"warning: {w}" for w in warnings]
    return RunOutcome(status, summary_text, summary, out.paths)


# --- inequalities -----------------------------------------------------------------


def run_check_inequalities(cfg: RunConfig) -> RunOutcome:
    params = cfg.params()
    n = int(params.n)
    grid = ineq.balanced_grid(n, cfg.N, cfg.extent) if cfg.extent is not None else Grid(n, cfg.N, cfg.L)
    try:
        r_rel = ineq.hls_target_exponent(cfg.hls_q, params.alpha, n)
    except ValueError as exc:
        raise ConfigError([f"inequalities.hls_q: {exc}"]) from None
    r_ctrl = cfg.hls_control_r if cfg.hls_control_r is not None else 2.0 * r_rel

    hls_family = ineq.make_family(cfg.hls_family, seed=cfg.seed)
    gn_family = ineq.make_family(cfg.gn_family, seed=cfg.seed)
    reports = [
        ineq.hls_check(cfg.hls_q, params.alpha, hls_family, grid),
        ineq.hls_check(cfg.hls_q, params.alpha, hls_family, grid, r=r_ctrl),
    ]
    try:
        reports.append(ineq.gn_check(cfg.gn_q, params.sigma, gn_family, grid))
    except ValueError as exc:
        raise ConfigError([f"inequalities.gn_q: {exc}"]) from None
    for a in cfg.lattice:
        for b in cfg.lattice:
            if max(a, b) > 1:
                reports.append(ineq.duhamel_integral_check(a, b))

    out = _Writer(cfg.output_dir)
    out.call("inequalities.csv", lambda p: ineq.write_reports_csv(p, reports))
    out.text("inequalities_report.txt", [rep.to_text() for rep in reports])
    failed = [rep for rep in reports if rep.verdict in ("fail", "unbounded")]
    summary = [f"{rep.name} {_fmt_params(rep)}: {rep.verdict}" for rep in reports]
    verdict = "report-complete" if not failed else f"report-complete ({len(failed)} failed)"
    return RunOutcome(EXIT_OK, verdict, summary, out.paths)


def _fmt_params(rep):
    keys = [k for k in ("q", "r", "a", "b") if k in rep.parameters]
    return " ".join(f"{k}={rep.parameters[k]:g}" for k in keys)


DISPATCH = {
    "region": run_region,
    "linear-decay": run_linear_decay,
    "fit": run_fit,
    "simulate": run_simulate,
    "compare": compare_nonlinearities,
    "check-inequalities": run_check_inequalities,
}


def run(cfg: RunConfig) -> RunOutcome:
    """Dispatch ``cfg.command``; exceptions other than config and I/O errors propagate."""
    return DISPATCH[cfg.command](cfg)

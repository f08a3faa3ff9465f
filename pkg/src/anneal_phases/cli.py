"""Command-line front end.

Subcommands
-----------
lz-work        excess work of the LZ model on a grid of durations
ti-work        excess work of the TI chain on a grid of durations
crossover      crossover durations (text on stdout plus a JSON copy)
phase-diagram  regime labels on an (N, tau) grid plus boundary curves
sweep          ti-work over a list of (N, Delta/J) pairs with a manifest

All tables are CSV with ``#``-prefixed metadata lines. Floats are written
as ``%.16e`` (17 significant digits) so identical runs give identical
bytes. Files are written to a temporary name and renamed into place.

The output directory is, in order of precedence, ``--outdir``, the
``ANNEAL_PHASES_OUTDIR`` environment variable, the ``outdir`` config key,
and the current directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 output failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import __version__, approx, crossover, dynamics, models
from .errors import AnnealError, ConfigError, NumericError, OutputError
from .models import LINEAR_HALF, LINEAR_SYMMETRIC, TABULATED, ModelParams, Protocol

log = logging.getLogger("anneal_phases")

OUTDIR_ENV = "ANNEAL_PHASES_OUTDIR"
FLOAT_FORMAT = "%.16e"

LZ_CURVES = ("exact", "lzf", "apt", "hlz")
TI_CURVES = ("exact", "kzm", "lzf-mode", "apt", "apt-discrete", "lrt", "exact-integral")
_DEFAULT_CURVES = {
    ("lz", LINEAR_SYMMETRIC): ("exact", "lzf", "apt"),
    ("lz", LINEAR_HALF): ("exact", "lzf", "apt", "hlz"),
    ("ti", LINEAR_SYMMETRIC): ("exact", "kzm", "lzf-mode", "apt", "lrt"),
    ("ti", LINEAR_HALF): ("exact", "kzm", "apt", "lrt"),
    ("ti", TABULATED): ("exact", "kzm", "lzf-mode", "apt"),
}
_ALLOWED_CURVES = {
    ("lz", LINEAR_SYMMETRIC): ("exact", "lzf", "apt"),
    ("lz", LINEAR_HALF): LZ_CURVES,
    ("ti", LINEAR_SYMMETRIC): TI_CURVES,
    ("ti", LINEAR_HALF): ("exact", "kzm", "apt", "apt-discrete", "lrt"),
    ("ti", TABULATED): ("exact", "kzm", "lzf-mode", "apt"),
}


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Every knob of a run. Serialized as JSON; see :meth:`to_json`.

    ``tau_units="scaled"`` means the grid is given in ``J^2 tau/Delta`` (LZ)
    or ``(pi/N)^2 J^2 tau/Delta`` (TI); ``"raw"`` means plain durations. An
    empty ``curves`` list selects the defaults for the model and protocol.
    """

    model: str = "ti"
    J: float = 1.0
    delta_over_j: float = 1.0
    n_spins: Optional[int] = 100
    protocol: str = LINEAR_SYMMETRIC
    lambda_i: Optional[float] = None
    lambda_f: Optional[float] = None
    schedule: Optional[str] = None
    tau_min: float = 0.01
    tau_max: float = 30.0
    tau_count: int = 60
    tau_units: str = "scaled"
    curves: List[str] = field(default_factory=list)
    phase_mode: str = approx.AVERAGED
    lrt_variant: str = approx.LRT_PRINTED
    max_phase_step: float = 0.02
    drift_budget: float = 2e-11
    min_steps: int = 100
    norm_drift_tol: float = 1e-10
    n_steps: Optional[int] = None
    method: str = crossover.NUMERIC_ROOT
    n_min: int = 10
    n_max: int = 1000
    n_count: int = 12
    pairs: List[Tuple[int, float]] = field(default_factory=list)
    outdir: Optional[str] = None
    output: Optional[str] = None
    n_jobs: int = 1

    # fields that do not influence any number in the output
    NON_PHYSICAL = ("outdir", "output", "n_jobs")

    def __post_init__(self):
        self.curves = list(self.curves)
        self.pairs = [(int(n), float(d)) for n, d in self.pairs]

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["pairs"] = [list(p) for p in self.pairs]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    # -- derived objects --------------------------------------------------

    def validate(self, command: str) -> None:
        if self.model not in ("lz", "ti"):
            raise ConfigError(f"model must be 'lz' or 'ti', got {self.model!r}")
        if self.protocol not in models.SHAPES:
            raise ConfigError(f"protocol must be one of {models.SHAPES}")
        if self.protocol == TABULATED and self.schedule is None:
            raise ConfigError("a tabulated protocol needs --schedule")
        if self.model == "lz" and self.protocol == TABULATED:
            raise ConfigError("the LZ model supports linear protocols only")
        if self.tau_count < 1:
            raise ConfigError("tau_count must be >= 1")
        if not (0 < self.tau_min <= self.tau_max and math.isfinite(self.tau_max)):
            raise ConfigError("need 0 < tau_min <= tau_max")
        if self.tau_count > 1 and self.tau_min == self.tau_max:
            raise ConfigError("tau_min == tau_max needs tau_count == 1")
        if self.tau_units not in ("scaled", "raw"):
            raise ConfigError("tau_units must be 'scaled' or 'raw'")
        if self.phase_mode not in approx.PHASE_MODES:
            raise ConfigError(f"phase_mode must be one of {approx.PHASE_MODES}")
        if self.lrt_variant not in (approx.LRT_PRINTED, approx.LRT_RELAXATION):
            raise ConfigError("lrt_variant must be 'printed' or 'relaxation'")
        if self.method not in crossover.METHODS:
            raise ConfigError(f"method must be one of {crossover.METHODS}")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")
        if command in ("lz-work", "ti-work"):
            key = (self.model, self.protocol)
            allowed = _ALLOWED_CURVES[key]
            bad = [c for c in self.curves if c not in allowed]
            if bad:
                raise ConfigError(f"curves {bad} are not available for model={self.model}, "
                                  f"protocol={self.protocol}; choose from {list(allowed)}")
        self.params()
        self.integrator()
        if self.protocol != TABULATED:
            self.make_protocol(1.0)

    def params(self, n_spins=None, delta_over_j=None) -> ModelParams:
        dj = self.delta_over_j if delta_over_j is None else delta_over_j
        n = self.n_spins if n_spins is None else n_spins
        try:
            return ModelParams(J=self.J, Delta=dj * self.J, N=n if self.model == "ti" else None)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def integrator(self) -> dynamics.IntegratorSpec:
        try:
            return dynamics.IntegratorSpec(
                max_phase_step=self.max_phase_step, drift_budget=self.drift_budget,
                min_steps=self.min_steps, norm_drift_tol=self.norm_drift_tol,
                n_steps=self.n_steps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def make_protocol(self, tau: float) -> Protocol:
        try:
            if self.protocol == TABULATED:
                s, fld, cpl = read_schedule(self.schedule)
                return Protocol.tabulated(tau, s, fld, cpl)
            return Protocol(tau=tau, shape=self.protocol, lambda_i=self.lambda_i,
                            lambda_f=self.lambda_f)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def curve_list(self) -> Tuple[str, ...]:
        return tuple(self.curves) if self.curves else _DEFAULT_CURVES[(self.model, self.protocol)]

    def metadata(self) -> dict:
        d = self.to_dict()
        for key in self.NON_PHYSICAL:
            d.pop(key)
        return d


def read_schedule(path: str):
    """Read a ``s, field, coupling`` table (CSV, ``#`` comments, optional header)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.lstrip().startswith("#"))
                    if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read schedule {path!r}: {exc}") from exc
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r[:3]] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"schedule {path!r} has non-numeric entries") from exc
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise ConfigError(f"schedule {path!r} needs >= 2 rows of s, field, coupling")
    return data[:, 0], data[:, 1], data[:, 2]


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def resolve_outdir(cli_outdir: Optional[str], config: RunConfig) -> str:
    return cli_outdir or os.environ.get(OUTDIR_ENV) or config.outdir or "."


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return FLOAT_FORMAT % float(value)


def render_csv(columns, rows, meta: dict, command: str) -> str:
    buf = io.StringIO()
    buf.write(f"# anneal_phases {__version__}\n")
    buf.write(f"# command: {command}\n")
    for key in sorted(meta):
        buf.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_format(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".part", dir=directory)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path!r}: {exc}") from exc


# --------------------------------------------------------------------------
# Grids
# --------------------------------------------------------------------------

def tau_grid(config: RunConfig, params: ModelParams, protocol: Protocol = None):
    """Raw and scaled durations of the configured log-spaced grid."""
    grid = np.geomspace(config.tau_min, config.tau_max, config.tau_count)
    if config.model == "lz":
        to_raw, to_scaled = params.tau_from_lz_scaled, params.lz_scaled_time
    elif protocol is not None and not protocol.is_linear:
        sc = crossover.schedule_crossing(protocol)
        unit = (params.N / math.pi) ** 2 * sc.delta_eff / sc.j_eff**2
        to_raw, to_scaled = (lambda x: np.asarray(x) * unit), (lambda t: np.asarray(t) / unit)
    else:
        to_raw, to_scaled = params.tau_from_ti_scaled, params.ti_scaled_time
    if config.tau_units == "scaled":
        return np.asarray(to_raw(grid), dtype=float), grid
    return grid, np.asarray(to_scaled(grid), dtype=float)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def lz_work_table(config: RunConfig):
    """Columns and rows of the LZ work table."""
    params = config.params()
    spec = config.integrator()
    curves = config.curve_list()
    avg = config.phase_mode == approx.AVERAGED
    proto0 = config.make_protocol(1.0)
    taus, scaled = tau_grid(config, params)
    e2 = 2.0 * float(models.lz_energy(params, proto0.lambda_f))
    cols = ["tau", "J2tau_over_Delta"]
    if "exact" in curves:
        cols += ["W_exact"] + (["W_exact_avg"] if avg else [])
    if "lzf" in curves:
        cols.append("W_lzf")
    if "apt" in curves:
        cols += ["W_apt_avg", "W_apt_full"]
    if "hlz" in curves:
        cols.append("W_hlz")
    if "exact" in curves:
        cols += ["p_exact", "norm_drift"]
    rows = []
    for tau, sc in zip(taus, scaled):
        proto = proto0.with_tau(float(tau))
        row = [tau, sc]
        if "exact" in curves:
            res = dynamics.evolve_lz(params, proto, spec, phase_average=avg)
            p_raw = res.p_samples[0] if avg else res.p_excite
            row.append(e2 * p_raw)
            if avg:
                row.append(e2 * res.p_excite)
        if "lzf" in curves:
            row.append(e2 * approx.lzf_probability(params, tau, proto.delta_lambda))
        if "apt" in curves:
            row.append(e2 * approx.apt_lz_probability(params, proto, tau, approx.AVERAGED))
            row.append(e2 * approx.apt_lz_probability(params, proto, tau, approx.FULL))
        if "hlz" in curves:
            row.append(e2 * approx.hlz_probability(params, tau, proto.lambda_i))
        if "exact" in curves:
            row += [p_raw, res.norm_drift]
        rows.append(row)
        log.info("lz-work tau=%.6g done", tau)
    return cols, rows


def ti_work_table(config: RunConfig, params: Optional[ModelParams] = None):
    """Columns and rows of the TI work table."""
    params = params or config.params()
    spec = config.integrator()
    curves = config.curve_list()
    avg = config.phase_mode == approx.AVERAGED
    proto0 = config.make_protocol(1.0)
    N = params.require_chain()
    half = config.protocol == LINEAR_HALF
    taus, scaled = tau_grid(config, params, proto0)
    sched = None
    if not proto0.is_linear:
        sched = crossover.schedule_work_curves(params, proto0, N)

    cols = ["tau", "scaled_tau"]
    if "exact" in curves:
        cols += ["W_exact"] + (["W_exact_avg"] if avg else [])
    if "kzm" in curves:
        cols.append("W_kzm")
    if "lzf-mode" in curves:
        cols.append("W_lzf_mode")
    if "apt" in curves:
        cols.append("W_apt")
    if "apt-discrete" in curves:
        cols.append("W_apt_discrete")
    if "lrt" in curves:
        cols.append("W_lrt")
    if "exact-integral" in curves:
        cols.append("W_exact_integral")
    if "exact" in curves:
        cols += ["norm_drift", "max_steps"]

    rows = []
    for tau, sc in zip(taus, scaled):
        tau = float(tau)
        proto = proto0.with_tau(tau)
        row = [tau, sc]
        if "exact" in curves:
            t0 = time.perf_counter()
            res = dynamics.chain_probabilities(params, proto, spec, config.n_jobs, avg)
            row.append(res.work(False))
            if avg:
                row.append(res.work(True))
            log.info("ti-work N=%d tau=%.6g exact in %.2fs", N, tau, time.perf_counter() - t0)
        if "kzm" in curves:
            if sched is not None:
                row.append(float(sched[0](tau)))
            elif half:
                row.append(approx.kzm_half_work(params, tau, N))
            else:
                row.append(approx.kzm_work(params, proto, tau, N))
        if "lzf-mode" in curves:
            row.append(float(sched[1](tau)) if sched is not None
                       else approx.lzf_lowest_mode_work(params, proto, tau, N))
        if "apt" in curves:
            if sched is not None:
                row.append(float(sched[2](tau)))
            elif half:
                row.append(approx.apt_half_work(params, tau, N))
            else:
                row.append(approx.apt_ti_work(params, proto, tau, N))
        if "apt-discrete" in curves:
            row.append(approx.apt_ti_work(params, proto, tau, N, approx.DISCRETE,
                                          config.phase_mode))
        if "lrt" in curves:
            row.append(approx.lrt_work(params, proto, tau, N, config.lrt_variant,
                                       config.phase_mode))
        if "exact-integral" in curves:
            row.append(approx.exact_integral_work(params, proto, tau, N))
        if "exact" in curves:
            row += [float(res.norm_drift.max()), int(res.steps.max())]
        rows.append(row)
    return cols, rows


def _output_path(outdir, config, default_name):
    name = config.output or default_name
    return name if os.path.isabs(name) else os.path.join(outdir, name)


def cmd_lz_work(config: RunConfig, outdir: str) -> str:
    config.validate("lz-work")
    cols, rows = lz_work_table(config)
    path = _output_path(outdir, config, "lz_work.csv")
    write_atomic(path, render_csv(cols, rows, config.metadata(), "lz-work"))
    return path


def cmd_ti_work(config: RunConfig, outdir: str) -> str:
    config.validate("ti-work")
    cols, rows = ti_work_table(config)
    path = _output_path(outdir, config, "ti_work.csv")
    write_atomic(path, render_csv(cols, rows, config.metadata(), "ti-work"))
    return path


def crossover_payload(config: RunConfig) -> dict:
    params = config.params()
    if config.model == "lz":
        proto = config.make_protocol(1.0)
        res = crossover.lz_crossover_time(params, proto)
        return {"model": "lz", "delta_over_j": params.delta_over_j,
                "numeric_scaled": res.numeric_scaled, "asymptotic_scaled": res.asymptotic_scaled,
                "numeric_tau": res.numeric_tau, "asymptotic_tau": res.asymptotic_tau}
    N = params.require_chain()
    if config.protocol == LINEAR_HALF:
        return {"model": "ti", "reports": [crossover.half_report(params, N).as_dict()]}
    proto = config.make_protocol(1.0)
    if proto.is_linear:
        reports = [crossover.crossover_report(params, N, m, proto).as_dict()
                   for m in crossover.METHODS]
    else:
        reports = [crossover.schedule_crossovers(params, proto, N).as_dict()]
    return {"model": "ti", "reports": reports}


def format_crossover(payload: dict) -> str:
    lines = []
    if payload["model"] == "lz":
        lines.append(f"LZ model, Delta/J = {payload['delta_over_j']:g}")
        lines.append(f"  numeric root     J^2 tau_c/Delta = {payload['numeric_scaled']:.6f}")
        lines.append(f"  asymptotic form  J^2 tau_c/Delta = {payload['asymptotic_scaled']:.6f}")
        return "\n".join(lines) + "\n"
    for rep in payload["reports"]:
        lines.append(f"TI chain N = {rep['N']}, Delta/J = {rep['delta_over_j']:g}, "
                     f"protocol = {rep['protocol']}, method = {rep['method']}")
        if rep["tau1_scaled"] is not None:
            lines.append(f"  tau1: scaled {rep['tau1_scaled']:.6f}   raw {rep['tau1']:.6g}")
            lines.append(f"  tau2: scaled {rep['tau2_scaled']:.6f}   raw {rep['tau2']:.6g}")
        else:
            lines.append(f"  tau_c: scaled {rep['tau2_scaled']:.6f}   raw {rep['tau2']:.6g}")
    return "\n".join(lines) + "\n"


def cmd_crossover(config: RunConfig, outdir: str, stdout=None) -> str:
    config.validate("crossover")
    payload = crossover_payload(config)
    (stdout or sys.stdout).write(format_crossover(payload))
    path = _output_path(outdir, config, "crossover.json")
    write_atomic(path, json.dumps({"config": config.metadata(), "result": payload},
                                  indent=2, sort_keys=True) + "\n")
    return path


def cmd_phase_diagram(config: RunConfig, outdir: str) -> List[str]:
    config.validate("phase-diagram")
    params = config.params(n_spins=None)
    try:
        grid = crossover.GridSpec(n_min=config.n_min, n_max=config.n_max, n_count=config.n_count,
                                  tau_min=config.tau_min, tau_max=config.tau_max,
                                  tau_count=config.tau_count)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    kind = crossover.HALF if config.protocol == LINEAR_HALF else crossover.CROSSING
    proto = config.make_protocol(1.0)
    diagram = crossover.phase_diagram(params, grid, kind, config.method, proto)
    meta = config.metadata()
    meta["tau_units"] = "raw"
    cols = ["N", "tau", "scaled_tau", "regime", "is_boundary1", "is_boundary2", "reliable_flag"]
    rows = [[n, t, s, lab.value, b1, b2, rel] for n, t, s, lab, b1, b2, rel in diagram.cells]
    base = config.output or "phase_diagram.csv"
    stem = base[:-4] if base.endswith(".csv") else base
    main = base if os.path.isabs(base) else os.path.join(outdir, base)
    stem_path = stem if os.path.isabs(stem) else os.path.join(outdir, stem)
    paths = [main, stem_path + "_boundary1.csv", stem_path + "_boundary2.csv"]
    write_atomic(paths[0], render_csv(cols, rows, meta, "phase-diagram"))
    write_atomic(paths[1], render_csv(["N", "tau1"], diagram.boundary1.tolist(), meta,
                                      "phase-diagram"))
    write_atomic(paths[2], render_csv(["N", "tau2"], diagram.boundary2.tolist(), meta,
                                      "phase-diagram"))
    return paths


def sweep_filename(N: int, delta_over_j: float) -> str:
    return f"ti_N{int(N)}_dj{delta_over_j:g}.csv"


def cmd_sweep(config: RunConfig, outdir: str) -> Tuple[str, int]:
    """Run ti-work for every ``(N, Delta/J)`` pair; returns ``(manifest, n_failed)``."""
    config = dataclasses.replace(config, model="ti")
    config.validate("ti-work")
    runs = []
    failed = 0
    for N, dj in config.pairs:
        entry = {"N": int(N), "delta_over_j": float(dj), "file": sweep_filename(N, dj)}
        t0 = time.perf_counter()
        try:
            sub = dataclasses.replace(config, n_spins=int(N), delta_over_j=float(dj), pairs=[],
                                      output=None)
            sub.validate("ti-work")
            cols, rows = ti_work_table(sub)
            write_atomic(os.path.join(outdir, entry["file"]),
                         render_csv(cols, rows, sub.metadata(), "ti-work"))
            entry["status"] = "ok"
        except AnnealError as exc:
            entry["status"] = "failed"
            entry["error"] = f"{type(exc).__name__}: {exc}"
            entry["exit_code"] = exc.exit_code
            failed += 1
            log.error("sweep run N=%s dj=%s failed: %s", N, dj, exc)
        entry["wall_time_s"] = round(time.perf_counter() - t0, 3)
        runs.append(entry)
        # rewrite after every run so an interrupted sweep leaves a valid manifest
        _write_manifest(outdir, config, runs)
    path = _write_manifest(outdir, config, runs)
    return path, failed


def _write_manifest(outdir, config, runs):
    path = os.path.join(outdir, config.output or "manifest.json")
    write_atomic(path, json.dumps({"config": config.metadata(), "runs": runs}, indent=2,
                                  sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _pairs(text: str):
    out = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            n, d = item.split(":")
            out.append((int(n), float(d)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad pair {item!r}; expected N:DELTA_OVER_J")
    return out


def _curves(text: str):
    return [c.strip() for c in text.split(",") if c.strip()]


# flag name -> (config field, argparse kwargs)
_FLAGS = {
    "--J": ("J", dict(type=float, help="coupling energy J")),
    "--delta-over-j": ("delta_over_j", dict(type=float, help="drive strength ratio Delta/J")),
    "--n-spins": ("n_spins", dict(type=int, help="chain length N (even)")),
    "--protocol": ("protocol", dict(choices=models.SHAPES)),
    "--lambda-i": ("lambda_i", dict(type=float, help="initial control value")),
    "--lambda-f": ("lambda_f", dict(type=float, help="final control value")),
    "--schedule": ("schedule", dict(help="CSV of s, field, coupling for a tabulated protocol")),
    "--tau-min": ("tau_min", dict(type=float)),
    "--tau-max": ("tau_max", dict(type=float)),
    "--tau-count": ("tau_count", dict(type=int)),
    "--tau-units": ("tau_units", dict(choices=("scaled", "raw"))),
    "--curves": ("curves", dict(type=_curves, help="comma-separated curve names")),
    "--phase-mode": ("phase_mode", dict(choices=approx.PHASE_MODES)),
    "--lrt-variant": ("lrt_variant", dict(choices=(approx.LRT_PRINTED, approx.LRT_RELAXATION))),
    "--max-phase-step": ("max_phase_step", dict(type=float)),
    "--drift-budget": ("drift_budget", dict(type=float)),
    "--min-steps": ("min_steps", dict(type=int)),
    "--norm-drift-tol": ("norm_drift_tol", dict(type=float)),
    "--n-steps": ("n_steps", dict(type=int, help="fixed RK4 step count (overrides the rule)")),
    "--method": ("method", dict(choices=crossover.METHODS)),
    "--n-min": ("n_min", dict(type=int)),
    "--n-max": ("n_max", dict(type=int)),
    "--n-count": ("n_count", dict(type=int)),
    "--pairs": ("pairs", dict(type=_pairs, help="N:DELTA_OVER_J[,N:DELTA_OVER_J...]")),
    "--output": ("output", dict(help="output file name (relative to the output directory)")),
    "--n-jobs": ("n_jobs", dict(type=int, help="worker threads for mode integration")),
}

_COMMANDS = {
    "lz-work": "excess work of the LZ model on a duration grid",
    "ti-work": "excess work of the TI chain on a duration grid",
    "crossover": "crossover durations",
    "phase-diagram": "regime map over (N, tau)",
    "sweep": "ti-work over several (N, Delta/J) pairs",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anneal-phases", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in _COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--outdir", help=f"output directory (overrides ${OUTDIR_ENV})")
        p.add_argument("--save-config", metavar="PATH",
                       help="write the effective config as JSON and continue")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name == "crossover":
            p.add_argument("--model", choices=("lz", "ti"))
        for flag, (dest, kw) in _FLAGS.items():
            p.add_argument(flag, dest=dest, default=None, **kw)
    return parser


def config_from_args(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                config = RunConfig.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    else:
        config = RunConfig()
    if args.command == "lz-work":
        config.model = "lz"
    elif args.command in ("ti-work", "sweep", "phase-diagram"):
        config.model = "ti"
    elif getattr(args, "model", None):
        config.model = args.model
    for _, (dest, _) in _FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            setattr(config, dest, value)
    config.__post_init__()
    return config


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"anneal-phases: config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        config = config_from_args(args)
        outdir = resolve_outdir(args.outdir, config)
        if args.save_config:
            write_atomic(args.save_config, config.to_json() + "\n")
        if args.command == "lz-work":
            print(cmd_lz_work(config, outdir))
        elif args.command == "ti-work":
            print(cmd_ti_work(config, outdir))
        elif args.command == "crossover":
            cmd_crossover(config, outdir)
        elif args.command == "phase-diagram":
            for path in cmd_phase_diagram(config, outdir):
                print(path)
        elif args.command == "sweep":
            path, failed = cmd_sweep(config, outdir)
            print(path)
            if failed:
                print(f"anneal-phases: {failed} sweep run(s) failed; see manifest",
                      file=sys.stderr)
                return NumericError.exit_code
        return 0
    except AnnealError as exc:
        kind = {2: "config", 3: "numeric", 4: "io"}.get(exc.exit_code, "error")
        print(f"anneal-phases: {kind} error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"anneal-phases: config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except ArithmeticError as exc:
        print(f"anneal-phases: numeric error: {exc}", file=sys.stderr)
        return NumericError.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

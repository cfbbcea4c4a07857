"""Run configuration and CSV serialization.

Config files are INI-style (``key = value``, ``#`` comments) with the
sections [params], [grid], [sim], [perturbation] and [analysis].  A [run]
section is tolerated and ignored so that an emitted ``run.meta`` can be fed
straight back in as a config.

Floats are written with 17 significant digits so every CSV round-trips
bit-for-bit through :func:`float`.
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import NormTrace
from .dissipativity import SweepResult, param_family
from .errors import BiofilmError, ConfigError
from .model import FAST, FAST_SCALE, TABLE1, ModelParams
from .solver import Grid1D, Perturbation, SimConfig

PRESETS = ("table1", "fast", "custom")
RATE_KEYS = ("kB", "kE", "kD", "kN", "eps", "alpha")

_SCHEMA = {
    "params": {"kB", "kE", "kD", "kN", "eps", "alpha", "gamma", "M", "family_a"},
    "grid": {"x_min", "x_max", "nx"},
    "sim": {"cfl", "t_end", "bc", "snapshot_every", "preset", "omega_radius"},
    "perturbation": {"profile", "amplitudes", "width_or_wavenumber", "center"},
    "analysis": {"fit_window_start_fraction"},
}
_IGNORED_SECTIONS = {"run"}

TRACE_HEADER = ["t", "l2", "h1", "h2", "energy"]
SNAPSHOT_HEADER = ["x", "B", "E", "D", "v", "L"]
SWEEP_HEADER = ["a", "a1", "a2", "a3", "rh1", "rh2", "rh3", "verdict"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    params: ModelParams = TABLE1
    preset: str = "table1"
    scale_factor: float = 1.0
    family_a: float | None = None
    grid: Grid1D = field(default_factory=lambda: Grid1D(-1.0, 1.0, 400))
    cfl: float = 0.9
    t_end: float = 10.0
    bc: str = "equilibrium-dirichlet"
    snapshot_every: int = 0
    omega_radius: float = 0.1
    perturbation: Perturbation = field(
        default_factory=lambda: Perturbation("sine", (1e-3, 1e-3, 1e-3, 1e-3), 1.0, 0.0)
    )
    fit_window_start_fraction: float = 0.5

    def sim_config(self) -> SimConfig:
        return SimConfig(
            grid=self.grid, params=self.params, t_end=self.t_end, cfl=self.cfl, bc=self.bc,
            perturbation=self.perturbation, snapshot_every=self.snapshot_every,
            preset=self.preset, omega_radius=self.omega_radius,
        )


def _num(section, key, raw) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"[{section}] {key}: must be finite, got {raw!r}")
    return val


def _int(section, key, raw) -> int:
    val = _num(section, key, raw)
    if val != int(val):
        raise ConfigError(f"[{section}] {key}: must be an integer, got {raw!r}")
    return int(val)


def parse_config(text: str, preset_override: str | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#", ";"),
                                   interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (kB vs kb)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    for sec in cp.sections():
        if sec in _IGNORED_SECTIONS:
            continue
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(cp[sec]) - _SCHEMA[sec]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")

    def get(sec, key):
        return cp[sec][key] if cp.has_section(sec) and key in cp[sec] else None

    cfg = RunConfig()
    try:
        sec = "params"
        rates = {k: _num(sec, k, get(sec, k)) for k in RATE_KEYS if get(sec, k) is not None}
        family_a = _num(sec, "family_a", get(sec, "family_a")) if get(sec, "family_a") is not None else None
        extras = {k: _num(sec, k, get(sec, k)) for k in ("gamma", "M") if get(sec, k) is not None}
        if rates and family_a is not None:
            raise ConfigError("[params]: give either explicit rates or family_a, not both")

        preset = preset_override or get("sim", "preset")
        if preset is None:
            preset = "custom" if (rates or family_a is not None) else "table1"
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}, expected one of {PRESETS}")

        if preset == "custom":
            if family_a is not None:
                params = param_family(family_a, gamma=extras.get("gamma", 1.0), M=extras.get("M", 1e-6))
            else:
                missing = [k for k in RATE_KEYS if k not in rates]
                if missing:
                    raise ConfigError(f"[params]: preset custom needs {', '.join(missing)} (or family_a)")
                params = ModelParams(**rates, **extras)
            scale = 1.0
        else:
            if rates or family_a is not None:
                raise ConfigError(f"[params]: rates given together with preset {preset!r}; use preset = custom")
            base, scale = (TABLE1, 1.0) if preset == "table1" else (FAST, FAST_SCALE)
            params = ModelParams(**{**base.as_dict(), **extras})
        cfg.params, cfg.preset, cfg.scale_factor, cfg.family_a = params, preset, scale, family_a

        sec = "grid"
        g = cfg.grid
        cfg.grid = Grid1D(
            _num(sec, "x_min", get(sec, "x_min")) if get(sec, "x_min") else g.x_min,
            _num(sec, "x_max", get(sec, "x_max")) if get(sec, "x_max") else g.x_max,
            _int(sec, "nx", get(sec, "nx")) if get(sec, "nx") else g.nx,
        )

        sec = "sim"
        if get(sec, "cfl"):
            cfg.cfl = _num(sec, "cfl", get(sec, "cfl"))
        if get(sec, "t_end"):
            cfg.t_end = _num(sec, "t_end", get(sec, "t_end"))
        if get(sec, "bc"):
            cfg.bc = get(sec, "bc").strip()
        if get(sec, "snapshot_every"):
            cfg.snapshot_every = _int(sec, "snapshot_every", get(sec, "snapshot_every"))
        if get(sec, "omega_radius"):
            cfg.omega_radius = _num(sec, "omega_radius", get(sec, "omega_radius"))

        sec = "perturbation"
        pert = cfg.perturbation
        amps = pert.amplitude
        if get(sec, "amplitudes"):
            parts = [s for s in get(sec, "amplitudes").replace(",", " ").split()]
            if len(parts) != 4:
                raise ConfigError("[perturbation] amplitudes: need 4 values (B, E, D, v)")
            amps = tuple(_num(sec, "amplitudes", s) for s in parts)
        cfg.perturbation = Perturbation(
            profile=(get(sec, "profile") or pert.profile).strip(),
            amplitude=amps,
            width=_num(sec, "width_or_wavenumber", get(sec, "width_or_wavenumber"))
            if get(sec, "width_or_wavenumber") else pert.width,
            center=_num(sec, "center", get(sec, "center")) if get(sec, "center") else pert.center,
        )

        sec = "analysis"
        if get(sec, "fit_window_start_fraction"):
            frac = _num(sec, "fit_window_start_fraction", get(sec, "fit_window_start_fraction"))
            if not 0 <= frac < 1:
                raise ConfigError("[analysis] fit_window_start_fraction must lie in [0, 1)")
            cfg.fit_window_start_fraction = frac

        cfg.sim_config()  # validates cfl, bc, t_end, ...
    except ConfigError:
        raise
    except BiofilmError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path, preset_override: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, preset_override)


def format_config(cfg: RunConfig, run_info: dict | None = None) -> str:
    """Fully resolved config (explicit rates, preset custom) plus a [run] section."""
    p = cfg.params
    lines = ["[params]"]
    lines += [f"{k} = {fmt(v)}" for k, v in p.as_dict().items()]
    lines += [
        "",
        "[grid]",
        f"x_min = {fmt(cfg.grid.x_min)}",
        f"x_max = {fmt(cfg.grid.x_max)}",
        f"nx = {cfg.grid.nx}",
        "",
        "[sim]",
        f"cfl = {fmt(cfg.cfl)}",
        f"t_end = {fmt(cfg.t_end)}",
        f"bc = {cfg.bc}",
        f"snapshot_every = {cfg.snapshot_every}",
        "preset = custom",
        f"omega_radius = {fmt(cfg.omega_radius)}",
        "",
        "[perturbation]",
        f"profile = {cfg.perturbation.profile}",
        "amplitudes = " + ", ".join(fmt(a) for a in cfg.perturbation.amplitude),
        f"width_or_wavenumber = {fmt(cfg.perturbation.width)}",
        f"center = {fmt(cfg.perturbation.center)}",
        "",
        "[analysis]",
        f"fit_window_start_fraction = {fmt(cfg.fit_window_start_fraction)}",
    ]
    if run_info:
        lines += ["", "[run]"]
        lines += [f"{k} = {v if isinstance(v, str) else fmt(v)}" for k, v in run_info.items()]
    return "\n".join(lines) + "\n"


def _write_rows(path, header, rows, footer=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
        if footer:
            fh.write(footer.rstrip("\n") + "\n")


def _read_rows(path, header):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        got = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: empty file") from None
    if [h.strip() for h in got] != header:
        raise ValueError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    rows = []
    for n, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: line {n} has {len(row)} fields, expected {len(header)}")
        try:
            rows.append([float(x) for x in row])
        except ValueError:
            raise ValueError(f"{path}: line {n} has a non-numeric field") from None
    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_trace_csv(path, trace: NormTrace):
    _write_rows(path, TRACE_HEADER, zip(trace.t, trace.l2, trace.h1, trace.h2, trace.energy))


def read_trace_csv(path, dx: float = float("nan")) -> NormTrace:
    data = _read_rows(path, TRACE_HEADER)
    return NormTrace(data[:, 0], data[:, 1], data[:, 2], data[:, 3], dx)


def write_snapshot_csv(path, x, U):
    B, E, D, v = U
    _write_rows(path, SNAPSHOT_HEADER, zip(x, B, E, D, v, 1.0 - (B + E + D)))


def read_snapshot_csv(path) -> np.ndarray:
    """Columns x, B, E, D, v, L as a (n, 6) array."""
    return _read_rows(path, SNAPSHOT_HEADER)


def snapshot_name(step: int, prefix: str = "snapshot") -> str:
    return f"{prefix}_{step:06d}.csv"


def write_sweep_csv(path, result: SweepResult):
    rows = [(r.a, r.a1, r.a2, r.a3, r.rh1, r.rh2, r.rh3, r.verdict) for r in result.rows]
    if result.transitions:
        parts = [f"{fmt(0.5 * (lo + hi))} in [{fmt(lo)}, {fmt(hi)}]" for lo, hi in result.transitions]
        footer = "# transition a* = " + "; ".join(parts)
    else:
        footer = "# transition a* = none"
    _write_rows(path, SWEEP_HEADER, rows, footer)


def read_sweep_csv(path) -> np.ndarray:
    return _read_rows(path, SWEEP_HEADER)

"""Command-line entry point: ``biofilm1d {analyze,sweep,simulate,decay}``.

Exit codes: 0 success / affirmative verdict, 1 input error, 2 runtime abort
(left the hyperbolic domain, non-finite values, unwritable output),
3 negative scientific verdict.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import io
from .analysis import fit_decay
from .dissipativity import coefficient_crosscheck, equilibrium, is_totally_dissipative, sweep
from .errors import BiofilmError, ConfigError, LeftHyperbolicDomain, NoPositiveEquilibrium, NonPositiveNorm
from .model import eigenvalues, eta
from .solver import simulate

EXIT_OK, EXIT_INPUT, EXIT_ABORT, EXIT_NEGATIVE = 0, 1, 2, 3
DECAY_MIN_R2 = 0.98


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _resolve(args) -> io.RunConfig:
    if getattr(args, "config", None):
        cfg = io.load_config(args.config, args.preset)
    else:
        cfg = io.parse_config("", args.preset)
    family_a = getattr(args, "family_a", None)
    if family_a is not None:
        text = f"[params]\nfamily_a = {family_a}\n"
        for k in ("gamma", "M"):
            text += f"{k} = {io.fmt(getattr(cfg.params, k))}\n"
        cfg = io.parse_config(text, "custom")
    return cfg


def cmd_analyze(args) -> int:
    try:
        cfg = _resolve(args)
        p = cfg.params
        ubar = equilibrium(p)
    except NoPositiveEquilibrium as exc:
        _err(f"{exc}; a positive equilibrium requires kB > kD")
        return EXIT_INPUT
    except BiofilmError as exc:
        _err(exc)
        return EXIT_INPUT

    rep = is_totally_dissipative(p)
    u = ubar.state
    f = io.fmt
    print(f"preset: {cfg.preset}" + (f" (family a = {f(cfg.family_a)})" if cfg.family_a is not None else ""))
    print("params: " + ", ".join(f"{k}={f(v)}" for k, v in p.as_dict().items()))
    print(f"equilibrium: B={f(ubar.Bbar)} E={f(ubar.Ebar)} D={f(ubar.Dbar)} v={f(ubar.vbar)}")
    print(f"L_bar: {f(ubar.Lbar)}  (kD/kB = {f(p.kD / p.kB)})")
    print(f"eta(u_bar): {f(eta(u, p))}")
    print("eigenvalues at u_bar: " + " ".join(f(x) for x in eigenvalues(u, p)))
    print(f"RH coefficients: a1={f(rep.a1)} a2={f(rep.a2)} a3={f(rep.a3)}")
    labels = ("a1 > 0", "a3 > 0", "a1*a2 - a3 > 0")
    for lab, ok in zip(labels, rep.rh_ok):
        print(f"  {lab}: {'yes' if ok else 'no'}")
    print(f"friction entry (4,4): {f(rep.block44)} ({'negative' if rep.block44_negative else 'NOT negative'})")
    print(f"max eigenvalue of sym(A0 D): {f(rep.max_eigenvalue)}" + (" (marginal)" if rep.marginal else ""))
    print("closed-form coefficient cross-check:")
    for name, row in coefficient_crosscheck(p).items():
        print(f"  {name}: exact={f(row['exact'])} closed_form={f(row['closed_form'])} rel_diff={row['rel_diff']:.3e}")
    print("verdict: " + ("totally dissipative" if rep.verdict else "NOT totally dissipative"))
    return EXIT_OK if rep.verdict else EXIT_NEGATIVE


def cmd_sweep(args) -> int:
    try:
        cfg = _resolve(args)
        defaults = {"gamma": cfg.params.gamma, "M": cfg.params.M}
        result = sweep(args.a_min, args.a_max, args.step, defaults)
    except BiofilmError as exc:
        _err(exc)
        return EXIT_INPUT
    try:
        io.write_sweep_csv(args.out, result)
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_ABORT
    n_true = sum(r.verdict for r in result.rows)
    print(f"{len(result.rows)} rows written to {args.out}; verdict true on {n_true}")
    for (lo, hi), a in zip(result.transitions, result.a_star):
        print(f"transition a* = {io.fmt(a)} (bracket [{io.fmt(lo)}, {io.fmt(hi)}])")
    return EXIT_OK


def _write_outputs(out: Path, cfg, snapshots, trace, info):
    x = cfg.grid.centers
    for snap in snapshots:
        io.write_snapshot_csv(out / io.snapshot_name(snap.step), x, snap.U)
    if trace is not None:
        io.write_trace_csv(out / "trace.csv", trace)
    (out / "run.meta").write_text(io.format_config(cfg, info))


def cmd_simulate(args) -> int:
    try:
        cfg = _resolve(args)
        sim_cfg = cfg.sim_config()
    except BiofilmError as exc:
        _err(exc)
        return EXIT_INPUT
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create output directory {out}: {exc}")
        return EXIT_ABORT

    info = {"preset_origin": cfg.preset, "preset_scale_factor": cfg.scale_factor}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = simulate(sim_cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except LeftHyperbolicDomain as exc:
        name = type(exc).__name__
        _err(f"run aborted ({name}, LeftHyperbolicDomain): {exc}")
        info.update({"status": f"aborted-{name}", "in_domain": "false",
                     "abort_cell": str(exc.cell)})
        try:
            if exc.field is not None:
                info["abort_step"] = str(exc.field.step)
                io.write_snapshot_csv(out / io.snapshot_name(exc.field.step, "abort"),
                                      cfg.grid.centers, exc.field.U)
            _write_outputs(out, cfg, [], exc.trace, info)
        except OSError as werr:
            _err(f"cannot write diagnostics: {werr}")
        return EXIT_ABORT
    except BiofilmError as exc:
        _err(exc)
        return EXIT_INPUT

    info.update({
        "status": "completed",
        "in_domain": "true",
        "steps": str(res.steps),
        "t_final": res.final.t,
        "max_wave_speed": res.max_wave_speed,
        "stayed_in_omega": "true" if res.stayed_in_omega else "false",
        "dissipative": "true" if res.dissipative else "false",
    })
    try:
        _write_outputs(out, cfg, res.snapshots, res.trace, info)
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_ABORT
    print(f"completed {res.steps} steps to t={io.fmt(res.final.t)}; "
          f"h2: {io.fmt(res.trace.h2[0])} -> {io.fmt(res.trace.h2[-1])}; outputs in {out}")
    return EXIT_OK


def cmd_decay(args) -> int:
    try:
        trace = io.read_trace_csv(args.trace)
    except (OSError, ValueError) as exc:
        _err(f"cannot read trace: {exc}")
        return EXIT_INPUT
    frac = args.window_start
    if frac is None and args.config:
        try:
            frac = io.load_config(args.config).fit_window_start_fraction
        except ConfigError as exc:
            _err(exc)
            return EXIT_INPUT
    if frac is None:
        frac = 0.5
    if not 0 <= frac < 1:
        _err("--window-start must lie in [0, 1)")
        return EXIT_INPUT
    try:
        fit = fit_decay(trace, start_fraction=frac)
    except NonPositiveNorm as exc:
        _err(exc)
        return EXIT_NEGATIVE
    except BiofilmError as exc:
        _err(exc)
        return EXIT_INPUT
    f = io.fmt
    print(f"beta: {f(fit.beta)}")
    print(f"C1: {f(fit.C1)}")
    print(f"r_squared: {f(fit.r_squared)}")
    print(f"window: [{f(fit.window[0])}, {f(fit.window[1])}] ({fit.n_samples} samples"
          + (", shrunk at vanishing h2)" if fit.shrunk else ")"))
    decays = fit.beta > 0 and fit.r_squared >= DECAY_MIN_R2
    print("exponential decay: " + ("yes" if decays else "no"))
    return EXIT_OK if decays else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="biofilm1d", description="Four-phase biofilm model: dissipativity analysis and 1D simulation."
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--preset", choices=io.PRESETS, help="override the config preset")

    p = sub.add_parser("analyze", help="equilibrium and total-dissipativity report")
    common(p)
    p.add_argument("--family-a", type=float, help="use the one-parameter family at this a")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="dissipativity verdict over the parameter family")
    common(p)
    p.add_argument("--a-min", type=float, default=0.5)
    p.add_argument("--a-max", type=float, default=1.5)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="finite-volume run from a perturbed equilibrium")
    common(p)
    p.add_argument("--out", default="run", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decay", help="fit exponential decay to a trace.csv")
    p.add_argument("trace", help="trace CSV (t,l2,h1,h2,energy)")
    p.add_argument("--config", help="config supplying fit_window_start_fraction")
    p.add_argument("--window-start", type=float, default=None,
                   help="fit window start as a fraction of the trace duration")
    p.set_defaults(func=cmd_decay)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

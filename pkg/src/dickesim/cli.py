"""Command-line interface.

Every subcommand accepts a JSON config file (sections: model, engine,
protocol, output) with individual flags overriding config values, writes
CSV output atomically, and records the fully resolved parameters, seeds
and tolerances in a manifest next to the CSV so runs are reproducible
bit for bit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .experiments import (ENGINES, CriticalLineFit, ScanSpec, critical_line,
                          dynamic_critical_estimate, potential_grid,
                          run_quench, scan)
from .meanfield import FINE_TUNED_COUPLING, FINE_TUNED_PRESET, ClassicalState
from .mexhat import MexHatParams, integrate_mexhat, sweep_eps
from .model import (ModelParams, build_dicke_hamiltonian, build_observable,
                    build_rotated_hamiltonian)
from .spectra import KRYLOV_SEED, ground_state
from .timeseries import write_csv_atomic

_MODEL_DEFAULTS = {"omega": 1.0, "omega0": 1.0, "coupling": 1.0,
                   "delta_phi": 1.0, "j": 10, "n_max": 60}


class ConfigError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - {"model", "engine", "protocol", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    return cfg


def _resolve_model(cfg: dict, args) -> ModelParams:
    section = dict(_MODEL_DEFAULTS)
    section.update(cfg.get("model", {}))
    for key in _MODEL_DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            section[key] = flag
    try:
        return ModelParams(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}")


def _protocol(cfg: dict, args, **defaults) -> dict:
    proto = dict(defaults)
    proto.update(cfg.get("protocol", {}))
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            proto[key] = flag
    return proto


def _output_path(cfg: dict, args, default: str) -> str:
    out = cfg.get("output", {}).get("csv", default)
    if getattr(args, "output", None):
        out = args.output
    return out


def _write_manifest(path: str, payload: dict) -> None:
    payload = dict(payload)
    payload["version"] = __version__
    payload["krylov_seed"] = KRYLOV_SEED
    tmp = path + ".partial"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, ModelParams):
        return obj.__dict__
    raise TypeError(f"not JSON-serialisable: {type(obj)}")


def _model_dict(p: ModelParams) -> dict:
    return {"omega": p.omega, "omega0": p.omega0, "coupling": p.coupling,
            "delta_phi": p.delta_phi, "j": p.j, "n_max": p.n_max}


def _add_model_flags(sub):
    sub.add_argument("--omega", type=float)
    sub.add_argument("--omega0", type=float)
    sub.add_argument("--coupling", "--lambda", dest="coupling", type=float)
    sub.add_argument("--delta-phi", dest="delta_phi", type=float)
    sub.add_argument("--j", type=float)
    sub.add_argument("--n-max", dest="n_max", type=int)


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--output", help="output CSV path")


# ----------------------------------------------------------------------
# subcommands

def _cmd_ground_state(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_model(cfg, args)
    out = _output_path(cfg, args, "ground_state.csv")
    rows = []
    for name, builder in (("dicke", build_dicke_hamiltonian),
                          ("rotated", build_rotated_hamiltonian)):
        gs = ground_state(builder(p))
        psi = gs.vector
        num = build_observable("photon_number", p)
        jz = build_observable("Jz", p)
        n_ph = float(np.real(psi @ (num @ psi))) / p.j
        n_at = 1.0 + float(np.real(psi @ (jz @ psi))) / p.j
        rows.append((name, gs.energy, n_ph, n_at, n_ph + n_at, gs.degenerate))
    tmp = out + ".partial"
    with open(tmp, "w") as fh:
        fh.write("hamiltonian,energy,n_ph,n_at,n_ex,degenerate\n")
        for name, e, nph, nat, nex, deg in rows:
            fh.write(f"{name},{e:.17g},{nph:.17g},{nat:.17g},{nex:.17g},{int(deg)}\n")
    os.replace(tmp, out)
    _write_manifest(out + ".manifest.json", {
        "command": "ground-state", "model": _model_dict(p), "output": out})
    print(f"wrote {out}")
    return 0


def _cmd_evolve(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_model(cfg, args)
    engine = args.engine or cfg.get("engine", "meanfield")
    if engine == "linear":
        engine = "meanfield_linear"
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}")
    proto = _protocol(cfg, args, periods=None, samples_per_period=100,
                      dt=None, initial="meanfield", branch=1, rtol=None)
    periods = proto["periods"]
    if periods is None:
        periods = 10 if engine == "geomphase" else 150
    if not np.isfinite(p.t_phi):
        raise ConfigError("evolve requires delta_phi > 0")
    t_total = periods * p.t_phi
    initial = proto["initial"]
    if initial == "preset":
        initial = FINE_TUNED_PRESET
    series = run_quench(p, engine, t_total,
                        sample_dt=p.t_phi / proto["samples_per_period"],
                        dt=proto["dt"], initial=initial,
                        branch=proto["branch"], rtol=proto["rtol"])
    out = _output_path(cfg, args, f"evolve_{engine}.csv")
    series.write_csv(out)
    _write_manifest(out + ".manifest.json", {
        "command": "evolve", "engine": engine, "model": _model_dict(p),
        "protocol": {"periods": periods,
                     "samples_per_period": proto["samples_per_period"],
                     "dt": proto["dt"], "initial": str(proto["initial"]),
                     "branch": proto["branch"], "rtol": proto["rtol"]},
        "series_meta": {k: v for k, v in series.meta.items()
                        if isinstance(v, (int, float, bool, str, tuple))},
        "output": out})
    print(f"wrote {out} ({series.t.size} samples)")
    return 0


def _scan_command(args) -> int:
    axis = args.axis
    cfg = _load_config(args.config)
    p = _resolve_model(cfg, args)
    engine = args.engine or cfg.get("engine", "meanfield")
    if engine == "linear":
        engine = "meanfield_linear"
    proto = _protocol(cfg, args, start=None, stop=None, step=None,
                      window=None, samples_per_period=100, workers=None,
                      initial="meanfield")
    if proto["start"] is None or proto["stop"] is None or proto["step"] is None:
        raise ConfigError("scan needs --start, --stop and --step")
    values = np.arange(proto["start"], proto["stop"] + proto["step"] * 0.5,
                       proto["step"])
    initial = proto["initial"]
    if initial == "preset":
        initial = FINE_TUNED_PRESET
    spec = ScanSpec(axis=axis, values=values, engine=engine, base=p,
                    window=proto["window"],
                    samples_per_period=proto["samples_per_period"],
                    initial=initial, workers=proto["workers"])
    result = scan(spec)
    out = _output_path(cfg, args, f"scan_{axis}_{engine}.csv")
    result.write_csv(out)
    _write_manifest(out + ".manifest.json", {
        "command": f"scan-{axis}", "engine": engine, "model": _model_dict(p),
        "protocol": {k: proto[k] for k in
                     ("start", "stop", "step", "window",
                      "samples_per_period", "workers")},
        "initial": str(proto["initial"]),
        "errors": result.errors, "output": out})
    if result.errors:
        print(f"{len(result.errors)} point(s) failed", file=sys.stderr)
    print(f"wrote {out} ({values.size} points)")
    return 0


def _cmd_critical_line(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_model(cfg, args)
    proto = _protocol(cfg, args, dphi_grid="0.2,0.3,0.4,0.5,0.65,0.8,1.0,1.25,1.6,2.0",
                      lambda_step=0.005, window=150, samples_per_period=100,
                      workers=None)
    grid = np.array([float(tok) for tok in str(proto["dphi_grid"]).split(",")])
    fit = critical_line(grid, p, lambda_step=proto["lambda_step"],
                        window=proto["window"],
                        samples_per_period=proto["samples_per_period"],
                        workers=proto["workers"])
    out = _output_path(cfg, args, "critical_line.csv")
    fit.write_csv(out)
    _write_manifest(out + ".manifest.json", {
        "command": "critical-line", "model": _model_dict(p),
        "protocol": {k: proto[k] for k in
                     ("dphi_grid", "lambda_step", "window",
                      "samples_per_period", "workers")},
        "fit": {"coefficient": fit.coefficient, "exponent": fit.exponent,
                "residual_rms": fit.residual_rms, "excluded": fit.excluded},
        "output": out})
    print(f"fit: lambda_min = lambda_c0 + {fit.coefficient:.4f} "
          f"* delta_phi**{fit.exponent:.4f}  (rms {fit.residual_rms:.3f})")
    print(f"wrote {out}")
    return 0


def _cmd_mexhat(args) -> int:
    cfg = _load_config(args.config)
    proto = _protocol(cfg, args, m=1.0, k=3.0, g=4.0, eps=None,
                      sweep_eps=False, eps_count=50, periods=6)
    base = MexHatParams(proto["m"], proto["k"], proto["g"])
    out = _output_path(cfg, args, "mexhat.csv")
    if proto["sweep_eps"]:
        grid = np.linspace(base.eps_max / proto["eps_count"], base.eps_max,
                           proto["eps_count"])
        series = sweep_eps(base, grid, n_half_periods=proto["periods"])
        write_csv_atomic(out, "eps,avg_rho2_analytic,avg_rho2_numeric,T_half",
                         [series.t] + [series[c] for c in series.names])
    else:
        if proto["eps"] is None:
            raise ConfigError("mexhat needs --eps or --sweep-eps")
        pp = MexHatParams(base.m, base.k, base.g, proto["eps"])
        from .mexhat import half_period, turning_points
        _, rp = turning_points(pp)
        t_final = proto["periods"] * half_period(pp)
        series = integrate_mexhat([rp, 0.0], [0.0, 0.0], pp, t_final)
        series.write_csv(out)
    _write_manifest(out + ".manifest.json", {
        "command": "mexhat",
        "params": {k: proto[k] for k in ("m", "k", "g", "eps", "sweep_eps",
                                         "eps_count", "periods")},
        "output": out})
    print(f"wrote {out}")
    return 0


def _cmd_contours(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_model(cfg, args)
    proto = _protocol(cfg, args, lambdas="0.6,0.72,0.823,0.9",
                      n_atom=81, n_photon=121)
    lams = [float(tok) for tok in str(proto["lambdas"]).split(",")]
    out = _output_path(cfg, args, "contours.csv")
    root, ext = os.path.splitext(out)
    written = []
    for lam in lams:
        grid = potential_grid(replace(p, coupling=lam),
                              n_atom=proto["n_atom"],
                              n_photon=proto["n_photon"])
        path = f"{root}_lambda{lam:g}{ext}"
        write_csv_atomic(path, "Q,q,V", list(grid))
        written.append(path)
    _write_manifest(out + ".manifest.json", {
        "command": "contours", "model": _model_dict(p),
        "lambdas": lams, "outputs": written})
    print(f"wrote {len(written)} contour grid(s)")
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickesim",
        description="Rotationally driven Dicke model: quantum and mean-field "
                    "dynamics, darkness scans, critical-line fits.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("ground-state", help="ground-state observables of "
                          "the static and co-rotating Hamiltonians")
    _add_common(sub); _add_model_flags(sub)
    sub.set_defaults(func=_cmd_ground_state)

    sub = subs.add_parser("evolve", help="quench evolution time series")
    _add_common(sub); _add_model_flags(sub)
    sub.add_argument("--engine", choices=list(ENGINES) + ["linear"])
    sub.add_argument("--periods", type=float, help="duration in drive periods")
    sub.add_argument("--samples-per-period", dest="samples_per_period", type=int)
    sub.add_argument("--dt", type=float, help="propagator step")
    sub.add_argument("--initial", choices=["meanfield", "quantum", "preset"])
    sub.add_argument("--branch", type=int, choices=[1, -1])
    sub.add_argument("--rtol", type=float)
    sub.set_defaults(func=_cmd_evolve)

    for axis, name in (("lambda", "scan-lambda"), ("delta_phi", "scan-dphi")):
        sub = subs.add_parser(name, help=f"sweep {axis} and tabulate "
                              "time-averaged densities")
        _add_common(sub); _add_model_flags(sub)
        sub.add_argument("--engine", choices=list(ENGINES) + ["linear"])
        sub.add_argument("--start", type=float)
        sub.add_argument("--stop", type=float)
        sub.add_argument("--step", type=float)
        sub.add_argument("--window", type=float, help="average over this many periods")
        sub.add_argument("--samples-per-period", dest="samples_per_period", type=int)
        sub.add_argument("--initial", choices=["meanfield", "quantum", "preset"])
        sub.add_argument("--workers", type=int)
        sub.set_defaults(func=_scan_command, axis=axis)

    sub = subs.add_parser("critical-line", help="dynamic critical line and "
                          "power-law fit")
    _add_common(sub); _add_model_flags(sub)
    sub.add_argument("--dphi-grid", dest="dphi_grid",
                     help="comma-separated driving velocities")
    sub.add_argument("--lambda-step", dest="lambda_step", type=float)
    sub.add_argument("--window", type=float)
    sub.add_argument("--samples-per-period", dest="samples_per_period", type=int)
    sub.add_argument("--workers", type=int)
    sub.set_defaults(func=_cmd_critical_line)

    sub = subs.add_parser("mexhat", help="quartic-well slowing-down analytics")
    _add_common(sub)
    sub.add_argument("--m", type=float)
    sub.add_argument("--k", type=float)
    sub.add_argument("--g", type=float)
    sub.add_argument("--eps", type=float, help="energy depth for a single trajectory")
    sub.add_argument("--sweep-eps", dest="sweep_eps", action="store_const",
                     const=True, help="sweep the energy-depth grid")
    sub.add_argument("--eps-count", dest="eps_count", type=int)
    sub.add_argument("--periods", type=int, help="half-periods per trajectory")
    sub.set_defaults(func=_cmd_mexhat)

    sub = subs.add_parser("contours", help="classical-potential contour grids")
    _add_common(sub); _add_model_flags(sub)
    sub.add_argument("--lambdas", help="comma-separated couplings")
    sub.add_argument("--n-atom", dest="n_atom", type=int)
    sub.add_argument("--n-photon", dest="n_photon", type=int)
    sub.set_defaults(func=_cmd_contours)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

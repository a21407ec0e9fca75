"""Command-line surface.

    ottosim run <spec.json> [--out DIR] [--workers N] [--dt X] [--json]
    ottosim cycle [--xi ...] [--heating ...] [--unitary ...] ...
    ottosim coeffs --xi ... [--theta ...] | --xi-min/--xi-max/--xi-count

The OTTOSIM_LOG environment variable sets the logging level only; it never
affects results.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .cycle import StrokeMode, run_cycle
from .model import EngineParams, ddi_coefficients
from .sweep import (
    TOOL_VERSION,
    load_spec,
    metadata_path_for,
    run_sweep,
    write_csv,
    write_json,
    write_metadata,
)


def _configure_logging() -> None:
    level = os.environ.get("OTTOSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _add_param_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xi", type=float, default=None, help="dimensionless separation")
    parser.add_argument("--theta", type=float, default=None, help="dipole angle in radians")
    parser.add_argument("--g", type=float, default=None, help="transverse drive")
    parser.add_argument("--B-h", dest="B_h", type=float, default=None, help="hot field")
    parser.add_argument("--B-c", dest="B_c", type=float, default=None, help="cold field")
    parser.add_argument("--chi1", type=float, default=None, help="atom-1 phonon coupling")
    parser.add_argument("--chi2", type=float, default=None, help="atom-2 phonon coupling")
    parser.add_argument("--Gamma", type=float, default=None, help="effective decay rate")
    parser.add_argument("--nbar", type=float, default=None, help="reservoir occupation")
    parser.add_argument("--n-ph", dest="n_ph", type=int, default=None, help="phonon levels")


def _params_from_args(args: argparse.Namespace) -> EngineParams:
    overrides = {
        name: getattr(args, name)
        for name in ("xi", "theta", "g", "B_h", "B_c", "chi1", "chi2", "Gamma", "nbar", "n_ph")
        if getattr(args, name) is not None
    }
    return EngineParams(**overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    if args.dt is not None:
        spec = dataclasses.replace(spec, dt=args.dt)
    rows = run_sweep(spec, workers=args.workers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.spec).stem
    csv_path = out_dir / f"{stem}.csv"
    write_csv(rows, csv_path, spec.outputs)
    write_metadata(spec, metadata_path_for(csv_path), dt_used=spec.dt)
    if args.json:
        write_json(rows, out_dir / f"{stem}.json", spec.outputs)
    n_err = sum(1 for r in rows if r.status != "ok")
    print(f"wrote {csv_path} ({len(rows)} rows, {n_err} errors)")
    return 0


def _cmd_cycle(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    mode = StrokeMode(heating=args.heating, unitary=args.unitary)
    result = run_cycle(p, mode, t1=args.t1, tau=args.tau, dt=args.dt)
    payload = dataclasses.asdict(result)
    payload["strokes"] = [dataclasses.asdict(s) for s in result.strokes]
    json.dump(payload, sys.stdout, indent=1)
    print()
    return 0


def _cmd_coeffs(args: argparse.Namespace) -> int:
    if args.xi:
        xis = [float(x) for x in args.xi]
    elif args.xi_min is not None and args.xi_max is not None and args.xi_count is not None:
        xis = [float(x) for x in np.linspace(args.xi_min, args.xi_max, args.xi_count)]
    else:
        raise SystemExit("coeffs needs --xi values or --xi-min/--xi-max/--xi-count")
    thetas = [float(t) for t in args.theta] if args.theta else [math.pi / 2]
    # broadcast a single xi or theta against the other list; else zip equal lengths
    if len(xis) == 1 and len(thetas) > 1:
        xis = xis * len(thetas)
    elif len(thetas) == 1 and len(xis) > 1:
        thetas = thetas * len(xis)
    elif len(xis) != len(thetas):
        raise SystemExit("coeffs: --xi and --theta lists must broadcast or match in length")
    table = {"Gamma": args.Gamma, "xi": xis, "theta": thetas,
             "omega12": [], "gamma12": [], "gamma_plus": [], "gamma_minus": []}
    for xi, theta in zip(xis, thetas):
        ddi = ddi_coefficients(xi, theta, args.Gamma)
        table["omega12"].append(ddi.omega12)
        table["gamma12"].append(ddi.gamma12)
        table["gamma_plus"].append(ddi.gamma_plus)
        table["gamma_minus"].append(ddi.gamma_minus)
    json.dump(table, sys.stdout, indent=1)
    print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ottosim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ottosim {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a sweep spec, write CSV + metadata sidecar")
    run_p.add_argument("spec", help="path to the JSON sweep spec")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--workers", type=int, default=1, help="worker processes")
    run_p.add_argument("--dt", type=float, default=None, help="integrator step override")
    run_p.add_argument("--json", action="store_true", help="also write rows as JSON")
    run_p.set_defaults(func=_cmd_run)

    cycle_p = sub.add_parser("cycle", help="run a single cycle, print the result as JSON")
    _add_param_args(cycle_p)
    cycle_p.add_argument("--t1", type=float, default=50.0, help="heating duration")
    cycle_p.add_argument("--tau", type=float, default=10.0, help="unitary stroke duration")
    cycle_p.add_argument("--heating", choices=("finite", "full"), default="finite")
    cycle_p.add_argument("--unitary", choices=("adiabatic", "finite", "sudden"), default="adiabatic")
    cycle_p.add_argument("--dt", type=float, default=1e-3, help="integrator step")
    cycle_p.set_defaults(func=_cmd_cycle)

    coeffs_p = sub.add_parser("coeffs", help="print dipole-dipole coefficients as JSON")
    coeffs_p.add_argument("--xi", type=float, action="append", help="separation (repeatable)")
    coeffs_p.add_argument("--xi-min", type=float, default=None)
    coeffs_p.add_argument("--xi-max", type=float, default=None)
    coeffs_p.add_argument("--xi-count", type=int, default=None)
    coeffs_p.add_argument("--theta", type=float, action="append",
                          help="dipole angle in radians (repeatable, default pi/2)")
    coeffs_p.add_argument("--Gamma", type=float, default=0.1, help="effective decay rate")
    coeffs_p.set_defaults(func=_cmd_coeffs)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

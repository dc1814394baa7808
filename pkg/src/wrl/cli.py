"""Command-line front end: ``wrl <command> [options]``.

Exit status: 0 success, 1 malformed configuration or input, 2 numerical
guard tripped (degenerate immersion, curl defect), 3 a verification check
failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import collar, elastica, lorentz, residues, verification
from .catalogue import MobiusMap, SurfaceSpec, apply_mobius, realize
from .errors import NumericalGuardError
from .immersion import (
    SIGN_CONVENTION_ID,
    build_frames,
    conformal_defect,
    gauss_bonnet_residual,
    second_form_energy,
    willmore_energy,
)

SCHEMA = "1"
EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_FAILED = 0, 1, 2, 3

ENERGY_TARGETS = {
    "sphere": ("4pi", 4 * np.pi),
    "clifford-torus-R4": ("2pi^2", 2 * np.pi**2),
    "clifford-torus-R3": ("2pi^2", 2 * np.pi**2),
    "plane": ("0", 0.0),
    "catenoid": ("0", 0.0),
}
EULER_CHARACTERISTIC = {"sphere": 2, "clifford-torus-R4": 0, "clifford-torus-R3": 0}


class ConfigError(ValueError):
    """Malformed command-line configuration or input file."""


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _parse_pair(text: str) -> tuple:
    try:
        nu, nv = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"resolution must be 'nu,nv', got {text!r}") from exc
    return nu, nv


def _parse_floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _surface(args) -> SurfaceSpec:
    if not args.surface:
        raise ConfigError("--surface is required")
    try:
        spec = SurfaceSpec.from_dict(_load_json(args.surface))
        if args.resolution:
            spec = spec.with_resolution(*_parse_pair(args.resolution))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return spec


def _grid(spec: SurfaceSpec, mobius=None):
    try:
        g = realize(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if mobius is not None:
        try:
            g = apply_mobius(mobius, g)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
    return g


def _half(spec: SurfaceSpec) -> SurfaceSpec:
    nu, nv = spec.resolution
    return spec.with_resolution(max(16, nu // 2), max(16, nv // 2))


# ---------------------------------------------------------------------------
# commands


def cmd_energy(args) -> dict:
    spec = _surface(args)
    mobius = MobiusMap.from_dict(_load_json(args.mobius)) if args.mobius else None

    def measure(s):
        g = _grid(s, mobius)
        f = build_frames(g)
        return g, f, willmore_energy(g, f), second_form_energy(g, f)

    g, f, W, E = measure(spec)
    _, _, W2, E2 = measure(_half(spec))
    report = {
        "schema": SCHEMA,
        "command": "energy",
        "surface": spec.to_dict(),
        "resolution": list(spec.resolution),
        "W": W,
        "W_error_estimate": abs(W - W2),
        "E": E,
        "E_error_estimate": abs(E - E2),
        "conformal_defect": conformal_defect(g),
    }
    if spec.kind in ENERGY_TARGETS:
        name, val = ENERGY_TARGETS[spec.kind]
        report["target"] = name
        report["target_value"] = val
        report["rel_err"] = abs(W - val) / val if val else abs(W - val)
    if g.closed and spec.kind in EULER_CHARACTERISTIC:
        chi = EULER_CHARACTERISTIC[spec.kind]
        report["euler_characteristic"] = chi
        report["gauss_bonnet_residual"] = gauss_bonnet_residual(g, f, chi)
    report["sign_convention"] = SIGN_CONVENTION_ID
    return report


def _annulus(spec):
    try:
        return verification.annulus_grid(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_residues(args) -> dict:
    spec = _surface(args)
    g = _annulus(spec)
    f = build_frames(g)
    rho = args.radius if args.radius is not None else residues.chart_radii(g, [0.5])[0]
    try:
        rs = residues.residues(g, f, rho)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    gh = _annulus(_half(spec))
    try:
        rh = residues.residues(gh, build_frames(gh), rs.radius)
        err = {
            "c": float(np.max(np.abs(rs.c - rh.c))),
            "c0": abs(rs.c0 - rh.c0),
            "c1": float(np.max(np.abs(rs.c1.coef - rh.c1.coef))),
        }
    except ValueError:
        err = None
    report = {
        "schema": SCHEMA,
        "command": "residues",
        "surface": spec.to_dict(),
        "resolution": list(spec.resolution),
        "residues": rs.to_dict(),
        "error_estimate": err,
    }
    if args.potentials:
        pot = residues.solve_potentials(g, f, rs)
        report["curl_defect"] = pot.curl_defect
        report["curl_guard"] = pot.guard
        report["identities"] = residues.verify_identities(g, f, pot, rs)
    report["sign_convention"] = SIGN_CONVENTION_ID
    return report


def _sweep_radii(args, g):
    vals = _parse_floats(args.radii)
    return vals if args.absolute else residues.chart_radii(g, vals)


def cmd_sweep(args):
    spec = _surface(args)
    g = _annulus(spec)
    radii = _sweep_radii(args, g)
    try:
        out = residues.residue_sweep(g, build_frames(g), radii)
        gh = _annulus(_half(spec))
        coarse = residues.residue_sweep(gh, build_frames(gh), [s.radius for s in out["sets"]])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dev, dev_half = out["deviation"]["max"], coarse["deviation"]["max"]
    from .numerics import convergence_order

    order = convergence_order(dev_half, dev, spec.resolution[0] / _half(spec).resolution[0]) if dev > 0 else None
    if args.format == "json":
        return {
            "schema": SCHEMA,
            "command": "sweep",
            "surface": spec.to_dict(),
            "resolution": list(spec.resolution),
            "sets": [s.to_dict() for s in out["sets"]],
            "deviation": out["deviation"],
            "deviation_half_resolution": coarse["deviation"],
            "order": order,
            "sign_convention": SIGN_CONVENTION_ID,
        }
    m = g.m
    c1_keys = list(out["sets"][0].c1.as_dict())
    header = ["radius"] + [f"c_{i}" for i in range(1, m + 1)] + ["c0"] + [f"c1_{k}" for k in c1_keys]
    header += ["quad_error", "deviation", "deviation_half", "order"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for s in out["sets"]:
        c1 = s.c1.as_dict()
        row = [s.radius, *s.c, s.c0, *(c1[k] for k in c1_keys), s.quad_error, dev, dev_half,
               "" if order is None else order]
        w.writerow([repr(float(x)) if not isinstance(x, str) else x for x in row])
    return buf.getvalue()


def cmd_verify(args) -> dict:
    try:
        out = verification.run_suite(args.suite, threads=args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return {"schema": SCHEMA, "command": "verify", **out, "sign_convention": SIGN_CONVENTION_ID}


def cmd_elastica(args) -> dict:
    try:
        sol = elastica.build_solution(args.k0, args.dk0, args.length, args.ds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    prof = sol.profile
    kg = elastica.geodesic_curvature(sol.curve)
    report = {
        "schema": SCHEMA,
        "command": "elastica",
        "k0": args.k0,
        "dk0": args.dk0,
        "s_length": args.length,
        "ds": args.ds,
        "first_integral_drift_per_length": elastica.first_integral_drift(prof),
        "horizontality": elastica.horizontality(sol.lift),
        "projection_error": float(np.max(np.linalg.norm(
            elastica.hopf_project(sol.lift.q) - sol.curve.gamma, axis=-1))),
        "geodesic_curvature_error": float(np.max(np.abs(kg - prof.k))),
        "step_halving": elastica.step_halving_order(args.k0, args.dk0, 2 * args.length,
                                                    max(2 * args.ds, 0.05)),
    }
    if args.full:
        report["solution"] = sol.to_dict()
    return report


def cmd_lorentz(args) -> dict:
    report = {"schema": SCHEMA, "command": "lorentz"}
    if args.check in ("weak-l2", "all"):
        report["weak_l2"] = lorentz.inverse_radius_weak_l2()
        report["weak_l2_control"] = lorentz.inverse_radius_weak_l2(exponent=1.5)
    if args.check in ("log-growth", "all"):
        report["log_growth"] = lorentz.inverse_radius_log_growth()
    if args.check in ("duality", "all"):
        funcs = {"one": lambda x: 1.0 + 0 * x, "inverse_radius": lambda x: 1.0 / x, "zero": lambda x: 0 * x}
        report["duality"] = {name: lorentz.duality_bound(f, args.r) for name, f in funcs.items()}
    return report


def cmd_collar(args) -> dict:
    try:
        chart = collar.CollarChart(args.l)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t, K = collar.gaussian_curvature(chart)
    _, Kh = collar.gaussian_curvature(chart, (len(t) - 1) // 2 + 1)
    return {
        "schema": SCHEMA,
        "command": "collar",
        "chart": chart.to_dict(),
        "geodesic_metric_factor": collar.metric_factor(chart, chart.geodesic_t),
        "geodesic_length": collar.geodesic_length(chart),
        "annulus": collar.cylinder_to_annulus(chart),
        "curvature_error": float(np.max(np.abs(K + 1))),
        "curvature_error_half_resolution": float(np.max(np.abs(Kh + 1))),
        "torus_chart_conformal_defect": collar.torus_chart_conformal_defect(args.l),
    }


COMMANDS = {
    "energy": cmd_energy,
    "residues": cmd_residues,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "elastica": cmd_elastica,
    "lorentz": cmd_lorentz,
    "collar": cmd_collar,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $WRL_THREADS or 1); results do not depend on it")
    surf = argparse.ArgumentParser(add_help=False)
    surf.add_argument("--surface", help="SurfaceSpec JSON file")
    surf.add_argument("--resolution", help="override resolution as 'nu,nv'")

    p = argparse.ArgumentParser(prog="wrl", description="Willmore surface residues and invariants")
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("energy", parents=[common, surf], help="Willmore and second-form energies")
    e.add_argument("--mobius", help="MobiusMap JSON applied before measuring")
    r = sub.add_parser("residues", parents=[common, surf], help="residues c, c0, c1 on one circle")
    r.add_argument("--radius", type=float, help="contour radius (default: middle of the chart)")
    r.add_argument("--potentials", action="store_true", help="also integrate L, S, R and check identities")
    s = sub.add_parser("sweep", parents=[common, surf], help="residues on several circles")
    s.add_argument("--radii", default="0.3,0.4,0.5,0.6,0.7",
                   help="fractions of the chart's log-radius extent (or radii with --absolute)")
    s.add_argument("--absolute", action="store_true", help="--radii are actual radii")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", default="all", choices=("all",) + verification.SUITES)
    el = sub.add_parser("elastica", parents=[common], help="elastica, curve and Hopf lift diagnostics")
    el.add_argument("--k0", type=float, default=0.5)
    el.add_argument("--dk0", type=float, default=0.0)
    el.add_argument("--length", type=float, default=4.0, help="torus parameter length")
    el.add_argument("--ds", type=float, default=5e-4, help="step in the torus parameter")
    el.add_argument("--full", action="store_true", help="include the sampled solution")
    lo = sub.add_parser("lorentz", parents=[common], help="Lorentz-norm estimates")
    lo.add_argument("--check", choices=("weak-l2", "log-growth", "duality", "all"), default="all",
                    help="||1/rho||_{2,inf} under refinement, ||1/rho||_{2,1} growth, or the duality bound")
    lo.add_argument("--r", type=float, default=0.01, help="inner radius for the duality bound")
    co = sub.add_parser("collar", parents=[common], help="hyperbolic collar chart data")
    co.add_argument("--l", type=float, required=True, help="geodesic length")
    return p


def _threads(value) -> int:
    if value is None:
        env = os.environ.get("WRL_THREADS", "1")
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"WRL_THREADS must be an integer, got {env!r}") from exc
    if value < 1:
        raise ConfigError("thread count must be positive")
    return value


def run(argv=None) -> int:
    """Parse arguments, run the command and write its report; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        args.threads = _threads(args.threads)
        report = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"wrl: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"wrl: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    text = report if isinstance(report, str) else _dump(report)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"wrl: error: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    if args.command == "verify" and report["failed"]:
        return EXIT_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())

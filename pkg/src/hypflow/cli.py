"""Command-line front end.

Exit codes: 0 verification passed, 1 verification failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import geometry as geo
from .euler import build_steady, euler_residual
from .harmonic import BoundaryData, harmonic_extend, polar_grid
from .higher_dim import CONVERGENT, DIVERGENT, dichotomy_experiment
from .navier_stokes import (
    InadmissibleProfileError,
    NSSolution,
    energy_report,
    leray_hopf_admissible,
    nonuniqueness_demo,
    ns_residual_terms,
    parse_profile,
)
from .quadrature import norm_report
from .report import Report, plot_lines, write_json

log = logging.getLogger("hypflow")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "boundary": {"a0": 0.0, "a": [1.0], "b": [0.0]},
    "boundary_file": None,
    "grid": {"n_r": 30, "n_theta": 60, "r_cut": 0.95},
    "profiles": None,
    "t_max": 1.0,
    "steps": 20,
    "tol": 1e-10,
    "margin_tol": 1e-9,
    "seed": 0,
    "n_probe": 200,
    "n_times": 20,
    "corrupt_pressure": False,
    "phi3": {"const": 0.0, "linear": [0.0, 0.0, 1.0]},
    "R_max": 10.0,
    "shells": 40,
    "plot": False,
}


class ConfigError(ValueError):
    pass


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(val, dict) and key != "boundary":
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def load_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
    for key in ("tol", "seed", "t_max", "steps"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "profile", None):
        cfg["profiles"] = list(args.profile)
    if getattr(args, "plot", False):
        cfg["plot"] = True
    if getattr(args, "corrupt_pressure", False):
        cfg["corrupt_pressure"] = True
    _validate(cfg)
    return cfg


def _validate(cfg):
    for key in ("tol", "margin_tol", "t_max"):
        if not isinstance(cfg[key], (int, float)) or not cfg[key] > 0:
            raise ConfigError(f"{key} must be a positive number")
    for key in ("steps", "n_probe", "n_times", "shells", "seed"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    if cfg["steps"] < 1:
        raise ConfigError("steps must be at least 1")
    g = cfg["grid"]
    if not (0 < g["r_cut"] < 1):
        raise ConfigError("grid.r_cut must lie in (0, 1)")
    if int(g["n_r"]) < 1 or int(g["n_theta"]) < 1:
        raise ConfigError("grid sizes must be positive")


def boundary_data(cfg) -> BoundaryData:
    try:
        if cfg["boundary_file"]:
            return BoundaryData.from_json(Path(cfg["boundary_file"]).read_text())
        return BoundaryData.from_dict(cfg["boundary"])
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad boundary data: {exc}") from exc


def profiles(cfg, default):
    specs = cfg["profiles"] or default
    try:
        return [parse_profile(s) for s in specs]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def phi3(cfg):
    entry = cfg["phi3"]
    try:
        const = float(entry.get("const", 0.0))
        lin = np.asarray(entry.get("linear", [0.0, 0.0, 0.0]), dtype=float)
    except (AttributeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad phi3 entry: {exc}") from exc
    if lin.shape != (3,):
        raise ConfigError("phi3.linear needs three coefficients")
    return lambda xi: const + xi @ lin


def _probe_points(seed, n, r_max):
    rng = np.random.default_rng(seed)
    r = r_max * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def _summary(out, name, command, passed, metrics, cfg, extra=None):
    payload = {"command": command, "pass": bool(passed), "metrics": metrics, "config_echo": cfg}
    if extra:
        payload.update(extra)
    write_json(out / f"{name}.json", payload)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify_euler(cfg, out: Path) -> int:
    data = boundary_data(cfg)
    sol = build_steady(data)
    if cfg["corrupt_pressure"]:
        sol = sol.with_pressure_factor(1.0)
    g = cfg["grid"]
    pts = polar_grid(int(g["n_r"]), int(g["n_theta"]), float(g["r_cut"]))
    res = euler_residual(sol, pts)
    norms = np.linalg.norm(res, axis=-1)
    report = Report(["point_x", "point_y", "residual_x", "residual_y", "residual_norm"])
    for p, r, n in zip(pts, res, norms):
        report.add(point_x=float(p[0]), point_y=float(p[1]), residual_x=float(r[0]), residual_y=float(r[1]), residual_norm=float(n))
    report.write_csv(out / "euler_residual.csv")
    tol = cfg["tol"]
    max_res = float(norms.max())
    div = float(np.max(np.abs(sol.divergence(pts))))
    passed = max_res <= tol
    _summary(out, "verify_euler", "verify euler", passed, {"max_residual": max_res, "max_divergence": div, "n_points": int(pts.shape[0])}, cfg)
    if cfg["plot"]:
        radius = np.linalg.norm(pts, axis=-1)
        order = np.argsort(radius, kind="stable")
        plot_lines(out / "euler_residual.svg", radius[order], {"|residual|": np.maximum(norms[order], 1e-300)}, "r", "residual", "Steady Euler residual", logy=True)
    if not passed:
        k = int(np.argmax(norms > tol))
        print(f"verify euler: FAIL at point ({pts[k, 0]:.6g}, {pts[k, 1]:.6g}): residual {norms[k]:.3e} > {tol:.1e}", file=sys.stderr)
        return EXIT_FAIL
    print(f"verify euler: PASS (max residual {max_res:.3e})")
    return EXIT_OK


def cmd_verify_ns(cfg, out: Path) -> int:
    pot = harmonic_extend(boundary_data(cfg))
    prof = profiles(cfg, ["exp:2"])[0]
    T = float(cfg["t_max"])
    adm = leray_hopf_admissible(prof, T, np.linspace(0.0, T, cfg["steps"] + 1))
    sol = NSSolution(pot, prof)
    pts = _probe_points(cfg["seed"], cfg["n_probe"], float(cfg["grid"]["r_cut"]))
    times = np.linspace(0.0, T, cfg["n_times"])
    report = Report(["t", "point_x", "point_y", "residual_x", "residual_y", "residual_norm"])
    max_res = max_ricci = max_adv = 0.0
    first_bad = None
    for t in times:
        terms = ns_residual_terms(sol, float(t), pts)
        total = terms.total
        norms = np.linalg.norm(total, axis=-1)
        max_res = max(max_res, float(norms.max()))
        max_ricci = max(max_ricci, float(np.max(np.linalg.norm(terms.ricci, axis=-1))))
        max_adv = max(max_adv, float(np.max(np.abs(terms.advection - terms.bernoulli))))
        if first_bad is None and np.any(norms > cfg["tol"]):
            k = int(np.argmax(norms > cfg["tol"]))
            first_bad = (float(t), pts[k], float(norms[k]))
        for p, r, n in zip(pts, total, norms):
            report.add(t=float(t), point_x=float(p[0]), point_y=float(p[1]), residual_x=float(r[0]), residual_y=float(r[1]), residual_norm=float(n))
    report.write_csv(out / "ns_residual.csv")
    passed = bool(adm) and max_res <= cfg["tol"] and max_ricci > 0.0
    metrics = {"max_residual": max_res, "min_margin": adm.min_margin, "max_ricci_term": max_ricci, "max_advection_identity_err": max_adv}
    _summary(out, "verify_ns", "verify ns", passed, metrics, cfg, {"max_residual": max_res, "min_margin": adm.min_margin})
    if cfg["plot"]:
        per_t = np.asarray(report.column("residual_norm")).reshape(len(times), -1).max(axis=1)
        plot_lines(out / "ns_residual.svg", times, {"max |residual|": np.maximum(per_t, 1e-300)}, "t", "residual", "Navier-Stokes residual", logy=True)
    if not adm:
        print(f"verify ns: FAIL profile {prof.label()} inadmissible at t = {adm.t_worst:g} (margin {adm.min_margin:.3e})", file=sys.stderr)
        return EXIT_FAIL
    if not passed:
        if first_bad is not None:
            t, p, n = first_bad
            print(f"verify ns: FAIL at t = {t:g}, point ({p[0]:.6g}, {p[1]:.6g}): residual {n:.3e}", file=sys.stderr)
        else:
            print("verify ns: FAIL (trivial field: Ricci term vanishes)", file=sys.stderr)
        return EXIT_FAIL
    print(f"verify ns: PASS (max residual {max_res:.3e}, min margin {adm.min_margin:.3e})")
    return EXIT_OK


def cmd_energy_report(cfg, out: Path) -> int:
    pot = harmonic_extend(boundary_data(cfg))
    prof = profiles(cfg, ["exp:2"])[0]
    T = float(cfg["t_max"])
    adm = leray_hopf_admissible(prof, T, np.linspace(0.0, T, cfg["steps"] + 1))
    report = energy_report(NSSolution(pot, prof), T, cfg["steps"])
    report.write_csv(out / "energy_report.csv")
    norms = norm_report(pot)
    norms.write_csv(out / "norms.csv")
    m = report.metrics
    passed = bool(adm) and m["min_margin"] >= -cfg["margin_tol"] and m["bridge_rel_err"] <= 1e-6 and bool(norms.passed)
    metrics = dict(m, admissible=bool(adm), norms=norms.metrics)
    _summary(out, "energy_report", "energy-report", passed, metrics, cfg, {"min_margin": m["min_margin"]})
    if cfg["plot"]:
        t = report.column("t")
        plot_lines(out / "energy_report.svg", t, {"E": report.column("E"), "lhs": report.column("lhs"), "rhs": report.column("rhs")}, "t", "energy", "Leray-Hopf energy balance")
    if not passed:
        k = int(np.argmin(report.column("margin")))
        print(f"energy-report: FAIL (margin {report.rows[k]['margin']:.3e} at t = {report.rows[k]['t']:g}; admissible={bool(adm)})", file=sys.stderr)
        return EXIT_FAIL
    print(f"energy-report: PASS (min margin {m['min_margin']:.3e})")
    return EXIT_OK


def cmd_nonuniq(cfg, out: Path) -> int:
    pot = harmonic_extend(boundary_data(cfg))
    profs = profiles(cfg, ["exp:2", "exp:3"])
    if len(profs) != 2:
        raise ConfigError("nonuniq needs exactly two profiles")
    T = float(cfg["t_max"])
    try:
        report = nonuniqueness_demo(pot, profs[0], profs[1], T, cfg["steps"], seed=cfg["seed"], n_probe=cfg["n_probe"], tol=cfg["tol"])
    except InadmissibleProfileError as exc:
        _summary(out, "nonuniq", "nonuniq", False, {"violation_t": exc.t_violation}, cfg)
        print(f"nonuniq: FAIL {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        _summary(out, "nonuniq", "nonuniq", False, {}, cfg)
        print(f"nonuniq: FAIL {exc}", file=sys.stderr)
        return EXIT_FAIL
    report.write_csv(out / "nonuniq.csv")
    _summary(out, "nonuniq", "nonuniq", report.passed, report.metrics, cfg, {"max_residual": report.metrics["max_residual"], "min_margin": report.metrics["min_margin"]})
    if cfg["plot"]:
        plot_lines(out / "nonuniq.svg", report.column("t"), {"separation": report.column("sep")}, "t", "||v1 - v2||", "Two solutions, one initial velocity")
    if not report.passed:
        print(f"nonuniq: FAIL {report.metrics}", file=sys.stderr)
        return EXIT_FAIL
    print(f"nonuniq: PASS (max separation {report.metrics['max_separation']:.6g})")
    return EXIT_OK


def cmd_dodziuk(cfg, out: Path) -> int:
    res = dichotomy_experiment(boundary_data(cfg), phi3(cfg), R_max=float(cfg["R_max"]), shells=int(cfg["shells"]))
    for name, curve in (("growth_n2", res.curve2), ("growth_n3", res.curve3)):
        rep = Report(["R", "E", "delta_E", "fit_slope", "fit_residual"])
        for row in curve.rows():
            rep.add(**row)
        rep.write_csv(out / f"{name}.csv")
    passed = res.class2.label == CONVERGENT and res.class3.label == DIVERGENT
    _summary(out, "dodziuk", "dodziuk", passed, res.metrics, cfg, res.labels)
    if cfg["plot"]:
        plot_lines(out / "dodziuk.svg", res.curve2.radii, {"n = 2": res.curve2.energy, "n = 3": res.curve3.energy}, "hyperbolic radius R", "E(R)", "Truncated hyperbolic Dirichlet energy")
    msg = f"dodziuk: n2 {res.class2.label}, n3 {res.class3.label} (consistent with Dodziuk's theorem)" if passed else f"dodziuk: n2 {res.class2.label}, n3 {res.class3.label}"
    print(msg, file=sys.stdout if passed else sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    ("verify", "euler"): cmd_verify_euler,
    ("verify", "ns"): cmd_verify_ns,
    ("energy-report",): cmd_energy_report,
    ("nonuniq",): cmd_nonuniq,
    ("dodziuk",): cmd_dodziuk,
}


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--out", metavar="DIR", default="reports", help="output directory (default: reports)")
    p.add_argument("--plot", action="store_true", help="also write SVG plots")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--seed", type=int, help="seed for probe-point sampling")
    p.add_argument("--profile", action="append", metavar="exp:RATE[:F0]", help="time profile; repeat for nonuniq")
    p.add_argument("--t-max", dest="t_max", type=float, help="time horizon")
    p.add_argument("--steps", type=int, help="number of time steps")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypflow", description="Steady Euler and Leray-Hopf Navier-Stokes flows on the hyperbolic plane")
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="pointwise residual checks")
    vsub = verify.add_subparsers(dest="target", required=True)
    e = vsub.add_parser("euler", help="steady Euler residual on a polar grid")
    _common(e)
    e.add_argument("--corrupt-pressure", action="store_true", help="negative control: double the Bernoulli pressure")
    _common(vsub.add_parser("ns", help="Navier-Stokes residual on a spacetime probe grid"))
    _common(sub.add_parser("energy-report", help="Leray-Hopf energy inequality over time"))
    _common(sub.add_parser("nonuniq", help="two Leray-Hopf solutions with the same initial data"))
    _common(sub.add_parser("dodziuk", help="truncated energy growth in dimensions 2 and 3"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    key = (args.command, args.target) if args.command == "verify" else (args.command,)
    try:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[key](cfg, out)
    except ConfigError as exc:
        print(f"hypflow: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except geo.OutsideChartError as exc:
        print(f"hypflow: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

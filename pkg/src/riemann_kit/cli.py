"""Command-line entry point: ``riemann-kit <command> [options]``.

Exit codes: 0 every enabled check passed, 1 a check failed, 2 the
configuration was rejected, 3 the result could not be verified (sufficient
conditions of a reduced system failed while its algebraic data is sound).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, specfile
from .cases import FAMILY_TABLE, SYSTEM_IDS, build_case, custom_system, default_cases
from .chardata import check_wave_relation, dispersion_roots, homogeneous_gamma, inhomogeneous_gamma
from .errors import ConstraintError, DegeneracyError, ExpressionError, InputError, RiemannKitError
from .examples import ex1, ex2
from .fluid import FluidParams, FluidState, classify, fluid_element, fluid_system
from .pde_core import (
    DEFAULT_STEP,
    BoxSampler,
    jacobian_fd,
    negate_source,
    span_check,
    usable_point,
    verify_on_grid,
)

log = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_UNVERIFIED = 0, 1, 2, 3
SPAN_TOL = 1e-6
SPAN_POINTS = 20

CONFIG_ERRORS = (InputError, ConstraintError, ExpressionError, FileNotFoundError, json.JSONDecodeError)


# ------------------------------------------------------------ helpers

def _plain(obj):
    """Convert numpy scalars and arrays so ``json`` can write them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def dump_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _emit(report: dict, out):
    text = dump_json(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _vector(text, what):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    try:
        return np.array([float(s) for s in str(text).split(",")])
    except ValueError:
        raise InputError(f"{what} must be a comma-separated list of numbers") from None


def _parse_param(item):
    key, sep, value = item.partition("=")
    if not sep:
        raise InputError(f"--param expects KEY=VALUE, got {item!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def load_config(args) -> dict:
    """Merge the ``--config`` file with command-line flags (flags win)."""
    cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{args.config}: invalid JSON at line {exc.lineno}") from None
        if not isinstance(cfg, dict):
            raise InputError("config file must hold a JSON object")
    params = dict(cfg.get("params", {}))
    for item in getattr(args, "param", None) or []:
        k, v = _parse_param(item)
        params[k] = v
    if getattr(args, "a", None):
        params["a"] = list(_vector(args.a, "--a"))
    cfg["params"] = params
    for key in ("system", "family", "n", "seed", "tol", "fd_step", "threads", "out",
                "state", "direction", "speed", "wave"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "negative_control", False):
        cfg["negative_control"] = True
    cfg.setdefault("seed", 0)
    cfg.setdefault("threads", 1)
    for key in ("tol", "fd_step"):
        if key in cfg and not float(cfg[key]) > 0:
            raise InputError(f"{key} must be positive")
    if int(cfg.get("n", 1)) < 1:
        raise InputError("n must be at least 1")
    return cfg


# ------------------------------------------------------------ verify

def run_verify(system_id, family_id, params=None, n=200, seed=0, tol=1e-5,
               fd_step=DEFAULT_STEP, box=None, negative_control=False, threads=1) -> dict:
    """Residual and span checks for one case; returns the report dictionary."""
    case = build_case(system_id, family_id, params)
    system = negate_source(case.system) if negative_control else case.system
    lo, hi = (box["lo"], box["hi"]) if box else case.box
    sampler = BoxSampler(lo, hi, seed)
    rep = verify_on_grid(system, case.candidate, sampler, n, fd_step, tol, threads)
    pts = sampler.points(min(n, SPAN_POINTS), usable_point(system, case.candidate, fd_step))
    span = 0.0
    for x in pts:
        jac = jacobian_fd(case.candidate, x, fd_step)
        span = max(span, span_check(jac, case.waves(x), case.allow_dependent))
    passed = rep.passed and span <= SPAN_TOL
    return {
        "command": "verify",
        "system": system_id,
        "family": family_id,
        "params": params or {},
        "n": n,
        "seed": seed,
        "box": {"lo": list(lo), "hi": list(hi)},
        "sampler": "numpy Philox",
        "fd_step": fd_step,
        "tol": tol,
        "negative_control": bool(negative_control),
        "residual": rep.to_dict(),
        "span_check": {"max": span, "tol": SPAN_TOL, "points": len(pts), "pass": span <= SPAN_TOL},
        "errata": case.errata,
        "pass": passed,
    }


def cmd_verify(args) -> int:
    cfg = load_config(args)
    if "system" not in cfg or "family" not in cfg:
        raise InputError("verify needs --system and --family")
    report = run_verify(cfg["system"], cfg["family"], cfg["params"], int(cfg.get("n", 200)),
                        int(cfg["seed"]), float(cfg.get("tol", 1e-5)),
                        float(cfg.get("fd_step", DEFAULT_STEP)), cfg.get("box"),
                        bool(cfg.get("negative_control", False)), int(cfg["threads"]))
    _emit(report, cfg.get("out"))
    res = report["residual"]
    print(f"{report['system']}/{report['family']}: max residual {res['max']:.3e} "
          f"(tol {res['tol']:g}), span {report['span_check']['max']:.3e} -> "
          f"{'PASS' if report['pass'] else 'FAIL'}", file=sys.stderr)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# ------------------------------------------------------------ dispersion / elements

def _analysis_system(cfg):
    """``(system, state, fluid params or None)`` for dispersion and elements."""
    sid = cfg.get("system")
    params = cfg["params"]
    state = _vector(cfg.get("state"), "--state")
    if sid == "fluid":
        fp = FluidParams(float(params.get("kappa", 1.4)), tuple(params.get("gravity", (0.0, 0.0, 1.0))),
                         tuple(params.get("omega", (0.0, 0.0, 0.0))))
        if state is None:
            state = np.array([1.0, 1.0, 0.0, 0.0, 0.0])
        return fluid_system(fp), state, fp
    if sid == "example1":
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
        system = ex1.example1_system(ex1.Example1Config(**kw))
    elif sid == "example2":
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
        system = ex2.example2_system(ex2.Example2Config(**kw))
    elif sid == "custom":
        if "system" not in params:
            raise InputError("custom system needs params.system")
        system = custom_system(params["system"])
    else:
        raise InputError(f"system {sid!r} is not supported here; use fluid, example1, example2 or custom")
    if state is None:
        state = np.full(system.q, 0.5)
    return system, state, None


def run_dispersion(cfg) -> dict:
    system, state, fp = _analysis_system(cfg)
    direction = _vector(cfg.get("direction"), "--direction")
    if direction is None:
        direction = np.eye(system.p - 1)[0]
    roots = dispersion_roots(system, state, direction)
    rows = []
    for root, mult in roots:
        row = {"root": float(np.real(root)), "multiplicity": int(mult)}
        if fp is not None:
            wave = np.concatenate([[np.real(root)], direction])
            row["type"] = classify(FluidState.from_u(state), fp, wave)
        rows.append(row)
    return {"command": "dispersion", "system": cfg.get("system"), "state": list(state),
            "direction": list(direction), "roots": rows,
            "total_multiplicity": sum(r["multiplicity"] for r in rows)}


def cmd_dispersion(args) -> int:
    cfg = load_config(args)
    try:
        report = run_dispersion(cfg)
    except DegeneracyError as exc:
        print(f"error: degenerate direction: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report, cfg.get("out"))
    for r in report["roots"]:
        print(f"{r['root']: .12g}\t{r['multiplicity']}\t{r.get('type', '')}".rstrip(), file=sys.stderr)
    return EXIT_PASS


def run_elements(cfg) -> dict:
    system, state, fp = _analysis_system(cfg)
    direction = _vector(cfg.get("direction"), "--direction")
    if direction is None:
        direction = np.eye(system.p - 1)[0]
    out = []
    if fp is not None:
        fs = FluidState.from_u(state)
        gp = fp.g - np.cross(fp.w, np.array(fs.v))
        perp = np.cross(direction, [1.0, 0.0, 0.0] if abs(direction[0]) < 0.9 else [0.0, 1.0, 0.0])
        trials = [("E", {"direction": direction, "gamma_v": perp}),
                  ("A", {"direction": direction, "epsilon": 1}),
                  ("A", {"direction": direction, "epsilon": -1}),
                  ("E0", {"alpha": [0.0, 0.0, 1.0]}),
                  ("A0", {"direction": direction, "epsilon": 1}),
                  ("H0", {"direction": direction, "speed": float(cfg.get("speed", 0.5))})]
        for kind, opts in trials:
            try:
                el = fluid_element(kind, fs, fp, **opts)
            except (ConstraintError, DegeneracyError) as exc:
                out.append({"kind": kind, "skipped": str(exc)})
                continue
            out.append({"kind": kind, "wave": list(el.wave.components), "gamma": list(el.gamma),
                        "residual": float(el.residual(system, state)),
                        "type": classify(fs, fp, el.wave.components)})
        report = {"effective_gravity": list(gp)}
    else:
        report = {}
        for root, mult in dispersion_roots(system, state, direction):
            wave = np.concatenate([[np.real(root)], direction])
            basis = homogeneous_gamma(system, state, wave)
            res = max((float(np.max(np.abs(system.symbol(state, wave) @ g))) for g in basis.T), default=0.0)
            out.append({"kind": "homogeneous", "wave": list(wave), "dimension": int(basis.shape[1]),
                        "residual": res})
        wave = _vector(cfg.get("wave"), "--wave")
        if wave is not None:
            gamma, res = inhomogeneous_gamma(system, state, wave)
            out.append({"kind": "inhomogeneous", "wave": list(wave), "gamma": list(np.real(gamma)),
                        "residual": float(res)})
    report.update({"command": "elements", "system": cfg.get("system"), "state": list(state),
                   "direction": list(direction), "elements": out})
    return report


def cmd_elements(args) -> int:
    cfg = load_config(args)
    try:
        report = run_elements(cfg)
    except DegeneracyError as exc:
        print(f"error: degenerate direction: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report, cfg.get("out"))
    bad = [e for e in report["elements"] if "residual" in e and e["residual"] > 1e-8]
    return EXIT_FAIL if bad else EXIT_PASS


# ------------------------------------------------------------ superpose

def cmd_superpose(args) -> int:
    if not args.config:
        raise InputError("superpose needs --config <spec file>")
    spec = specfile.read_spec(args.config)
    loaded = specfile.load_spec(spec)
    table, cert = specfile.run_spec(loaded)
    out = Path(args.out or Path(args.config).with_suffix(".csv").name)
    table.labels = loaded.state_names
    table.coordinates = list(cert["coordinates"])
    table.to_csv(out)
    cert_path = out.with_suffix(".certificate.json")
    cert.update({"command": "superpose", "spec": Path(args.config).name, "table": out.name})
    cert_path.write_text(dump_json(cert), encoding="utf-8")
    print(f"table {out}, certificate {cert_path}: {cert['status']}", file=sys.stderr)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "unverified": EXIT_UNVERIFIED}[cert["status"]]


# ------------------------------------------------------------ report

def run_report(n=200, seed=0, fd_step=DEFAULT_STEP, threads=1) -> dict:
    """Verify every built-in family and its negative control."""
    entries = []
    for system_id, family_id, params in default_cases():
        tol = 1e-6 if system_id in ("example1", "example2", "example3") else 1e-5
        rep = run_verify(system_id, family_id, params, n, seed, tol, fd_step, threads=threads)
        neg = run_verify(system_id, family_id, params, min(n, 50), seed, tol, fd_step,
                         negative_control=True, threads=threads)
        entries.append({
            "system": system_id, "family": family_id, "params": params,
            "max_residual": rep["residual"]["max"], "mean_residual": rep["residual"]["mean_abs"],
            "tol": tol, "span_check": rep["span_check"]["max"], "pass": rep["pass"],
            "negative_control_max": neg["residual"]["max"],
            "negative_control_ok": neg["residual"]["max"] >= 1e-2,
            "errata": rep["errata"],
        })
    return {"command": "report", "n": n, "seed": seed, "fd_step": fd_step,
            "sampler": "numpy Philox", "version": __version__, "families": entries,
            "pass": all(e["pass"] and e["negative_control_ok"] for e in entries)}


def cmd_report(args) -> int:
    cfg = load_config(args)
    report = run_report(int(cfg.get("n", 200)), int(cfg["seed"]),
                        float(cfg.get("fd_step", DEFAULT_STEP)), int(cfg["threads"]))
    _emit(report, cfg.get("out"))
    for e in report["families"]:
        print(f"{e['system']}/{e['family']} {json.dumps(e['params'], sort_keys=True)}: "
              f"{e['max_residual']:.3e} {'PASS' if e['pass'] else 'FAIL'}", file=sys.stderr)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riemann-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--system", choices=SYSTEM_IDS)
        p.add_argument("--config", help="JSON config (or spec file for superpose)")
        p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="family parameter; VALUE is parsed as JSON when possible")
        p.add_argument("--a", help="vector a for example1/example2, e.g. 1,1,1")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--threads", type=int)

    v = sub.add_parser("verify", help="FD residual and span check of a closed-form family")
    common(v)
    v.add_argument("--family", help="; ".join(f"{k}: {', '.join(f)}" for k, f in FAMILY_TABLE.items()))
    v.add_argument("--n", type=int)
    v.add_argument("--tol", type=float)
    v.add_argument("--fd-step", dest="fd_step", type=float)
    v.add_argument("--negative-control", action="store_true", help="flip the sign of the source")
    v.set_defaults(func=cmd_verify)

    for name, func, text in (("dispersion", cmd_dispersion, "roots of the characteristic determinant"),
                             ("elements", cmd_elements, "integral elements at a state")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--state", help="comma-separated state u")
        p.add_argument("--direction", help="comma-separated spatial direction")
        if name == "elements":
            p.add_argument("--speed", type=float, help="relative speed for the hydrodynamic element")
            p.add_argument("--wave", help="full wave vector for an inhomogeneous element")
        p.set_defaults(func=func)

    s = sub.add_parser("superpose", help="integrate a reduced system from a spec file")
    s.add_argument("--config", required=True, help="decomposition spec file (JSON)")
    s.add_argument("--out", help="table CSV path; the certificate goes next to it")
    s.set_defaults(func=cmd_superpose)

    r = sub.add_parser("report", help="verify every built-in family")
    common(r)
    r.add_argument("--n", type=int)
    r.add_argument("--fd-step", dest="fd_step", type=float)
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RiemannKitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

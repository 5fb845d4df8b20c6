"""Decomposition spec files: JSON documents describing a reduced system.

Schema (all expressions use the grammar of :mod:`riemann_kit.expr`)::

    {
      "system": "example1" | "example2" | "fluid" | {custom system},
      "system_params": {...},
      "constants": {"M": 3.0},
      "definitions": [["b1", "-u1*sqrt(1 - u1^2)"], ...],
      "variant": "mixed",
      "components": [
        {"wave": [...p], "omega": "...", "rotation": [[...m] ...m], "tau": [...q]},
        {"wave": [...p], "projection": [[...m] ...q], "tau": [...q]}
      ],
      "grid": {"start": [...], "stop": [...], "num": [...]},
      "f0": [...q],
      "max_step": 1e-3,
      "reference": [...q expressions in the coordinate names],
      "reference_tol": 1e-6,
      "check_states": [[...q], ...]
    }

Definitions may use the state names, the coordinates ``x1..xp`` and earlier
definitions. Waves may depend on the state but not on ``x``. Real
coordinates are named ``rA`` for a real wave and ``rA_re``, ``rA_im`` for
a complex one (``A`` counts components from 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import superpose as sp
from .cases import custom_system
from .chardata import Component, DecompositionData, WaveVector, check_rotation_condition, check_wave_relation
from .errors import ExpressionError, InputError, RiemannKitError
from .examples import ex1, ex2
from .expr import compile_expr, names_used
from .fluid import FluidParams, fluid_system
from .pde_core import SystemSpec, wave_rows

ROTATION_TOL = 1e-8
WAVE_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-10
WELLDEFINED_TOL = 1e-6
FD_WAVE_STEP = 1e-7


def _system(spec) -> tuple:
    """``(SystemSpec, state names)``."""
    sid = spec.get("system")
    params = dict(spec.get("system_params", {}))
    if isinstance(sid, dict):
        sys = custom_system(sid)
        return sys, list(sid.get("variables") or [f"u{i + 1}" for i in range(sys.q)])
    if sid == "example1":
        if "a" in params:
            params["a"] = tuple(params["a"])
        cfg = ex1.Example1Config(**params)
        return ex1.example1_system(cfg), ["u1", "u2", "u3"]
    if sid == "example2":
        if "a" in params:
            params["a"] = tuple(params["a"])
        return ex2.example2_system(ex2.Example2Config(**params)), ["u1", "u2", "u3"]
    if sid == "fluid":
        fp = FluidParams(params.get("kappa", 1.4), tuple(params.get("gravity", (0.0, 0.0, 1.0))),
                         tuple(params.get("omega", (0.0, 0.0, 0.0))))
        return fluid_system(fp), ["rho", "p", "v1", "v2", "v3"]
    raise InputError(f"unknown system {sid!r} in spec file")


def coordinate_names(components) -> list:
    names = []
    for a, comp in enumerate(components, start=1):
        if comp["complex"]:
            names += [f"r{a}_re", f"r{a}_im"]
        else:
            names.append(f"r{a}")
    return names


@dataclass
class LoadedSpec:
    system: SystemSpec
    reduced: sp.ReducedSystem
    grid: sp.GridSpec
    f0: np.ndarray
    max_step: float
    coordinates: list
    state_names: list
    reference: list = field(default_factory=list)
    reference_tol: float = 1e-6
    check_states: list = field(default_factory=list)


def load_spec(spec: dict) -> LoadedSpec:
    """Compile a spec dictionary; expression errors carry their column."""
    if not isinstance(spec, dict):
        raise InputError("spec file must hold a JSON object")
    sys, unames = _system(spec)
    xnames = [f"x{i + 1}" for i in range(sys.p)]
    consts = {k: complex(v) for k, v in spec.get("constants", {}).items()}

    defs, known = [], list(unames) + xnames
    depends_on_u = {n: True for n in unames}
    depends_on_x = {n: True for n in xnames}
    for item in spec.get("definitions", []):
        name, text = item
        defs.append((name, _compile(text, known, consts, f"definition {name}")))
        used = names_used(text)
        depends_on_u[name] = any(depends_on_u.get(n, False) for n in used)
        depends_on_x[name] = any(depends_on_x.get(n, False) for n in used)
        known.append(name)

    variant = spec.get("variant")
    comps, compiled = spec.get("components"), []
    if not comps:
        raise InputError("spec file needs at least one component")
    wave_on_u = False
    for a, c in enumerate(comps, start=1):
        if len(c.get("wave", [])) != sys.p:
            raise InputError(f"component {a}: wave needs {sys.p} entries")
        entry = {"wave": [_compile(t, known, consts, f"component {a} wave") for t in c["wave"]],
                 "tau": [_compile(t, known, consts, f"component {a} tau") for t in c.get("tau", ["0"] * sys.q)]}
        for t in c["wave"]:
            used = names_used(str(t))
            if any(depends_on_x.get(n, False) for n in used):
                raise InputError(f"component {a}: waves may not depend on x")
            wave_on_u = wave_on_u or any(depends_on_u.get(n, False) for n in used)
        if "projection" in c:
            entry["projection"] = [[_compile(t, known, consts, f"component {a} projection") for t in row]
                                   for row in c["projection"]]
        else:
            entry["omega"] = _compile(c.get("omega", "0"), known, consts, f"component {a} omega")
            rot = c.get("rotation") or [["1" if i == j else "0" for j in range(sys.m)] for i in range(sys.m)]
            entry["rotation"] = [[_compile(t, known, consts, f"component {a} rotation") for t in row]
                                 for row in rot]
        compiled.append(entry)

    def environment(x, u):
        env = dict(zip(unames, np.asarray(u, dtype=complex)))
        env.update(zip(xnames, np.asarray(x, dtype=float)))
        for name, fn in defs:
            env[name] = fn(**env)
        return env

    def ev(fn, env):
        return complex(fn(**env))

    def data(x, u):
        env = environment(x, u)
        out = []
        for c in compiled:
            wave = np.array([ev(f, env) for f in c["wave"]])
            tau = np.array([ev(f, env) for f in c["tau"]])
            w = WaveVector(wave)
            if not w.is_complex:
                tau = tau.real
            if "projection" in c:
                proj = np.array([[ev(f, env) for f in row] for row in c["projection"]])
                out.append(Component(w, tau, projection=proj if w.is_complex else proj.real))
            else:
                rot = np.array([[ev(f, env) for f in row] for row in c["rotation"]])
                out.append(Component(w, tau, ev(c["omega"], env), rot))
        kinds = {comp.is_complex for comp in out}
        name = variant or _guess_variant(kinds, "projection" in compiled[0])
        return DecompositionData(out, name)

    zero_x = np.zeros(sys.p)

    def wave_jacobians(u):
        u = np.asarray(u, dtype=float)
        cols = []
        for j in range(u.size):
            e = np.zeros_like(u)
            e[j] = FD_WAVE_STEP
            plus = [c.wave.components for c in data(zero_x, u + e).components]
            minus = [c.wave.components for c in data(zero_x, u - e).components]
            cols.append([(wp - wm) / (2 * FD_WAVE_STEP) for wp, wm in zip(plus, minus)])
        return [np.stack([cols[j][a] for j in range(u.size)], axis=1) for a in range(len(compiled))]

    reduced = sp.ReducedSystem(sys, data, wave_jacobians if wave_on_u else None, variant or "")
    probe = data(zero_x, np.asarray(spec.get("f0", np.zeros(sys.q)), dtype=float))
    coord = coordinate_names([{"complex": c.is_complex} for c in probe.components])

    try:
        g = spec["grid"]
        grid = sp.GridSpec(list(g["start"]), list(g["stop"]), [int(n) for n in g["num"]])
        f0 = np.asarray(spec["f0"], dtype=float)
    except KeyError as exc:
        raise InputError(f"spec file is missing {exc.args[0]!r}") from None
    if not (len(grid.start) == len(grid.stop) == len(grid.num) == len(coord)):
        raise InputError(f"grid needs {len(coord)} axes ({', '.join(coord)})")
    if f0.shape != (sys.q,):
        raise InputError(f"f0 needs {sys.q} entries")
    ref = [_compile(t, coord, consts, "reference") for t in spec.get("reference", [])]
    if ref and len(ref) != sys.q:
        raise InputError(f"reference needs {sys.q} expressions")
    return LoadedSpec(sys, reduced, grid, f0, float(spec.get("max_step", sp.MAX_STEP)), coord, unames,
                      ref, float(spec.get("reference_tol", 1e-6)),
                      [np.asarray(s, dtype=float) for s in spec.get("check_states", [])])


def _guess_variant(kinds, projection):
    if projection:
        return "underdetermined-mode" if True in kinds else "underdetermined-wave"
    if kinds == {True, False}:
        return "mixed"
    return "multimode" if True in kinds else "multiwave"


def _compile(text, names, consts, where):
    try:
        return compile_expr(str(text), names, consts)
    except ExpressionError as exc:
        raise ExpressionError(f"{where}: {exc.detail}", exc.position) from None


def _check(value, tol):
    return {"max": value, "tol": tol, "pass": bool(value <= tol)}


def run_spec(loaded: LoadedSpec) -> tuple:
    """Integrate and certify; returns ``(table, certificate)``.

    The certificate status is ``pass``, ``fail`` (algebraic conditions,
    integration or reference comparison failed) or ``unverified`` (only the
    sufficient conditions, well-definedness or integrability, failed).
    """
    rs = loaded.reduced
    table = sp.integrate_reduced(rs, loaded.f0, loaded.grid, loaded.max_step, loaded.state_names)
    flat_r = np.array(np.meshgrid(*table.axes, indexing="ij")).reshape(len(table.axes), -1).T
    flat_f = table.values.reshape(-1, table.values.shape[-1])
    idx = np.unique(np.linspace(0, len(flat_r) - 1, min(40, len(flat_r))).astype(int))
    probes = []
    for i in idx:
        if np.all(np.isfinite(flat_f[i])):
            w = wave_rows(rs.waves(flat_f[i]))
            x, *_ = np.linalg.lstsq(w, flat_r[i], rcond=None)
            probes.append((x, flat_f[i]))
    probes += [(np.zeros(loaded.system.p), s) for s in loaded.check_states]

    rot = wave = ortho = 0.0
    wd = sp.WellDefinedResult(0.0, True, "no probes")
    errors = []
    try:
        for x, u in probes:
            d = rs.decomposition(x, u)
            rot = max(rot, check_rotation_condition(loaded.system, u, x, d))
            wave = max(wave, check_wave_relation(loaded.system, u, d))
            ortho = max([ortho] + d.rotation_defects())
        if probes:
            wd = sp.welldefined_check(rs, probes)
    except RiemannKitError as exc:
        errors.append(str(exc))
        rot = wave = ortho = float("inf")

    cert = {
        "rotation_condition": _check(float(rot), ROTATION_TOL),
        "wave_relation": _check(float(wave), WAVE_TOL),
        "orthogonality": _check(float(ortho), ORTHOGONALITY_TOL),
        "well_defined": dict(_check(float(wd.value), WELLDEFINED_TOL), vacuous=wd.vacuous, note=wd.note),
        "cross_defect": {"value": float(table.defect), "limit": sp.DEFECT_LIMIT,
                         "integrable": bool(table.integrable)},
        "integration_error": table.error,
        "coordinates": loaded.coordinates,
        "n_probes": len(probes),
        "errors": errors,
    }
    if loaded.reference:
        dev = 0.0
        for r, f in zip(flat_r, flat_f):
            env = dict(zip(loaded.coordinates, r))
            exact = np.array([np.real(fn(**env)) for fn in loaded.reference])
            dev = max(dev, float(np.max(np.abs(exact - f))))
        cert["reference"] = _check(dev, loaded.reference_tol)

    hard = [cert[k]["pass"] for k in ("rotation_condition", "wave_relation", "orthogonality")]
    hard.append(not table.error and not errors)
    if "reference" in cert:
        hard.append(cert["reference"]["pass"])
    if not all(hard):
        status = "fail"
    elif not (cert["well_defined"]["pass"] and table.integrable):
        status = "unverified"
    else:
        status = "pass"
    cert["status"] = status
    return table, cert


def read_spec(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None

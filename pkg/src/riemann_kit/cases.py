"""Named verification cases: a system, a candidate solution, a box and waves.

A case is looked up by ``(system id, family id)`` and built from a plain
parameter dictionary (as read from a JSON config), which keeps the CLI and
the test-suite on the same construction path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError
from .examples import ex1, ex2, ex3
from .expr import compile_expr
from .fluid import FAMILY_IDS, fluid_family
from .pde_core import CandidateSolution, SystemSpec

SYSTEM_IDS = ("fluid", "example1", "example2", "example3", "custom")

FAMILY_TABLE = {
    "fluid": FAMILY_IDS,
    "example1": ("sech", "sech-printed", "cnoidal", "bounded-multisoliton"),
    "example2": ("closed-form",),
    "example3": ("mode",),
    "custom": ("expr",),
}

# short tags for known deviations from the textbook formulas, echoed in reports
ERRATA = {
    ("example1", "sech"): ["sech-source-sqrt"],
    ("example1", "cnoidal"): ["cnoidal-argument-scaled"],
    ("example1", "bounded-multisoliton"): ["cnoidal-argument-scaled"],
    ("example2", "closed-form"): ["example2-mu-one-only", "example2-integral-from-zero"],
    ("example3", "mode"): ["example3-no-denominator-solves"],
    ("fluid", "EE0b"): ["ee0b-general-gravity"],
    ("fluid", "EH0"): ["eh0-gravity-not-parallel"],
    ("fluid", "AH0"): ["ah0-alpha-quadratic"],
}


@dataclass
class Case:
    system_id: str
    family_id: str
    system: SystemSpec
    candidate: CandidateSolution
    box: tuple
    waves: Callable
    allow_dependent: bool = False
    errata: list = field(default_factory=list)
    constant_coefficients: bool = False


def _floats(v):
    if isinstance(v, str):
        return tuple(float(s) for s in v.split(","))
    return tuple(float(s) for s in v)


def _fluid(family_id, params):
    fam = fluid_family(family_id, **params)
    return Case("fluid", family_id, fam.system, fam.candidate(), fam.sampling_box(), fam.wave_set)


def _example1(family_id, params):
    kw = dict(params)
    if "a" in kw:
        kw["a"] = _floats(kw["a"])
    if "moduli" in kw:
        kw["moduli"] = _floats(kw["moduli"])
    if "shifts" in kw:
        kw["shifts"] = tuple(kw["shifts"])
    cfg = ex1.Example1Config(variant=family_id, **kw)
    waves = ex1.waves(cfg)
    return Case("example1", family_id, ex1.example1_system(cfg), ex1.example1_family(cfg),
                ex1.sampling_box(cfg), lambda x: waves, True, constant_coefficients=True)


def _example2(family_id, params):
    kw = dict(params)
    if "a" in kw:
        kw["a"] = _floats(kw["a"])
    cfg = ex2.Example2Config(**kw)
    waves = ex2.waves(cfg)
    return Case("example2", family_id, ex2.example2_system(cfg), ex2.example2_family(cfg),
                ex2.sampling_box(cfg), lambda x: waves, constant_coefficients=True)


def _example3(family_id, params):
    cfg = ex3.Example3Config(**params)
    sys, _ = ex3.example3_systems(cfg)
    waves = ex3.waves()
    return Case("example3", family_id, sys, ex3.example3_family(cfg), ex3.sampling_box(cfg),
                lambda x: waves)


def _expr_matrix(rows, names, consts):
    return [[compile_expr(str(e), names, consts) for e in row] for row in rows]


def custom_system(spec: dict) -> SystemSpec:
    """System from expressions over the dependent variables.

    ``spec`` holds ``p``, ``q``, ``m``, ``variables`` (q names),
    ``coefficients`` (p x m x q expressions), ``source`` (m expressions) and
    optional ``constants``.
    """
    try:
        p, q, m = int(spec["p"]), int(spec["q"]), int(spec["m"])
        names = list(spec.get("variables") or [f"u{i + 1}" for i in range(q)])
        consts = {k: float(v) for k, v in spec.get("constants", {}).items()}
        coeffs = [_expr_matrix(mat, names, consts) for mat in spec["coefficients"]]
        source = [compile_expr(str(e), names, consts) for e in spec["source"]]
    except KeyError as exc:
        raise InputError(f"custom system is missing {exc.args[0]!r}") from None
    if len(names) != q or len(coeffs) != p or len(source) != m:
        raise InputError("custom system dimensions do not match p, q, m")

    def env(u):
        return dict(zip(names, np.asarray(u, dtype=float)))

    def coeff_fn(u):
        e = env(u)
        return np.array([[[np.real(f(**e)) for f in row] for row in mat] for mat in coeffs], dtype=float)

    def source_fn(u):
        e = env(u)
        return np.array([np.real(f(**e)) for f in source], dtype=float)

    return SystemSpec(p, q, m, coeff_fn, source_fn, lambda u: True, spec.get("name", "custom"))


def _custom(family_id, params):
    sys = custom_system(params["system"])
    xnames = list(params.get("coordinates") or [f"x{i + 1}" for i in range(sys.p)])
    consts = {k: float(v) for k, v in params["system"].get("constants", {}).items()}
    sol = [compile_expr(str(e), xnames, consts) for e in params["solution"]]
    wave_exprs = [[compile_expr(str(e), xnames, consts) for e in w] for w in params.get("waves", [])]

    def evaluate(x):
        e = dict(zip(xnames, x))
        return np.array([f(**e) for f in sol])

    def waves(x):
        e = dict(zip(xnames, x))
        return [np.array([f(**e) for f in w]) for w in wave_exprs]

    box = params.get("box", {"lo": [-1.0] * sys.p, "hi": [1.0] * sys.p})
    return Case("custom", family_id, sys, CandidateSolution(evaluate, name="custom"),
                (list(box["lo"]), list(box["hi"])), waves, True)


_BUILDERS = {"fluid": _fluid, "example1": _example1, "example2": _example2,
             "example3": _example3, "custom": _custom}


def build_case(system_id: str, family_id: str, params: dict | None = None) -> Case:
    """Look up and construct a case; unknown ids raise :class:`InputError`."""
    if system_id not in _BUILDERS:
        raise InputError(f"unknown system {system_id!r}; choose from {', '.join(SYSTEM_IDS)}")
    if family_id not in FAMILY_TABLE[system_id]:
        raise InputError(f"unknown family {family_id!r} for {system_id}; "
                         f"choose from {', '.join(FAMILY_TABLE[system_id])}")
    try:
        case = _BUILDERS[system_id](family_id, dict(params or {}))
    except TypeError as exc:
        raise InputError(f"bad parameters for {system_id}/{family_id}: {exc}") from None
    case.errata = list(ERRATA.get((system_id, family_id), []))
    return case


def default_cases() -> list:
    """Every built-in ``(system, family, params)`` in the verified suite."""
    out = [("fluid", f, {}) for f in FAMILY_IDS]
    out += [("example1", f, {}) for f in ("sech", "cnoidal", "bounded-multisoliton")]
    out += [("example2", "closed-form", {})]
    out += [("example3", "mode", {"f": "r"}), ("example3", "mode", {"f": "r^2+1"})]
    return out

"""Planar stationary compressible flow with vorticity source (Loewner system).

Original form, unknowns ``(u, v, rho)``::

    u_y - v_x = h1,    (rho u)_x + (rho v)_y = h2

With ``rho = exp(q)``, ``h1 = b1`` and ``h2 = rho b2`` it becomes the
underdetermined system in ``(u, v, q)``::

    u_y - v_x = b1,    u_x + v_y + u q_x + v q_y = b2

with ``b1 = kappa q (u^2 + v^2)``, ``b2 = 0``. The candidate mode solution
is built from an analytic ``f(r)``, ``r = x + i y``, with a denominator
``kappa |f|^d``; two values of ``d`` circulate (2 and 4) and
:func:`resolve_denominator` reports which, if any, satisfies the equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConstraintError, DomainError, InputError
from ..pde_core import BoxSampler, CandidateSolution, SystemSpec, verify_on_grid

DENOMINATORS = {"sq": 2, "quartic": 4}


@dataclass(frozen=True)
class Analytic:
    f: Callable
    df: Callable
    label: str = ""


ANALYTIC = {
    "r": Analytic(lambda r: r, lambda r: 1.0 + 0 * r, "r"),
    "r^2+1": Analytic(lambda r: r * r + 1, lambda r: 2 * r, "r^2+1"),
    "exp(r)/3+r": Analytic(lambda r: np.exp(r) / 3 + r, lambda r: np.exp(r) / 3 + 1, "exp(r)/3+r"),
    "const": Analytic(lambda r: 0.5 + 0 * r, lambda r: 0 * r, "const"),
}


@dataclass
class Example3Config:
    kappa: float = 1.0
    f: object = "r"
    denominator: str = "quartic"

    def __post_init__(self):
        if self.kappa == 0:
            raise ConstraintError("kappa must be nonzero")
        if isinstance(self.f, str):
            try:
                self.f = ANALYTIC[self.f]
            except KeyError:
                raise InputError(f"unknown analytic function {self.f!r}") from None
        if self.denominator not in DENOMINATORS:
            raise InputError(f"denominator must be one of {sorted(DENOMINATORS)}")


def example3_systems(cfg: Example3Config):
    """``(transformed, original)`` systems."""
    k = cfg.kappa

    def coeffs_t(u):
        return np.array([[[0.0, -1.0, 0.0], [1.0, 0.0, u[0]]],
                         [[1.0, 0.0, 0.0], [0.0, 1.0, u[1]]]])

    def source_t(u):
        return np.array([k * u[2] * (u[0] ** 2 + u[1] ** 2), 0.0])

    def coeffs_o(u):
        rho = u[2]
        return np.array([[[0.0, -1.0, 0.0], [rho, 0.0, u[0]]],
                         [[1.0, 0.0, 0.0], [0.0, rho, u[1]]]])

    def source_o(u):
        rho = u[2]
        return np.array([k * np.log(rho) * (u[0] ** 2 + u[1] ** 2), rho * 0.0])

    transformed = SystemSpec(2, 3, 2, coeffs_t, source_t, lambda u: True, "example3[u,v,q]")
    original = SystemSpec(2, 3, 2, coeffs_o, source_o, lambda u: bool(u[2] > 0), "example3[u,v,rho]")
    return transformed, original


def _fields(cfg: Example3Config, x):
    r = complex(x[0], x[1])
    fv = cfg.f.f(r)
    if abs(fv) <= 1e-12:
        raise DomainError(f"example3: f vanishes at {list(x)}")
    d = DENOMINATORS[cfg.denominator]
    dfv = cfg.f.df(r)
    den = cfg.kappa * abs(fv) ** d
    u = (1j * (np.conj(dfv) - dfv) / den).real
    v = ((np.conj(dfv) + dfv) / den).real
    return u, v, abs(fv) ** 2


def example3_family(cfg: Example3Config, original: bool = False) -> CandidateSolution:
    """Mode solution in ``(u, v, q)`` (or ``(u, v, rho)`` when ``original``)."""

    def evaluate(x):
        u, v, q = _fields(cfg, x)
        return np.array([u, v, np.exp(q) if original else q])

    def domain(x):
        return abs(cfg.f.f(complex(x[0], x[1]))) > 1e-6

    return CandidateSolution(evaluate, domain, name=f"example3[{cfg.f.label},{cfg.denominator}]")


def sampling_box(cfg: Example3Config):
    return [0.5, 0.5], [1.5, 1.5]


def waves() -> list:
    return [np.array([1.0, 1j])]


def resolve_denominator(cfg: Example3Config, n: int = 50, seed: int = 0, tol: float = 1e-6) -> dict:
    """Residual of both denominator choices on the transformed system.

    Returns ``{"sq": max_residual, "quartic": max_residual, "chosen": name,
    "vanishes": bool}``; the chosen variant is the one with the smaller
    residual, ``vanishes`` tells whether it actually meets ``tol``.
    """
    sys, _ = example3_systems(cfg)
    lo, hi = sampling_box(cfg)
    out = {}
    for name in DENOMINATORS:
        trial = Example3Config(cfg.kappa, cfg.f, name)
        rep = verify_on_grid(sys, example3_family(trial), BoxSampler(lo, hi, seed), n, tol=tol)
        out[name] = rep.max
    chosen = min(DENOMINATORS, key=lambda k: out[k])
    out["chosen"] = chosen
    out["vanishes"] = bool(out[chosen] <= tol)
    return out

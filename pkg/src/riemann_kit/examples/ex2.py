"""The system ``U_t + a x (curl U) = (kappa a2, -kappa a1, exp(w))``.

The closed-form solution depends on a real invariant ``r1 = t + z/a3`` and
a complex invariant ``r2 = x + i mu y`` through a potential ``H(r2, conj r2)``
and two real profiles ``f1, f2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .. import profiles
from ..errors import ConstraintError, DomainError, InputError
from ..pde_core import CandidateSolution, SystemSpec


@dataclass(frozen=True)
class Potential:
    """Complex potential ``H(r, rbar)`` with its two partial derivatives."""

    value: Callable
    d_r: Callable
    d_rbar: Callable
    label: str = ""


POTENTIALS = {
    "r2*r2bar": Potential(lambda r, rb: r * rb, lambda r, rb: rb, lambda r, rb: r, "r2*r2bar"),
    "r2^2": Potential(lambda r, rb: r * r, lambda r, rb: 2 * r, lambda r, rb: 0 * r, "r2^2"),
    "r2^3+r2bar^3": Potential(lambda r, rb: r ** 3 + rb ** 3, lambda r, rb: 3 * r * r,
                              lambda r, rb: 3 * rb * rb, "r2^3+r2bar^3"),
}


@dataclass
class Example2Config:
    a: tuple = (1.0, 1.0, 1.0)
    kappa: float = 1.0
    mu: float = 1.0
    c0: float = 1.0
    c1: float = -2.0
    potential: object = "r2*r2bar"
    f1: object = 0.0
    f2: object = 0.0

    def __post_init__(self):
        self.a = tuple(float(v) for v in self.a)
        if self.a[2] == 0:
            raise ConstraintError("a3 must be nonzero")
        if self.mu == 0:
            raise ConstraintError("mu must be nonzero")
        if isinstance(self.potential, str):
            try:
                self.potential = POTENTIALS[self.potential]
            except KeyError:
                raise InputError(f"unknown potential {self.potential!r}") from None
        self.f1 = profiles.from_spec(self.f1)
        self.f2 = profiles.from_spec(self.f2)


def coefficient_matrices(a) -> np.ndarray:
    a1, a2, a3 = a
    return np.array([
        np.eye(3),
        [[0.0, a2, a3], [0.0, -a1, 0.0], [0.0, 0.0, -a1]],
        [[-a2, 0.0, 0.0], [a1, 0.0, a3], [0.0, 0.0, -a2]],
        [[-a3, 0.0, 0.0], [0.0, -a3, 0.0], [a1, a2, 0.0]],
    ])


def example2_system(cfg: Example2Config) -> SystemSpec:
    mats = coefficient_matrices(cfg.a)
    a1, a2, _ = cfg.a
    k = cfg.kappa

    def source(u):
        return np.array([k * a2, -k * a1, np.exp(u[2])])

    return SystemSpec(4, 3, 3, lambda u: mats, source, lambda u: True, "example2")


def invariants(cfg: Example2Config, x):
    """``(r1, r2)`` with ``r1`` real and ``r2`` complex."""
    t, xx, y, z = np.asarray(x, dtype=float)
    return t + z / cfg.a[2], xx + 1j * cfg.mu * y


def reality_defect(cfg: Example2Config, points) -> float:
    """Max of ``|dH/dr2 - conj(dH/dr2bar)|`` over ``(x, y)`` points."""
    pot = cfg.potential
    worst = 0.0
    for xx, y in np.atleast_2d(points):
        r = xx + 1j * cfg.mu * y
        worst = max(worst, abs(pot.d_r(r, np.conj(r)) - np.conj(pot.d_rbar(r, np.conj(r)))))
    return float(worst)


def _exponent(cfg, s):
    a1, a2, a3 = cfg.a
    return (a1 * cfg.f1(s) / cfg.mu + a2 * cfg.f2(s)) / a3


def complex_state(cfg: Example2Config, x) -> np.ndarray:
    """``(u, v, w)`` before taking the real part."""
    r1, r2 = invariants(cfg, x)
    rb = np.conj(r2)
    pot, mu, k = cfg.potential, cfg.mu, cfg.kappa
    hr, hb = pot.d_r(r2, rb), pot.d_rbar(r2, rb)
    u = cfg.c0 / (2 * mu) * (hr + hb) + cfg.f1(r1) / mu - 1j * k / 4 * (rb - r2) / mu
    v = 1j * cfg.c0 / 2 * (hr - hb) + cfg.f2(r1) / mu + k / 4 * (r2 + rb) / mu
    integral, _ = quad(lambda s: np.exp(-_exponent(cfg, s)), 0.0, r1, epsabs=1e-13, epsrel=1e-13)
    arg = -cfg.c1 - integral
    if not arg > 0:
        raise DomainError(f"example2: logarithm argument {arg} <= 0 at {list(x)}")
    w = -_exponent(cfg, r1) - np.log(arg)
    return np.array([u, v, w], dtype=complex)


def example2_family(cfg: Example2Config) -> CandidateSolution:
    def evaluate(x):
        return complex_state(cfg, x)

    def domain(x):
        r1 = x[0] + x[3] / cfg.a[2]
        integral, _ = quad(lambda s: np.exp(-_exponent(cfg, s)), 0.0, r1)
        return bool(-cfg.c1 - integral > 1e-3)

    return CandidateSolution(evaluate, domain, name="example2")


def sampling_box(cfg: Example2Config):
    # keeps r1 in [-1, 1], well away from the log blow-up of w near r1 = -c1
    h = 0.5 * abs(cfg.a[2])
    return [-0.5, -1.0, -1.0, -h], [0.5, 1.0, 1.0, h]


def waves(cfg: Example2Config) -> list:
    return [np.array([1.0, 0.0, 0.0, 1.0 / cfg.a[2]]), np.array([0.0, 1.0, 1j * cfg.mu, 0.0])]

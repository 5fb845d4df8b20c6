"""Closed-form rank-2 fluid solutions: a simple wave superposed on a simple state.

Each family is defined by two implicit relations ``R(r, x) = 0`` for the
invariants ``r = (r0, r1)``, an explicit state ``u(r)`` and the two wave
vectors ``lambda^0(r), lambda^1(r)`` (the gradients of ``r0`` and ``r1`` up
to scale). Evaluating a family at ``x`` means solving the relations with
damped Newton and substituting.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .. import profiles
from ..errors import ConstraintError, DomainError, ImplicitSolveError, InputError
from ..newton import newton_solve
from ..pde_core import CandidateSolution
from .system import FluidParams, fluid_system

FAMILY_IDS = ("EE0a", "EE0b", "EA0", "EH0", "AH0")
PROBE = (-0.5, 0.0, 0.5)


def _integral(fun, upper):
    val, _ = quad(fun, 0.0, upper, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _unit(v, what):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1) > 1e-12:
        raise ConstraintError(f"{what} must be a unit vector (norm {n})")
    return v


class ClosedFormFamily:
    """Base class; subclasses define relations, state and waves."""

    id = ""
    box = ((-0.3, 0.3),) * 4

    def __init__(self, params: FluidParams, guess=(0.0, 0.0)):
        self.params = params
        self.system = fluid_system(params)
        self.guess = np.asarray(guess, dtype=float)
        self.check_constraints()

    # subclasses -------------------------------------------------------
    def relations(self, r, x):
        raise NotImplementedError

    def state(self, r):
        raise NotImplementedError

    def waves(self, r):
        raise NotImplementedError

    def check_constraints(self):
        pass

    def check_point(self, r, u):
        if not (u[0] > 0 and u[1] > 0):
            raise DomainError(f"{self.id}: non-positive density or pressure at r={list(r)}")

    # shared -----------------------------------------------------------
    def solve_invariants(self, x, guess=None):
        x = np.asarray(x, dtype=float)
        g = self.guess if guess is None else np.asarray(guess, dtype=float)
        return newton_solve(lambda r: self.relations(r, x), g, scale=1 + np.linalg.norm(x))

    def evaluate(self, x):
        r = self.solve_invariants(x)
        u = np.asarray(self.state(r), dtype=float)
        self.check_point(r, u)
        return u

    def wave_set(self, x):
        return list(self.waves(self.solve_invariants(x)))

    def candidate(self) -> CandidateSolution:
        return CandidateSolution(self.evaluate, name=self.id)

    def sampling_box(self):
        lo, hi = zip(*self.box)
        return list(lo), list(hi)


def solve_invariants(family: ClosedFormFamily, x, guess=None):
    """Invariants ``(r0, r1)`` at ``x`` for a fluid family."""
    return family.solve_invariants(x, guess)


def _positive(fun, what):
    for s in PROBE:
        if not fun(s) > 0:
            raise ConstraintError(f"{what} must be positive (fails at {s})")


def _nonzero(fun, what):
    if all(abs(fun(s)) <= 1e-14 for s in PROBE):
        raise ConstraintError(f"{what} must not vanish identically")


class EE0a(ClosedFormFamily):
    """Entropic wave on an entropic state, gravity ``(0, 0, g)``.

    The constants ``c0 = g / (1 + g^4)`` and ``exp(phi0) = 1/c0`` are fixed.
    ``sign`` selects the correlated sign pair.
    """

    id = "EE0a"

    def __init__(self, g=1.0, omega=(1.0, 0.0, 0.0), kappa=1.4, sign=1, c1=0.0,
                 pressure=None, v2=None, chi=None, a1=None, a3=None, psi=None, **kw):
        self.gvec = np.array([0.0, 0.0, float(g)])
        self.om = _unit(omega, "Omega")
        if abs(np.dot(self.om, self.gvec)) > 1e-12:
            raise ConstraintError("Omega must be orthogonal to g")
        if sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        self.sign = sign
        self.c1 = float(c1)
        self.pressure = profiles.from_spec(pressure if pressure is not None else {"poly": [2.0, 1.0]})
        self.v2 = profiles.from_spec(v2 if v2 is not None else {"poly": [0.0, 1.0]})
        self.chi = chi if chi is not None else (lambda r0, r1: 0.0)
        self.a1 = profiles.from_spec(a1 if a1 is not None else 1.0)
        self.a3 = profiles.from_spec(a3 if a3 is not None else 0.0)
        self.psi = profiles.from_spec(psi if psi is not None else {"poly": [0.0, 1.0]})
        g2 = float(g) ** 2
        self.c0 = g / (1 + g ** 4)
        self.ephi = 1 / self.c0
        self.s = np.sqrt(g2 - self.c0 ** 2)
        self.g2 = g2
        self.gxo = np.cross(self.gvec, self.om)
        super().__init__(FluidParams(kappa, tuple(self.gvec), tuple(self.om)), **kw)

    def check_constraints(self):
        _positive(self.pressure.d, "dp/dr0")
        _nonzero(self.v2.d, "dv2/dr1")
        for r1 in PROBE:
            if abs(self.sign * self.s * self.a3(r1) + self.c0 * self.a1(r1)) <= 1e-14:
                raise ConstraintError("sign*s*a3 + c0*a1 must not vanish")

    def _chi_integral(self, r0, r1):
        return _integral(lambda s: self.chi(s, r1), r0)

    def _lam0(self):
        sp = (self.sign * self.s * self.gvec - self.c0 * self.gxo) / self.g2
        return self.ephi * np.concatenate([[self.c0], sp])

    def relations(self, r, x):
        r0, r1 = r
        t, xs = x[0], x[1:]
        sg = self.sign * self.s
        rel0 = (self.c0 * t + sg * np.dot(self.gvec, xs) / self.g2
                - self.c0 * np.dot(self.gxo, xs) / self.g2 + self.c1 - r0 / self.ephi)
        a1, a3 = self.a1(r1), self.a3(r1)
        coef_t = self.ephi * (sg * a3 + self.c0 * a1) - a3 * self.g2
        rel1 = (self._chi_integral(r0, r1) / self.ephi + coef_t * t
                + a1 * np.dot(self.gvec, xs) + a3 * np.dot(self.gxo, xs) - self.psi(r1))
        return np.array([rel0, rel1])

    def state(self, r):
        r0, r1 = r
        v = (-self.ephi * self.c0 * self.gvec / self.g2 + self.v2(r1) * self.om
             + (1 - self.sign * self.ephi * self.s / self.g2) * self.gxo)
        return np.concatenate([[self.pressure.d(r0), self.pressure(r0)], v])

    def waves(self, r):
        r0, r1 = r
        lam0 = self._lam0()
        a1, a3 = self.a1(r1), self.a3(r1)
        coef_t = self.ephi * (self.sign * self.s * a3 + self.c0 * a1) - a3 * self.g2
        lam1 = np.concatenate([[coef_t], a1 * self.gvec + a3 * self.gxo])
        return lam0, lam1 + self.chi(r0, r1) / self.ephi * lam0


class EE0b(ClosedFormFamily):
    """Entropic wave on an entropic state with ``g . Omega != 0``."""

    id = "EE0b"

    def __init__(self, gravity=(0.0, 0.5, 1.0), omega=(0.0, 0.0, 1.0), kappa=1.4, c=0.0,
                 pressure=None, v1=None, v3=None, phi=None, **kw):
        self.gvec = np.asarray(gravity, dtype=float)
        self.om = _unit(omega, "Omega")
        self.go = float(np.dot(self.gvec, self.om))
        if abs(self.go) <= 1e-12:
            raise ConstraintError("this family needs g . Omega != 0")
        self.g2 = float(np.dot(self.gvec, self.gvec))
        self.gxo = np.cross(self.gvec, self.om)
        self.c = float(c)
        self.pressure = profiles.from_spec(pressure if pressure is not None else {"poly": [2.0, 1.0]})
        self.v1 = profiles.from_spec(v1 if v1 is not None else {"poly": [0.0, 1.0]})
        self.v3 = profiles.from_spec(v3 if v3 is not None else {"poly": [0.0, 0.3, 0.2]})
        self.phi = phi if phi is not None else profiles.Smooth(
            lambda s: 0.5 * s * s, lambda s: s, "s^2/2")
        self.phi = profiles.from_spec(self.phi)
        self._ints = lru_cache(maxsize=4096)(self._integrals)
        super().__init__(FluidParams(kappa, tuple(self.gvec), tuple(self.om)), **kw)

    def check_constraints(self):
        _positive(self.pressure.d, "dp/dr0")
        if all(abs(self.v1.d(s)) + abs(self.v3.d(s)) <= 1e-14 for s in PROBE):
            raise ConstraintError("v1 and v3 cannot both be constant")

    def _integrals(self, r1):
        v1, v3 = self.v1, self.v3
        i1 = _integral(lambda s: v1.d(s) * (1 - v3(s)) + v3.d(s) * v1(s), r1)
        i2 = _integral(lambda s: v1.d(s) * v3(s) - v1(s) * v3.d(s), r1)
        return i1, i2

    def _k_n(self, r1):
        i1, i2 = self._ints(float(r1))
        v1, v3 = self.v1(r1), self.v3(r1)
        k = -v1 * self.g2 + self.g2 * i1 + self.go ** 2 * i2 - self.c * self.go
        n = (1 - v3) * self.gvec + v3 * self.go * self.om + v1 * self.gxo
        return k, n

    def _dk_dn(self, r1):
        v1, v3, dv1, dv3 = self.v1(r1), self.v3(r1), self.v1.d(r1), self.v3.d(r1)
        dk = (self.go ** 2 - self.g2) * (dv1 * v3 - v1 * dv3)
        dn = -dv3 * self.gvec + dv3 * self.go * self.om + dv1 * self.gxo
        return dk, dn

    def relations(self, r, x):
        r0, r1 = r
        k, n = self._k_n(r1)
        dk, dn = self._dk_dn(r1)
        return np.array([k * x[0] + np.dot(n, x[1:]) - self.phi(r1) - r0,
                         dk * x[0] + np.dot(dn, x[1:]) - self.phi.d(r1)])

    def state(self, r):
        r0, r1 = r
        i1, i2 = self._ints(float(r1))
        big_v2 = -self.g2 * i1 / self.go - self.go * i2 + self.c
        v = self.v1(r1) * self.gvec + big_v2 * self.om + self.v3(r1) * self.gxo
        return np.concatenate([[self.pressure.d(r0), self.pressure(r0)], v])

    def waves(self, r):
        k, n = self._k_n(r[1])
        dk, dn = self._dk_dn(r[1])
        return np.concatenate([[k], n]), np.concatenate([[dk], dn])


class EA0(ClosedFormFamily):
    """Entropic wave on an acoustic state; constant density and pressure."""

    id = "EA0"

    def __init__(self, g=1.0, omega=(1.0, 0.0, 0.0), kappa=1.4, rho0=1.0, p0=1.0,
                 b0=0.0, c1=0.0, epsilon=1, epsilon1=1, b1=None, b2=None, phi=None, psi=None, **kw):
        self.gvec = np.array([0.0, 0.0, float(g)])
        self.om = _unit(omega, "Omega")
        if abs(self.om[2]) > 1e-12:
            raise ConstraintError("Omega must be horizontal, (Omega1, Omega2, 0)")
        if not (rho0 > 0 and p0 > 0):
            raise ConstraintError("rho0 and p0 must be positive")
        self.rho0, self.p0 = float(rho0), float(p0)
        self.cs = np.sqrt(kappa * p0 / rho0)
        self.b0, self.c1 = float(b0), float(c1)
        self.eps, self.eps1 = epsilon, epsilon1
        self.b1 = profiles.from_spec(b1 if b1 is not None else 0.0)
        self.b2 = profiles.from_spec(b2 if b2 is not None else {"poly": [1.0, 1.0]})
        self.phi = profiles.from_spec(phi if phi is not None else 0.0)
        self.psi = profiles.from_spec(psi if psi is not None else {"poly": [0.0, 1.0]})
        self.gxo = np.cross(self.gvec, self.om)
        self._int = lru_cache(maxsize=4096)(
            lambda r0: _integral(lambda s: np.exp(-self.phi(s)), r0))
        super().__init__(FluidParams(kappa, tuple(self.gvec), tuple(self.om)), **kw)

    def check_constraints(self):
        _nonzero(self.b2, "b2")
        _nonzero(self.b2.d, "db2/dr1")

    def relations(self, r, x):
        r0, r1 = r
        t, xs = x[0], x[1:]
        w = np.dot(self.om, xs)
        return np.array([
            (self.eps * self.cs - self.eps1 * self.b0) * t + self.eps1 * w + self.c1 - self._int(float(r0)),
            self.b0 * t - w - self.psi(r1),
        ])

    def state(self, r):
        r0, r1 = r
        theta = self.eps * self._int(float(r0)) / self.cs + self.b1(r1)
        b2 = self.b2(r1)
        v = b2 * np.cos(theta) * self.gvec + self.b0 * self.om + (b2 * np.sin(theta) + 1) * self.gxo
        return np.concatenate([[self.rho0, self.p0], v])

    def waves(self, r):
        lam0 = np.exp(self.phi(r[0])) * np.concatenate(
            [[self.eps * self.cs - self.eps1 * self.b0], self.eps1 * self.om])
        return lam0, np.concatenate([[self.b0], -self.om])


class EH0(ClosedFormFamily):
    """Entropic wave on a hydrodynamic state; constant pressure.

    ``c`` is a unit vector orthogonal to ``Omega``; the state wave is
    ``exp(phi) (0, c)``. Requires ``G2 = g.Omega != 0`` and
    ``G3 = g.(c x Omega) != 0``, and ``db/dr1 * a2 = 0``.
    """

    id = "EH0"

    def __init__(self, gravity=(0.0, 0.5, 1.0), omega=(0.0, 0.0, 1.0), c=(1.0, 0.0, 0.0),
                 kappa=1.4, p0=1.0, rho=None, phi=None, psi=None, b=None, a=None,
                 a1=None, a2=None, a3=None, **kw):
        self.gvec = np.asarray(gravity, dtype=float)
        self.om = _unit(omega, "Omega")
        self.cv = _unit(c, "c")
        if abs(np.dot(self.cv, self.om)) > 1e-12:
            raise ConstraintError("c must be orthogonal to Omega")
        self.cxo = np.cross(self.cv, self.om)
        self.G1 = float(np.dot(self.gvec, self.cv))
        self.G2 = float(np.dot(self.gvec, self.om))
        self.G3 = float(np.dot(self.gvec, self.cxo))
        if abs(self.G2) <= 1e-12:
            raise ConstraintError("this family needs g . Omega != 0")
        if abs(self.G3) <= 1e-12:
            raise ConstraintError("this family needs g . (c x Omega) != 0")
        self.p0 = float(p0)
        self.rho = profiles.from_spec(rho if rho is not None else {"poly": [2.0, 1.0]})
        self.phi = profiles.from_spec(phi if phi is not None else 0.0)
        self.psi = profiles.from_spec(psi if psi is not None else {"poly": [0.0, 1.0]})
        self.b = profiles.from_spec(b if b is not None else 0.2)
        self.a = profiles.from_spec(a if a is not None else 1.0)
        self.a1 = profiles.from_spec(a1 if a1 is not None else {"poly": [0.5, 0.2]})
        self.a2 = profiles.from_spec(a2 if a2 is not None else 1.0)
        self.a3 = profiles.from_spec(a3 if a3 is not None else 0.3)
        self._int = lru_cache(maxsize=4096)(
            lambda r0: _integral(lambda s: np.exp(-self.phi(s)), r0))
        super().__init__(FluidParams(kappa, tuple(self.gvec), tuple(self.om)), **kw)

    def check_constraints(self):
        if not self.p0 > 0:
            raise ConstraintError("p0 must be positive")
        _positive(self.rho, "rho")
        _nonzero(self.rho.d, "drho/dr1")
        for s in PROBE:
            if abs(self.b.d(s) * self.a2(s)) > 1e-12:
                raise ConstraintError("db/dr1 * a2 must vanish")
        if all(abs(self.a(s)) + abs(self.a2(s)) + abs(self.a3(s)) <= 1e-14 for s in PROBE):
            raise ConstraintError("a, a2, a3 cannot all vanish")

    def _chi(self, r0, r1):
        return ((self.a(r1) - self.G3 * self.a1(r1) + self.b(r1) * self.a2(r1)
                 + self.G1 * self.a3(r1)) / self.G3
                - self.a2(r1) * self.G2 * self._int(float(r0)) / self.G3 ** 2)

    def relations(self, r, x):
        r0, r1 = r
        t, xs = x[0], x[1:]
        cx = np.dot(self.cv, xs)
        a, a1, a2, a3 = self.a(r1), self.a1(r1), self.a2(r1), self.a3(r1)
        w = cx / self.G3
        return np.array([
            cx - self._int(float(r0)),
            w * (a - self.G3 * a1 + self.b(r1) * a2 + self.G1 * a3) - 0.5 * self.G2 * a2 * w * w
            + a * t + np.dot(a1 * self.cv + a2 * self.om + a3 * self.cxo, xs) - self.psi(r1),
        ])

    def state(self, r):
        r0, r1 = r
        v = (-self.G3 * self.cv + (-self.G2 / self.G3 * self._int(float(r0)) + self.b(r1)) * self.om
             + self.G1 * self.cxo)
        return np.concatenate([[self.rho(r1), self.p0], v])

    def waves(self, r):
        r0, r1 = r
        lam0 = np.exp(self.phi(r0)) * np.concatenate([[0.0], self.cv])
        sp = self.a1(r1) * self.cv + self.a2(r1) * self.om + self.a3(r1) * self.cxo
        lam1 = np.concatenate([[self.a(r1)], sp + self._chi(r0, r1) * self.cv])
        return lam0, lam1


class AH0(ClosedFormFamily):
    """Acoustic wave on a hydrodynamic state, ``kappa = 3``, ``p = a rho^3``.

    The velocity component ``alpha`` along ``c`` solves a quadratic in
    ``B = (alpha + G3)^2``; the root is chosen once near ``alpha_seed`` at
    the invariant origin and that branch is kept.
    """

    id = "AH0"

    def __init__(self, gravity=(0.3, 0.4, 0.0), omega=(0.0, 0.0, 1.0), c=(1.0, 0.0, 0.0),
                 a=1.0 / 3.0, b1=0.1, t1=0.0, s1=-3.0, c1=0.0, epsilon=1,
                 big_s=None, phi=None, psi=None, alpha_seed=None, **kw):
        self.gvec = np.asarray(gravity, dtype=float)
        self.om = _unit(omega, "Omega")
        self.cv = _unit(c, "c")
        if abs(np.dot(self.cv, self.om)) > 1e-12:
            raise ConstraintError("c must be orthogonal to Omega")
        if abs(np.dot(self.gvec, self.om)) > 1e-12:
            raise ConstraintError("this family needs g . Omega = 0")
        if not a > 0:
            raise ConstraintError("a must be positive")
        self.cxo = np.cross(self.cv, self.om)
        self.G1 = float(np.dot(self.gvec, self.cv))
        self.G3 = float(np.dot(self.gvec, self.cxo))
        self.a, self.b1, self.t1, self.s1, self.c1 = float(a), float(b1), float(t1), float(s1), float(c1)
        self.eps = epsilon
        self.root3a = np.sqrt(3 * self.a)
        self.S = profiles.from_spec(big_s if big_s is not None else {"poly": [1.0, 0.2]})
        self.phi = profiles.from_spec(phi if phi is not None else 0.0)
        self.psi = profiles.from_spec(psi if psi is not None else {"poly": [0.0, 1.0]})
        self._int = lru_cache(maxsize=4096)(
            lambda r0: _integral(lambda s: np.exp(-self.phi(s)), r0))
        self.branch = 1.0
        self._check_s()
        pair = self._beta_pair(0.0, 0.0)
        seed = pair[0] - self.G3 if alpha_seed is None else float(alpha_seed)
        self.branch = 1.0 if abs(pair[0] - self.G3 - seed) <= abs(pair[1] - self.G3 - seed) else -1.0
        super().__init__(FluidParams(3.0, tuple(self.gvec), tuple(self.om)), **kw)

    def _check_s(self):
        _nonzero(self.S, "S")
        for s in PROBE:
            if abs(self.S.d(s)) <= 1e-14:
                raise ConstraintError(f"dS/dr1 must not vanish (fails at {s})")

    def _coeffs(self, r0, r1):
        i = self._int(float(r0))
        S = self.S(r1)
        c0 = self.eps * self.root3a * S + self.s1 - (self.G1 - self.t1) * i + 0.5 * i * i
        return c0, 3 * self.a * S * S, S

    def _beta_pair(self, r0, r1):
        c0, q, S = self._coeffs(r0, r1)
        disc = c0 * c0 - q
        if disc < 0:
            raise ImplicitSolveError(f"no real alpha: negative discriminant at r=({r0}, {r1})", (r0, r1))
        out = []
        for sgn in (1.0, -1.0):
            big_b = -c0 + sgn * np.sqrt(disc)
            out.append(np.sign(S) * np.sqrt(big_b) if big_b > 0 else np.nan)
        return out

    def beta(self, r0, r1):
        c0, q, S = self._coeffs(r0, r1)
        disc = c0 * c0 - q
        if disc < 0:
            raise ImplicitSolveError(f"no real alpha: negative discriminant at r=({r0}, {r1})", (r0, r1))
        big_b = -c0 + self.branch * np.sqrt(disc)
        if not big_b > 0:
            raise ImplicitSolveError(f"no real alpha on the selected branch at r=({r0}, {r1})", (r0, r1))
        return np.sign(S) * np.sqrt(big_b)

    def alpha(self, r0, r1):
        return self.beta(r0, r1) - self.G3

    def alpha_r1(self, r0, r1):
        beta = self.beta(r0, r1)
        S, dS = self.S(r1), self.S.d(r1)
        dq_dalpha = beta - 3 * self.a * S * S / beta ** 3
        dq_dr1 = 3 * self.a * S * dS / beta ** 2 + self.eps * self.root3a * dS
        return -dq_dr1 / dq_dalpha

    def quadratic_residual(self, r0, r1):
        """Residual of the alpha equation in its printed (non-polynomial) form."""
        beta = self.beta(r0, r1)
        i = self._int(float(r0))
        S = self.S(r1)
        return (0.5 * beta ** 2 + self.eps * self.root3a * S + 1.5 * self.a * S * S / beta ** 2
                + self.s1 - (self.G1 - self.t1) * i + 0.5 * i * i)

    def relations(self, r, x):
        r0, r1 = r
        t, xs = x[0], x[1:]
        dS = self.S.d(r1)
        j = _integral(lambda s: np.exp(-self.phi(s)) * self.alpha_r1(s, r1), r0)
        return np.array([
            self.G3 * t + np.dot(self.cv, xs) + self.c1 - self._int(float(r0)),
            t + self.eps / (self.root3a * dS) * j - self.psi(r1),
        ])

    def state(self, r):
        r0, r1 = r
        beta = self.beta(r0, r1)
        rho = self.S(r1) / beta
        v = (beta - self.G3) * self.cv + self.b1 * self.om + (self._int(float(r0)) + self.t1) * self.cxo
        return np.concatenate([[rho, self.a * rho ** 3], v])

    def waves(self, r):
        r0, r1 = r
        lam0 = np.exp(self.phi(r0)) * np.concatenate([[self.G3], self.cv])
        kp = self.eps * self.alpha_r1(r0, r1) / (self.root3a * self.S.d(r1))
        return lam0, np.concatenate([[1 + kp * self.G3], kp * self.cv])


FAMILIES = {"EE0a": EE0a, "EE0b": EE0b, "EA0": EA0, "EH0": EH0, "AH0": AH0}


def fluid_family(family_id: str, **kwargs) -> ClosedFormFamily:
    """Construct a fluid family by id with keyword constants and free functions."""
    try:
        cls = FAMILIES[family_id]
    except KeyError:
        raise InputError(f"unknown fluid family {family_id!r}") from None
    return cls(**kwargs)

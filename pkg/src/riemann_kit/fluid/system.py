"""Inhomogeneous compressible fluid with gravity and Coriolis force.

Unknowns ``u = (rho, p, v1, v2, v3)``, coordinates ``x = (t, x, y, z)``.
Equations, in this order::

    rho (v_t + (v.grad) v) + grad p = rho (v x Omega + g)
    rho_t + v.grad rho + rho div v = 0
    rho (p_t + v.grad p) - kappa p (rho_t + v.grad rho) = 0

The entropy equation is multiplied through by ``rho`` so every coefficient
is polynomial in the state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chardata import IntegralElement, WaveVector
from ..errors import ConstraintError, DegeneracyError, InputError
from ..pde_core import SystemSpec

RHO, P, V = 0, 1, slice(2, 5)


@dataclass(frozen=True)
class FluidParams:
    kappa: float = 1.4
    gravity: tuple = (0.0, 0.0, 0.0)
    omega: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.kappa > 0:
            raise InputError("kappa must be positive")
        object.__setattr__(self, "gravity", tuple(float(v) for v in self.gravity))
        object.__setattr__(self, "omega", tuple(float(v) for v in self.omega))

    @property
    def g(self) -> np.ndarray:
        return np.array(self.gravity)

    @property
    def w(self) -> np.ndarray:
        return np.array(self.omega)


@dataclass(frozen=True)
class FluidState:
    rho: float
    p: float
    v: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.rho > 0 and self.p > 0):
            raise InputError("density and pressure must be positive")
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))

    @property
    def u(self) -> np.ndarray:
        return np.array([self.rho, self.p, *self.v])

    @classmethod
    def from_u(cls, u) -> "FluidState":
        return cls(float(u[0]), float(u[1]), tuple(u[2:5]))

    def sound_speed(self, kappa: float) -> float:
        return float(np.sqrt(kappa * self.p / self.rho))


def _coeffs(kappa):
    def coeffs(u):
        rho, p = u[0], u[1]
        v = u[2:5]
        a = np.zeros((4, 5, 5))
        for j in range(4):
            vel = 1.0 if j == 0 else v[j - 1]
            for i in range(3):
                a[j, i, 2 + i] = rho * vel
            a[j, 3, RHO] = vel
            a[j, 4, RHO] = -kappa * p * vel
            a[j, 4, P] = rho * vel
            if j > 0:
                a[j, j - 1, P] = 1.0
                a[j, 3, 1 + j] = rho
        return a

    return coeffs


def fluid_system(params: FluidParams) -> SystemSpec:
    g, w = params.g, params.w

    def source(u):
        b = np.zeros(5)
        b[:3] = u[0] * (np.cross(u[2:5], w) + g)
        return b

    return SystemSpec(4, 5, 5, _coeffs(params.kappa), source,
                      lambda u: bool(u[0] > 0 and u[1] > 0), "fluid")


def delta_speed(state: FluidState, wave) -> float:
    """Propagation speed relative to the fluid, ``lambda_0 + v.lambda_vec``."""
    lam = np.asarray(getattr(wave, "components", wave))
    if np.iscomplexobj(lam):
        raise InputError("delta speed needs a real wave vector")
    return float(lam[0] + np.dot(state.v, lam[1:]))


def effective_gravity(state: FluidState, params: FluidParams) -> np.ndarray:
    """``g' = g - Omega x v``."""
    return params.g - np.cross(params.w, np.array(state.v))


def _unit_or_fail(vec, what):
    n = np.linalg.norm(vec)
    if n == 0:
        raise DegeneracyError(f"{what} must be nonzero")
    return n


def fluid_element(kind: str, state: FluidState, params: FluidParams, **opts) -> IntegralElement:
    """Construct one of the fluid integral elements.

    Parameters
    ----------
    kind : {"E", "A", "E0", "A0", "H0"}
    opts :
        ``direction`` (spatial wave vector), ``gamma_rho``, ``gamma_v``
        (E, orthogonal to the direction), ``epsilon`` (A, A0: +1 or -1),
        ``alpha`` (E0), ``speed`` (H0: the value of delta |lambda_vec|).
    """
    rho, p = state.rho, state.p
    v = np.array(state.v)
    kp = params.kappa * p
    c = np.sqrt(kp / rho)
    gp = effective_gravity(state, params)
    gr = float(opts.get("gamma_rho", 1.0))
    if kind in ("E", "A", "A0", "H0"):
        lv = np.asarray(opts["direction"], dtype=float)
        ln = _unit_or_fail(lv, "spatial wave vector")
    if kind == "E":
        gv = np.asarray(opts.get("gamma_v", np.zeros(3)), dtype=float)
        if abs(np.dot(gv, lv)) > 1e-10 * (1 + np.linalg.norm(gv)) * ln:
            raise ConstraintError("entropic element needs gamma_v orthogonal to the direction")
        lam = np.concatenate([[-np.dot(v, lv)], lv])
        gamma = np.concatenate([[gr, 0.0], gv])
        return IntegralElement(WaveVector(lam), gamma, "homogeneous", "E")
    if kind == "A":
        eps = float(opts.get("epsilon", 1.0))
        delta = eps * c
        lam = np.concatenate([[delta * ln - np.dot(v, lv)], lv])
        gamma = np.concatenate([[gr, kp / rho * gr], -delta * (lv / ln) * gr / rho])
        return IntegralElement(WaveVector(lam), gamma, "homogeneous", "A")
    if kind == "E0":
        _unit_or_fail(gp, "spatial part g - Omega x v of the entropic state wave")
        alpha = np.asarray(opts.get("alpha", np.zeros(3)), dtype=float)
        lam = np.concatenate([[-np.dot(v, gp)], gp])
        gamma = np.concatenate([[gr, rho], np.cross(alpha, gp)])
        return IntegralElement(WaveVector(lam), gamma, "inhomogeneous", "E0")
    if kind == "A0":
        if abs(np.dot(lv, gp)) > 1e-10 * ln * (1 + np.linalg.norm(gp)):
            raise ConstraintError("acoustic state needs direction . (g - Omega x v) = 0")
        eps = float(opts.get("epsilon", 1.0))
        speed = eps * c * ln
        lam = np.concatenate([[speed - np.dot(v, lv)], lv])
        gpress = kp / rho * gr
        gv = (rho * gp - gpress * lv) / (rho * speed)
        gamma = np.concatenate([[gr, gpress], gv])
        return IntegralElement(WaveVector(lam), gamma, "inhomogeneous", "A0")
    if kind == "H0":
        speed = float(opts["speed"])
        margin = 1e-6 * max(1.0, c * ln)
        if abs(speed) <= margin or abs(abs(speed) - c * ln) <= margin:
            raise ConstraintError("hydrodynamic state needs delta|lambda| not in {0, +-c|lambda|}")
        lam = np.concatenate([[speed - np.dot(v, lv)], lv])
        big_g = np.dot(gp, lv)
        den = speed ** 2 - kp / rho * ln ** 2
        gamma = np.concatenate([
            [-rho * big_g / den, -kp * big_g / den],
            (rho * gp + kp * big_g / den * lv) / (rho * speed),
        ])
        return IntegralElement(WaveVector(lam), gamma, "inhomogeneous", "H0")
    raise InputError(f"unknown element kind {kind!r}")


def classify(state: FluidState, params: FluidParams, wave, rtol: float = 1e-8) -> str:
    """Element type of a real wave vector by its relative speed."""
    lam = np.asarray(getattr(wave, "components", wave), dtype=float)
    ln = np.linalg.norm(lam[1:])
    d = delta_speed(state, lam)
    c = state.sound_speed(params.kappa) * ln
    scale = max(abs(d), c, 1e-300)
    if abs(d) <= rtol * scale:
        return "entropic"
    if abs(abs(d) - c) <= rtol * scale:
        return "acoustic"
    return "hydrodynamic"

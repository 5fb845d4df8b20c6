"""Smooth one-variable functions paired with their derivatives.

Family formulas consume derivatives explicitly (for example the density of
an entropic state is the derivative of the pressure profile), so every free
function is a :class:`Smooth` holding both evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InputError


@dataclass(frozen=True)
class Smooth:
    f: Callable[[float], float]
    df: Callable[[float], float]
    label: str = ""

    def __call__(self, s):
        return self.f(s)

    def d(self, s):
        return self.df(s)


def const(c: float) -> Smooth:
    c = float(c)
    return Smooth(lambda s: c + 0.0 * s, lambda s: 0.0 * s, f"const({c!r})")


def poly(coeffs: Sequence[float]) -> Smooth:
    """``sum_k coeffs[k] s^k``."""
    c = np.asarray(coeffs, dtype=float)
    dc = P.polyder(c) if c.size > 1 else np.zeros(1)
    return Smooth(lambda s: P.polyval(s, c), lambda s: P.polyval(s, dc), f"poly({c.tolist()})")


def sech(amp: float = 1.0, rate: float = 1.0, shift: float = 0.0) -> Smooth:
    """``amp * sech(rate*s + shift)``."""

    def f(s):
        return amp / np.cosh(rate * s + shift)

    def df(s):
        z = rate * s + shift
        return -amp * rate * np.tanh(z) / np.cosh(z)

    return Smooth(f, df, f"sech({amp!r},{rate!r},{shift!r})")


def sin(amp: float = 1.0, rate: float = 1.0, shift: float = 0.0) -> Smooth:
    """``amp * sin(rate*s + shift)``."""
    return Smooth(lambda s: amp * np.sin(rate * s + shift),
                  lambda s: amp * rate * np.cos(rate * s + shift),
                  f"sin({amp!r},{rate!r},{shift!r})")


def exp(amp: float = 1.0, rate: float = 1.0, shift: float = 0.0) -> Smooth:
    """``amp * exp(rate*s + shift)``."""
    return Smooth(lambda s: amp * np.exp(rate * s + shift),
                  lambda s: amp * rate * np.exp(rate * s + shift),
                  f"exp({amp!r},{rate!r},{shift!r})")


BUILTINS = {"const": const, "poly": poly, "sech": sech, "sin": sin, "exp": exp}


def from_spec(spec) -> Smooth:
    """Build from a config value.

    Accepts a number (constant), ``{"poly": [c0, c1, ...]}``,
    ``{"sech"|"sin"|"exp": [amp, rate, shift]}`` or
    ``{"expr": "...", "dexpr": "..."}`` in the expression grammar with
    variable ``s``.
    """
    if isinstance(spec, Smooth):
        return spec
    if isinstance(spec, (int, float)):
        return const(spec)
    if isinstance(spec, dict) and len(spec) == 1:
        (name, args), = spec.items()
        if name == "poly":
            return poly(args)
        if name in ("sech", "sin", "exp", "const"):
            args = args if isinstance(args, (list, tuple)) else [args]
            return BUILTINS[name](*args)
    if isinstance(spec, dict) and "expr" in spec:
        from .expr import compile_expr

        f = compile_expr(spec["expr"], ["s"])
        if "dexpr" not in spec:
            raise InputError("expression profiles need 'dexpr' for the derivative")
        df = compile_expr(spec["dexpr"], ["s"])
        return Smooth(lambda s: float(np.real(f(s=s))), lambda s: float(np.real(df(s=s))), spec["expr"])
    raise InputError(f"cannot build a smooth function from {spec!r}")

"""Damped Newton iteration with a finite-difference Jacobian."""

from __future__ import annotations

import numpy as np

from .errors import ImplicitSolveError, SingularityError


def fd_jacobian(fun, z, f0=None, rel_step=1e-7):
    z = np.asarray(z, dtype=float)
    f0 = fun(z) if f0 is None else f0
    cols = []
    for i in range(z.size):
        h = rel_step * (1 + abs(z[i]))
        e = np.zeros_like(z)
        e[i] = h
        cols.append((fun(z + e) - fun(z - e)) / (2 * h))
    return np.stack(cols, axis=1)


def newton_solve(fun, guess, scale: float = 1.0, tol: float = 1e-10,
                 maxiter: int = 50, max_halvings: int = 20):
    """Solve ``fun(z) = 0``.

    Convergence is declared when ``|fun(z)| / scale <= tol`` and the last
    step was tiny, or when the residual reaches roundoff level. Steps are
    halved (up to ``max_halvings`` times) while the residual grows.
    """
    z = np.array(guess, dtype=float)
    f = np.asarray(fun(z), dtype=float)
    norm = np.linalg.norm(f)
    for _ in range(maxiter):
        if norm / scale <= 1e-15:
            return z
        jac = fd_jacobian(fun, z, f)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e13:
            raise SingularityError(f"singular Jacobian in implicit solve (cond={cond:.3g})", cond)
        step = np.linalg.solve(jac, -f)
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = z + t * step
            try:
                ft = np.asarray(fun(trial), dtype=float)
                nt = np.linalg.norm(ft)
            except (ValueError, ArithmeticError):
                nt = np.inf
            if np.isfinite(nt) and nt <= norm:
                break
            t *= 0.5
        else:
            if norm / scale <= tol:
                return z
            raise ImplicitSolveError("line search failed in implicit solve", z)
        small = np.linalg.norm(t * step) <= 1e-14 * (1 + np.linalg.norm(z))
        z, f, norm = trial, ft, nt
        if small and norm / scale <= tol:
            return z
    if norm / scale <= tol:
        return z
    raise ImplicitSolveError(f"no convergence in {maxiter} iterations (residual {norm:.3g})", z)

"""Jacobi elliptic functions by the arithmetic-geometric mean.

Descending Landen transformation: iterate ``a, b, c -> (a+b)/2, sqrt(ab),
(a-b)/2`` from ``(1, k', k)`` to convergence, then recover the amplitude
by the backward recursion
``phi_{n-1} = (phi_n + asin(c_n sin(phi_n) / a_n)) / 2``.
"""

from __future__ import annotations

import numpy as np

AGM_RTOL = 1e-15
AGM_MAXITER = 40


def _amplitudes(u, k):
    """Return ``(phi_0, phi_1)`` for the Landen recursion."""
    a, b, c = [1.0], [np.sqrt(1.0 - k * k)], [k]
    for _ in range(AGM_MAXITER):
        if abs(a[-1] - b[-1]) <= AGM_RTOL * a[-1]:
            break
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(np.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    n = len(a) - 1
    phi = (2.0 ** n) * a[-1] * u
    prev = phi
    for j in range(n, 0, -1):
        prev = phi
        phi = 0.5 * (phi + np.arcsin(c[j] * np.sin(phi) / a[j]))
    return phi, prev


def jacobi_ellipj(u, k):
    """``(sn, cn, dn)`` of argument ``u`` and modulus ``k`` in [0, 1]."""
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ValueError("modulus must lie in [0, 1]")
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if k == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech
    flat = u.reshape(-1)
    out = np.empty((3, flat.size))
    for i, val in enumerate(flat):
        phi0, phi1 = _amplitudes(val, k)
        out[0, i] = np.sin(phi0)
        out[1, i] = np.cos(phi0)
        out[2, i] = np.cos(phi0) / np.cos(phi1 - phi0) if phi1 != phi0 else np.sqrt(1 - (k * out[0, i]) ** 2)
    sn, cn, dn = (v.reshape(u.shape) for v in out)
    if u.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_cn(u, k):
    """Jacobi ``cn(u, k)``; ``k = 0`` gives cos, ``k = 1`` gives sech."""
    return jacobi_ellipj(u, k)[1]


def jacobi_sn(u, k):
    return jacobi_ellipj(u, k)[0]


def jacobi_dn(u, k):
    return jacobi_ellipj(u, k)[2]

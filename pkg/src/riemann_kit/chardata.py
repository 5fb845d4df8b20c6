"""Characteristic analysis and algebraic compatibility checks.

Covers dispersion roots, homogeneous/inhomogeneous integral elements, the
wave relation for characteristic columns ``tau``, the rotation conditions of
multiwave/multimode decompositions (determined and underdetermined) and the
involutivity test for wave-vector fields parametrized by Riemann invariants.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import DegeneracyError, InputError
from .pde_core import RANK_RTOL, SystemSpec

VARIANTS = ("multiwave", "multimode", "mixed", "underdetermined-wave", "underdetermined-mode")
ROOT_MERGE_TOL = 1e-7
# a root of multiplicity 3 scatters by about eps^(1/3) ~ 1e-5 (relative to R)
ROOT_CLUSTER_TOL = 1e-4
REFINE_PASSES = 4


@dataclass(frozen=True)
class WaveVector:
    """A real or complex wave vector; complex ones carry an implied conjugate."""

    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components)
        if np.iscomplexobj(c) and not np.any(c.imag):
            c = c.real
        c = c.astype(complex if np.iscomplexobj(c) else float)
        if c.ndim != 1 or not np.any(c):
            raise DegeneracyError("wave vector must be a nonzero 1-D array")
        object.__setattr__(self, "components", c)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.components)

    def conj(self) -> "WaveVector":
        return WaveVector(np.conj(self.components))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


def as_wave(w) -> WaveVector:
    return w if isinstance(w, WaveVector) else WaveVector(np.asarray(w))


@dataclass(frozen=True)
class IntegralElement:
    """A simple integral element ``gamma (x) lambda``."""

    wave: WaveVector
    gamma: np.ndarray
    kind: str = "homogeneous"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("homogeneous", "inhomogeneous"):
            raise InputError(f"unknown element kind {self.kind!r}")

    def residual(self, sys: SystemSpec, u) -> float:
        """Residual of the element's own wave relation at ``u``."""
        r = sys.symbol(u, self.wave.components) @ self.gamma
        if self.kind == "inhomogeneous":
            r = r - sys.source_vector(u)
        return float(np.linalg.norm(r))


# ---------------------------------------------------------------- dispersion

def _root_radius(a: np.ndarray, spatial: np.ndarray) -> float:
    bnorm = sum(abs(s) * np.linalg.norm(aj, 2) for s, aj in zip(spatial, a[1:]))
    smin = np.linalg.svd(a[0], compute_uv=False)[-1]
    if smin > 1e-12 * max(1.0, np.linalg.norm(a[0], 2)):
        return 1.0 + 2.0 * bnorm / smin
    return (1.0 + 2.0 * max(np.linalg.norm(ai, 2) for ai in a)) * max(1.0, np.linalg.norm(spatial))


def _cluster(values: np.ndarray, tol: float) -> list:
    """Single-link groups of points closer than ``tol`` (in the complex plane)."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(values[i])
    return list(groups.values())


def _fitted_roots(a, base, nodes, center, radius) -> np.ndarray:
    """Roots ``z`` (with ``lambda_0 = center + radius z``) of the fitted determinant."""
    q = len(nodes) - 1
    vals = np.array([np.linalg.det((center + radius * t) * a[0] + base) for t in nodes])
    coef = cheb.chebfit(nodes, vals, q)
    nz = np.nonzero(np.abs(coef) > 1e-14 * np.max(np.abs(coef)))[0]
    coef = coef[: nz[-1] + 1]
    if coef.size < 2:
        return np.zeros(0, dtype=complex)
    return np.asarray(cheb.chebroots(coef), dtype=complex)


def dispersion_roots(sys: SystemSpec, u, spatial) -> list:
    """Real roots ``lambda_0`` of ``det(sum_i A^i lambda_i) = 0``.

    The determinant is a polynomial of degree at most ``q`` in ``lambda_0``;
    it is sampled at ``q + 1`` Chebyshev points, converted to a Chebyshev
    series and its roots are the eigenvalues of the colleague matrix.
    Returns ``[(root, multiplicity), ...]`` sorted by root.
    """
    if not sys.determined:
        raise InputError("dispersion roots need a determined system")
    spatial = np.asarray(spatial, dtype=float)
    if spatial.shape != (sys.p - 1,) or not np.any(spatial):
        raise InputError("spatial direction must be a nonzero vector of length p-1")
    a = sys.coefficient_matrices(u)
    q = sys.q
    radius = _root_radius(a, spatial)
    base = np.tensordot(spatial, a[1:], axes=1)
    nodes = np.cos(np.pi * (np.arange(q + 1) + 0.5) / (q + 1))
    vals = np.array([np.linalg.det(radius * t * a[0] + base) for t in nodes])
    scale = max(np.linalg.norm(radius * a[0], 2), np.linalg.norm(base, 2)) ** q
    if np.max(np.abs(vals)) <= 1e-13 * scale:
        raise DegeneracyError("determinant vanishes identically in lambda_0")
    center = 0.0
    zs = _fitted_roots(a, base, nodes, center, radius)
    # refit on an interval matched to the real roots: when the bound is much
    # wider than their spread the fitted polynomial loses the fine structure
    for _ in range(REFINE_PASSES):
        near = zs[(np.abs(zs.imag) <= 1e-2) & (np.abs(zs.real) <= 1.0 + 1e-2)]
        if near.size == 0:
            break
        lo, hi = center + radius * near.real.min(), center + radius * near.real.max()
        new_center = 0.5 * (lo + hi)
        new_radius = max(1.5 * 0.5 * (hi - lo), 1e-2 * (1.0 + abs(new_center)))
        if new_radius >= 0.5 * radius:
            break
        center, radius = new_center, new_radius
        zs = _fitted_roots(a, base, nodes, center, radius)
    if zs.size == 0:
        return []
    roots = []
    for group in _cluster(zs, ROOT_CLUSTER_TOL):
        c = np.mean(group)
        if abs(c.imag) <= 1e-8 and abs(c.real) <= 1.0 + 1e-9:
            roots.append([center + c.real * radius, len(group)])
    merged = []
    for r, mult in sorted(roots):
        if merged and abs(r - merged[-1][0]) <= ROOT_MERGE_TOL:
            m0 = merged[-1][1]
            merged[-1] = [(merged[-1][0] * m0 + r * mult) / (m0 + mult), m0 + mult]
        else:
            merged.append([r, mult])
    return [(float(r), int(mult)) for r, mult in merged]


# ---------------------------------------------------------------- elements

def nullspace(mat, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the right nullspace, one vector per column."""
    mat = np.atleast_2d(np.asarray(mat))
    _, s, vh = np.linalg.svd(mat)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T


def homogeneous_gamma(sys: SystemSpec, u, wave) -> np.ndarray:
    """Nullspace basis of ``sum_i A^i lambda_i`` (columns; may be empty)."""
    wave = as_wave(wave)
    return nullspace(sys.symbol(u, wave.components))


def symbol_rank(sys: SystemSpec, u, wave) -> int:
    return sys.q - homogeneous_gamma(sys, u, wave).shape[1]


def inhomogeneous_gamma(sys: SystemSpec, u, wave):
    """Minimum-norm least-squares ``gamma_0`` with ``A(lambda) gamma_0 = b``.

    Returns ``(gamma_0, residual_norm)``.
    """
    wave = as_wave(wave)
    mat = sys.symbol(u, wave.components)
    b = sys.source_vector(u)
    if not np.any(b):
        return np.zeros(sys.q, dtype=mat.dtype), 0.0
    g, *_ = np.linalg.lstsq(mat, b, rcond=RANK_RTOL)
    return g, float(np.linalg.norm(mat @ g - b))


# ---------------------------------------------------------------- decomposition

@dataclass
class Component:
    """One term of a decomposition.

    ``wave`` may be complex, in which case the conjugate term is implied.
    Determined systems use ``omega`` (scalar) and ``rotation`` (q x q);
    underdetermined systems use ``projection`` (q x m), see
    :func:`assemble_projection`.
    """

    wave: WaveVector
    tau: np.ndarray
    omega: complex = 0.0
    rotation: Optional[np.ndarray] = None
    projection: Optional[np.ndarray] = None

    def __post_init__(self):
        self.wave = as_wave(self.wave)
        self.tau = np.asarray(self.tau)
        if self.rotation is not None:
            self.rotation = np.asarray(self.rotation)
        if self.projection is not None:
            self.projection = np.asarray(self.projection)

    @property
    def is_complex(self) -> bool:
        return self.wave.is_complex

    def map_matrix(self) -> np.ndarray:
        """``Omega L`` (determined) or ``P`` (underdetermined)."""
        if self.projection is not None:
            return self.projection
        if self.rotation is None:
            raise InputError("component needs a rotation or a projection")
        return self.omega * self.rotation

    def conj(self) -> "Component":
        return Component(
            self.wave.conj(), np.conj(self.tau), np.conj(self.omega),
            None if self.rotation is None else np.conj(self.rotation),
            None if self.projection is None else np.conj(self.projection),
        )


def assemble_projection(omegas, rotations) -> np.ndarray:
    """``P = sum_alpha Omega^alpha M_alpha L^alpha``.

    ``M_alpha`` has a single 1 at (alpha, 0), so row ``alpha`` of ``P`` is
    ``Omega^alpha`` times the first row of ``L^alpha``.
    """
    rotations = np.asarray(rotations)
    omegas = np.asarray(omegas)
    return omegas[:, None] * rotations[:, 0, :]


def orthogonality_defect(rot) -> float:
    """``max(||L^T L - I||, |det L - 1|)`` with the plain transpose."""
    rot = np.asarray(rot)
    n = rot.shape[0]
    return float(max(np.max(np.abs(rot.T @ rot - np.eye(n))), abs(np.linalg.det(rot) - 1)))


@dataclass
class DecompositionData:
    """Data ``(lambda^A, Omega_A, L_A, tau_A)`` or ``(lambda^A, P_A, tau_A)`` at one point."""

    components: list
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown variant {self.variant!r}")
        kinds = {c.is_complex for c in self.components}
        if self.variant in ("multiwave", "underdetermined-wave") and True in kinds:
            raise InputError(f"{self.variant} data must have real waves")
        if self.variant in ("multimode", "underdetermined-mode") and False in kinds:
            raise InputError(f"{self.variant} data must have complex waves")
        if self.variant == "mixed" and kinds != {True, False}:
            raise InputError("mixed data needs real and complex waves")

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def underdetermined(self) -> bool:
        return self.variant.startswith("underdetermined")

    def waves(self) -> list:
        return [c.wave for c in self.components]

    def expanded(self) -> list:
        """Components with every complex term followed by its conjugate."""
        out = []
        for c in self.components:
            out.append(c)
            if c.is_complex:
                out.append(c.conj())
        return out

    def rotation_defects(self) -> list:
        return [orthogonality_defect(c.rotation) for c in self.components if c.rotation is not None]


def _check_dims(sys: SystemSpec, d: DecompositionData):
    for c in d.components:
        if c.wave.components.shape != (sys.p,):
            raise InputError("wave dimension does not match p")
        if c.tau.shape != (sys.q,):
            raise InputError("tau dimension does not match q")
        mat = c.map_matrix()
        if mat.shape != (sys.q, sys.m):
            raise InputError(f"map matrix has shape {mat.shape}, expected {(sys.q, sys.m)}")
        if c.rotation is not None and c.rotation.shape != (sys.m, sys.m):
            raise InputError("rotation must be m x m")


def rotation_operator(sys: SystemSpec, u, d: DecompositionData) -> np.ndarray:
    """``sum_A A(lambda^A) Omega_A L_A`` (plus conjugates), an ``m x m`` matrix."""
    _check_dims(sys, d)
    total = np.zeros((sys.m, sys.m), dtype=complex)
    for c in d.expanded():
        total += sys.symbol(u, c.wave.components) @ c.map_matrix()
    return total


def check_rotation_condition(sys: SystemSpec, u, x, d) -> float:
    """Norm of ``(sum_A A(lambda^A) Omega_A L_A [+ c.c.] - I) b``.

    ``d`` is either a :class:`DecompositionData` or a callable
    ``(x, u) -> DecompositionData``.
    """
    if callable(d):
        d = d(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
    b = sys.source_vector(u)
    op = rotation_operator(sys, u, d) - np.eye(sys.m)
    return float(np.linalg.norm(op @ b))


def check_wave_relation(sys: SystemSpec, u, elements) -> float:
    """Norm of ``sum_A A(lambda^A) tau_A`` with conjugate closure.

    ``elements`` may be :class:`IntegralElement` (gamma used as tau),
    :class:`Component` or a :class:`DecompositionData`.
    """
    if isinstance(elements, DecompositionData):
        items = [(c.wave, c.tau) for c in elements.components]
    else:
        items = []
        for e in elements:
            if isinstance(e, IntegralElement):
                items.append((e.wave, np.asarray(e.gamma)))
            elif isinstance(e, Component):
                items.append((e.wave, e.tau))
            else:
                raise InputError(f"unsupported element {type(e).__name__}")
    total = np.zeros(sys.m, dtype=complex)
    for wave, tau in items:
        if not wave.is_complex and np.iscomplexobj(tau) and np.any(np.imag(tau)):
            raise InputError("real wave paired with a complex tau")
        term = sys.symbol(u, wave.components) @ tau
        total += 2 * term.real if wave.is_complex else term
    if np.max(np.abs(total.imag)) > 0:
        raise InputError("wave relation is not conjugate-closed")
    return float(np.linalg.norm(total.real))


# ---------------------------------------------------------------- involutivity

@dataclass
class InvolutivityResult:
    value: float
    warnings: list = field(default_factory=list)

    def __float__(self):
        return self.value


def _distance_to_span(vec, basis) -> tuple:
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    mat = basis.T
    sv = np.linalg.svd(mat, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    coef, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    return float(np.linalg.norm(mat @ coef - vec)), cond


def check_involutivity(wavefield: Callable, grid, h: float = 1e-5) -> InvolutivityResult:
    """Integrability of the invariant 1-forms ``dr^n = lambda^n_i dx^i``.

    ``wavefield(r)`` returns the list ``[lambda^0, lambda^1, ..., lambda^k]``
    for the invariant vector ``r = (r^0, ..., r^k)``. At each grid point the
    FD derivatives must satisfy ``d lambda^0/d r^n in span{lambda^n}`` and
    ``d lambda^A/d r^n in span{lambda^A, lambda^n}`` for ``n != A``.
    """
    worst = 0.0
    notes = []
    for r in np.atleast_2d(np.asarray(grid, dtype=float)):
        lams = [np.asarray(v, dtype=float) for v in wavefield(r)]
        nlam = len(lams)
        derivs = []
        for n in range(nlam):
            e = np.zeros_like(r)
            e[n] = h
            plus = wavefield(r + e)
            minus = wavefield(r - e)
            derivs.append([(np.asarray(a) - np.asarray(b)) / (2 * h) for a, b in zip(plus, minus)])
        for a in range(nlam):
            for n in range(nlam):
                if a == 0:
                    span = [lams[n]]
                elif n == a:
                    continue
                else:
                    span = [lams[a], lams[n]]
                dist, cond = _distance_to_span(derivs[n][a], span)
                if cond > 1e8:
                    notes.append(f"ill-conditioned span at r={r.tolist()} (A={a}, n={n}, cond={cond:.3g})")
                worst = max(worst, dist)
    for note in notes[:5]:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    return InvolutivityResult(worst, notes)

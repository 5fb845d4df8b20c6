"""Quasilinear systems and finite-difference residual verification.

A system is written ``sum_i A^i(u) du/dx^i = b(u)`` with ``A^i`` of shape
``(m, q)``. Candidate solutions are arbitrary callables ``x -> u``; the
residual is assembled from a central-difference Jacobian, which makes it an
oracle independent of any analytic derivation of the candidate.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    EvaluationError,
    InputError,
    RankError,
    SamplingError,
    StateError,
)

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
RANK_RTOL = 1e-10


def _always(_):
    return True


@dataclass(frozen=True)
class SystemSpec:
    """A first-order quasilinear system.

    Parameters
    ----------
    p, q, m : int
        Number of independent variables, dependent variables and equations.
    coeffs : callable
        ``u -> array (p, m, q)`` holding ``A^1 .. A^p``.
    source : callable
        ``u -> array (m,)``.
    admissible : callable
        Predicate on ``u``.
    name : str
    """

    p: int
    q: int
    m: int
    coeffs: Callable[[np.ndarray], np.ndarray]
    source: Callable[[np.ndarray], np.ndarray]
    admissible: Callable[[np.ndarray], bool] = _always
    name: str = "system"

    def __post_init__(self):
        if self.m > self.q:
            raise InputError("more equations than unknowns is not supported")
        if min(self.p, self.q, self.m) < 1:
            raise InputError("p, q, m must be positive")

    @property
    def determined(self) -> bool:
        return self.m == self.q

    def coefficient_matrices(self, u) -> np.ndarray:
        a = np.asarray(self.coeffs(np.asarray(u, dtype=float)))
        if a.shape != (self.p, self.m, self.q):
            raise InputError(
                f"{self.name}: coefficients have shape {a.shape}, "
                f"expected {(self.p, self.m, self.q)}"
            )
        if not np.all(np.isfinite(a)):
            raise EvaluationError(f"{self.name}: non-finite coefficients at u={u}")
        return a

    def source_vector(self, u) -> np.ndarray:
        b = np.asarray(self.source(np.asarray(u, dtype=float)))
        if b.shape != (self.m,):
            raise InputError(f"{self.name}: source has shape {b.shape}, expected ({self.m},)")
        if not np.all(np.isfinite(b)):
            raise EvaluationError(f"{self.name}: non-finite source at u={u}")
        return b

    def symbol(self, u, wave) -> np.ndarray:
        """``sum_i A^i(u) lambda_i``; complex when ``wave`` is complex."""
        a = self.coefficient_matrices(u)
        wave = np.asarray(wave)
        if wave.shape != (self.p,):
            raise InputError(f"wave vector has shape {wave.shape}, expected ({self.p},)")
        return np.tensordot(wave, a, axes=1)

    def with_source(self, source, name=None) -> "SystemSpec":
        return SystemSpec(self.p, self.q, self.m, self.coeffs, source,
                          self.admissible, name or self.name)


def negate_source(sys: SystemSpec) -> SystemSpec:
    """Same system with ``b -> -b`` (negative control)."""
    src = sys.source
    return sys.with_source(lambda u: -np.asarray(src(u)), name=sys.name + "[-b]")


@dataclass(frozen=True)
class CandidateSolution:
    """A map ``x -> u`` with a domain predicate and optional analytic Jacobian."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], bool] = _always
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "solution"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.domain(x):
            raise DomainError(f"{self.name}: x={x.tolist()} outside domain")
        u = np.asarray(self.evaluate(x))
        if np.iscomplexobj(u):
            if np.max(np.abs(u.imag), initial=0.0) > 1e-12 * (1 + np.max(np.abs(u.real), initial=0.0)):
                raise EvaluationError(f"{self.name}: complex value at x={x.tolist()}")
            u = u.real
        u = u.astype(float)
        if not np.all(np.isfinite(u)):
            raise EvaluationError(f"{self.name}: non-finite value at x={x.tolist()}")
        return u


@dataclass
class ResidualReport:
    """Residual statistics of a candidate over a sample of points."""

    max_abs: np.ndarray
    mean_abs: np.ndarray
    n: int
    h: float
    tol: float
    failures: list = field(default_factory=list)

    @property
    def max(self) -> float:
        return float(np.max(self.max_abs))

    @property
    def passed(self) -> bool:
        return self.max <= self.tol

    def to_dict(self) -> dict:
        return {
            "max_abs": [float(v) for v in self.max_abs],
            "mean_abs": [float(v) for v in self.mean_abs],
            "max": self.max,
            "n": self.n,
            "fd_step": self.h,
            "tol": self.tol,
            "pass": self.passed,
            "n_failures": len(self.failures),
            "failures": [list(map(float, x)) for x in self.failures[:10]],
        }


def jacobian_fd(sol: CandidateSolution, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference Jacobian ``du/dx``, shape ``(q, p)``."""
    if not h > 0:
        raise InputError("step must be positive")
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((sol(x + e) - sol(x - e)) / (2 * h))
    return np.stack(cols, axis=1)


def residual(sys: SystemSpec, sol: CandidateSolution, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """``sum_i A^i(u) du/dx^i - b(u)`` at ``x`` with FD derivatives."""
    u = sol(x)
    if not sys.admissible(u):
        raise StateError(f"{sys.name}: state {u.tolist()} not admissible")
    jac = jacobian_fd(sol, x, h)
    a = sys.coefficient_matrices(u)
    lhs = np.einsum("imq,qi->m", a, jac)
    return lhs - sys.source_vector(u)


class BoxSampler:
    """Seeded uniform sampler on an axis-aligned box.

    Uses numpy's counter-based Philox generator, so a given ``seed`` yields
    the same candidate sequence on every platform.
    """

    def __init__(self, lo: Sequence[float], hi: Sequence[float], seed: int):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.hi < self.lo):
            raise InputError("invalid sampling box")
        self.seed = int(seed)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))

    def points(self, n: int, accept: Callable[[np.ndarray], bool]) -> np.ndarray:
        """Up to ``n`` accepted points; stops after ``1000 n`` rejections."""
        rng = self.generator()
        out = []
        rejected = 0
        while len(out) < n and rejected < 1000 * n:
            x = self.lo + (self.hi - self.lo) * rng.random(self.lo.size)
            if accept(x):
                out.append(x)
            else:
                rejected += 1
        if len(out) < n:
            log.warning("sampler accepted %d of %d points", len(out), n)
        return np.array(out).reshape(len(out), self.lo.size)


def usable_point(sys: SystemSpec, sol: CandidateSolution, h: float):
    """Acceptance predicate: x and its stencil in the domain, state admissible."""

    def accept(x):
        if not sol.domain(x):
            return False
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            if not (sol.domain(x + e) and sol.domain(x - e)):
                return False
        try:
            u = sol(x)
        except Exception:  # any evaluation failure makes the point unusable
            return False
        return bool(sys.admissible(u))

    return accept


def verify_on_grid(sys: SystemSpec, sol: CandidateSolution, sampler: BoxSampler,
                   n: int, h: float = DEFAULT_STEP, tol: float = 1e-5,
                   threads: int = 1) -> ResidualReport:
    """Aggregate FD residuals over ``n`` seeded sample points."""
    if n < 1:
        raise InputError("n must be at least 1")
    pts = sampler.points(n, usable_point(sys, sol, h))
    if len(pts) == 0:
        raise SamplingError(f"{sol.name}: no usable sample points")

    def one(x):
        return np.abs(residual(sys, sol, x, h))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(one, pts))
    else:
        res = [one(x) for x in pts]
    res = np.array(res)
    fails = [pts[i] for i in np.nonzero(res.max(axis=1) > tol)[0]]
    return ResidualReport(res.max(axis=0), res.mean(axis=0), len(pts), h, tol, fails)


def wave_rows(waves) -> np.ndarray:
    """Real matrix whose rows span the waves (Re and Im of complex ones)."""
    rows = []
    for w in waves:
        w = np.asarray(w)
        if np.iscomplexobj(w) and np.any(w.imag != 0):
            rows.extend([w.real, w.imag])
        else:
            rows.append(np.real(w))
    return np.array(rows, dtype=float)


def complement_basis(waves, p: Optional[int] = None, allow_dependent: bool = False) -> np.ndarray:
    """Orthonormal basis (rows) of the orthogonal complement of the waves.

    Dependent waves raise :class:`RankError` unless ``allow_dependent``, in
    which case the complement of their span is returned.
    """
    w = wave_rows(waves)
    if w.size == 0:
        return np.eye(p)
    _, s, vt = np.linalg.svd(w)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < w.shape[0] and not allow_dependent:
        raise RankError(f"wave vectors are dependent (rank {rank} < {w.shape[0]})")
    return vt[rank:]


def span_check(jac, waves, allow_dependent: bool = False) -> float:
    """Largest relative size of ``J xi`` over the complement basis ``xi``.

    Zero (to roundoff) exactly when every row of ``J`` lies in the span of
    the waves.
    """
    jac = np.asarray(jac, dtype=float)
    xi = complement_basis(waves, jac.shape[1], allow_dependent)
    if len(xi) == 0:
        return 0.0
    norm = np.linalg.norm(jac, 2)
    return float(max(np.linalg.norm(jac @ v) for v in xi) / (norm + np.finfo(float).eps))


def numerical_rank(mat, rtol: float = 1e-6) -> int:
    s = np.linalg.svd(np.asarray(mat), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))

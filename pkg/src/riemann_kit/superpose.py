"""Reduced systems in Riemann invariants, their integration and lifting.

Given decomposition data, the ansatz ``u = f(r)`` with ``r^A = lambda^A(u).x``
turns the PDE into ``df/dr = Z (I + R Z)^{-1}`` where the columns of ``Z``
are ``Omega_A L_A b + tau_A`` (``P_A b + tau_A`` for underdetermined
systems) and ``R`` stacks the rows ``dr^A/du = x^i d lambda^A_i / du``.
Complex invariants enter together with their conjugates, and the real
integration coordinates are ``(Re r, Im r)``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .chardata import DecompositionData, check_rotation_condition, check_wave_relation
from .errors import InputError, LiftError, RiemannKitError, SingularityError
from .newton import newton_solve
from .pde_core import (
    DEFAULT_STEP,
    BoxSampler,
    CandidateSolution,
    ResidualReport,
    SystemSpec,
    complement_basis,
    jacobian_fd,
    numerical_rank,
    verify_on_grid,
    wave_rows,
)

DEFECT_LIMIT = 1e-4
MAX_STEP = 1e-3


# ------------------------------------------------------------ reduced system

@dataclass
class ReducedSystem:
    """Right-hand side of the reduced system for a decomposition field.

    Parameters
    ----------
    system : SystemSpec
    data : callable
        ``(x, u) -> DecompositionData``.
    wave_jacobians : callable or None
        ``u -> [d lambda^A / du]`` (each ``p x q``, complex for complex
        waves); ``None`` means constant waves.
    """

    system: SystemSpec
    data: Callable
    wave_jacobians: Optional[Callable] = None
    variant: str = ""
    last_condition: float = 1.0

    def decomposition(self, x, u) -> DecompositionData:
        return self.data(np.asarray(x, dtype=float), np.asarray(u, dtype=float))

    def stacked(self, u, x):
        """``(Z, R)`` over the expanded (conjugate-closed) invariants."""
        d = self.decomposition(x, u)
        b = self.system.source_vector(u)
        comps = d.expanded()
        z = np.stack([c.map_matrix() @ b + c.tau for c in comps], axis=1).astype(complex)
        r = np.zeros((len(comps), self.system.q), dtype=complex)
        if self.wave_jacobians is not None:
            jacs = self.wave_jacobians(np.asarray(u, dtype=float))
            rows = []
            for c, jac in zip(d.components, jacs):
                row = np.asarray(x, dtype=float) @ np.asarray(jac)
                rows.append(row)
                if c.is_complex:
                    rows.append(np.conj(row))
            r = np.array(rows, dtype=complex)
        return d, z, r

    def rhs_complex(self, u, x) -> np.ndarray:
        """``df/dr`` for every expanded invariant, shape ``(q, K)``."""
        d, z, r = self.stacked(u, x)
        mat = np.eye(z.shape[1]) + r @ z
        cond = np.linalg.cond(mat)
        self.last_condition = float(cond)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularityError(f"I + (dr/du) Z is singular (cond={cond:.3g})", cond)
        return np.linalg.solve(mat.T, z.T).T

    def rhs(self, u, x) -> np.ndarray:
        """Real derivatives along the real coordinates, shape ``(q, n)``.

        Real invariant: one column; complex invariant: columns for
        ``Re r`` and ``Im r`` (``2 Re f_r`` and ``-2 Im f_r``).
        """
        d = self.decomposition(x, u)
        full = self.rhs_complex(u, x)
        cols, j = [], 0
        for c in d.components:
            if c.is_complex:
                cols.extend([2 * full[:, j].real, -2 * full[:, j].imag])
                j += 2
            else:
                cols.append(full[:, j].real)
                j += 1
        return np.stack(cols, axis=1)

    def waves(self, u, x=None) -> list:
        x = np.zeros(self.system.p) if x is None else x
        return [c.wave.components for c in self.decomposition(x, u).components]

    def physical_jacobian(self, u, x) -> np.ndarray:
        """``du/dx = sum_A f_{r^A} (x) lambda^A`` (real)."""
        full = self.rhs_complex(u, x)
        d = self.decomposition(x, u)
        lams = [c.wave.components for c in d.expanded()]
        jac = sum(np.outer(full[:, j], lams[j]) for j in range(len(lams)))
        return np.real(jac)

    def table_rhs(self, r, f) -> np.ndarray:
        """rhs as a function of the real coordinates, using ``x = W^+ r``."""
        w = wave_rows(self.waves(f))
        x, *_ = np.linalg.lstsq(w, np.asarray(r, dtype=float), rcond=None)
        return self.rhs(f, x)


def build_reduced(sys: SystemSpec, data: Callable, wave_jacobians=None,
                  probes: Sequence = (), tol: float = 1e-8) -> ReducedSystem:
    """Assemble a :class:`ReducedSystem`, checking the algebraic conditions.

    Every ``(x, u)`` in ``probes`` must satisfy the rotation condition and
    the wave relation within ``tol``; otherwise :class:`InputError` is raised.
    """
    for x, u in probes:
        d = data(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
        rot = check_rotation_condition(sys, u, x, d)
        wave = check_wave_relation(sys, u, d)
        defects = d.rotation_defects()
        if rot > tol or wave > tol or any(v > 1e-10 for v in defects):
            raise InputError(
                f"decomposition fails at u={list(u)}: rotation {rot:.3g}, "
                f"wave relation {wave:.3g}, orthogonality {max(defects, default=0):.3g}"
            )
    variant = data(np.asarray(probes[0][0], float), np.asarray(probes[0][1], float)).variant if probes else ""
    return ReducedSystem(sys, data, wave_jacobians, variant)


def mode_pair_rhs(s, r_u) -> np.ndarray:
    """``f_r`` for one block of complex invariants from ``S = Z (I + r_u Z)^{-1}``.

    Block elimination of the conjugate-closed system gives
    ``f_r = (S - conj(S) conj(r_u) S) (I - r_u conj(S) conj(r_u) S)^{-1}``.
    """
    s = np.asarray(s, dtype=complex)
    r_u = np.asarray(r_u, dtype=complex)
    sb, rb = np.conj(s), np.conj(r_u)
    k = s.shape[1]
    num = s - sb @ rb @ s
    den = np.eye(k) - r_u @ sb @ rb @ s
    return np.linalg.solve(den.T, num.T).T


# ------------------------------------------------------------ well-definedness

@dataclass
class WellDefinedResult:
    value: float
    vacuous: bool = False
    note: str = ""

    def __float__(self):
        return self.value


def welldefined_check(rs, probes: Sequence, h: float = 1e-6) -> WellDefinedResult:
    """Largest derivative of the rhs along fields orthogonal to all waves.

    ``rs`` is a :class:`ReducedSystem` (or any object with ``rhs(u, x)`` and
    ``waves(u, x)``); ``probes`` is a list of ``(x, u)``.
    """
    worst = 0.0
    seen_basis = False
    for x, u in probes:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        xi = complement_basis(rs.waves(u, x), x.size, allow_dependent=True)
        if len(xi) == 0:
            continue
        seen_basis = True
        for v in xi:
            diff = (rs.rhs(u, x + h * v) - rs.rhs(u, x - h * v)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(diff))))
    if not seen_basis:
        return WellDefinedResult(0.0, True, "no orthogonality conditions")
    return WellDefinedResult(worst)


# ------------------------------------------------------------ integration

@dataclass
class GridSpec:
    start: Sequence[float]
    stop: Sequence[float]
    num: Sequence[int]

    def axes(self) -> list:
        return [np.linspace(a, b, int(n)) for a, b, n in zip(self.start, self.stop, self.num)]


def _rk4_line(rhs_col, r_nodes, f0, axis, base, max_step):
    """Integrate ``df/dr_axis = rhs_col(r, f)`` along the given nodes."""
    out = [np.asarray(f0, dtype=float)]
    f = out[0]
    for a, b in zip(r_nodes[:-1], r_nodes[1:]):
        nsub = max(1, math.ceil(abs(b - a) / max_step - 1e-9))
        h = (b - a) / nsub
        s = a
        for _ in range(nsub):
            f = _rk4_step(rhs_col, base, axis, s, f, h)
            s += h
        out.append(f)
    return np.array(out)


def _rk4_step(rhs_col, base, axis, s, f, h):
    def g(sv, fv):
        r = np.array(base, dtype=float)
        r[axis] = sv
        return rhs_col(r, fv)

    k1 = g(s, f)
    k2 = g(s + h / 2, f + h / 2 * k1)
    k3 = g(s + h / 2, f + h / 2 * k2)
    k4 = g(s + h, f + h * k3)
    return f + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class SolutionTable:
    """Values of ``f`` on a tensor grid of invariants."""

    axes: list
    values: np.ndarray
    labels: list = field(default_factory=list)
    defect: float = 0.0
    integrable: bool = True
    error: str = ""
    rhs: Optional[Callable] = None
    max_step: float = MAX_STEP
    coordinates: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.axes)

    def interpolate(self, r) -> np.ndarray:
        """Multilinear interpolation."""
        interp = RegularGridInterpolator(self.axes, self.values, method="linear")
        return interp(np.atleast_2d(np.asarray(r, dtype=float)))[0]

    def dense(self, r) -> np.ndarray:
        """One-invariant tables: integrate from the nearest node to ``r``."""
        if self.k != 1 or self.rhs is None:
            return self.interpolate(r)
        r = float(np.ravel(r)[0])
        nodes = self.axes[0]
        i = int(np.argmin(np.abs(nodes - r)))
        line = _rk4_line(lambda rv, f: self.rhs(rv, f)[:, 0], [nodes[i], r], self.values[i],
                         0, [nodes[i]], self.max_step)
        return line[-1]

    def __call__(self, r):
        return self.dense(r)

    def to_csv(self, path):
        q = self.values.shape[-1]
        rl = self.coordinates or [f"r{i + 1}" for i in range(self.k)]
        fl = self.labels or [f"f{i + 1}" for i in range(q)]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(rl + list(fl))
            for idx in itertools.product(*[range(len(a)) for a in self.axes]):
                r = [self.axes[d][i] for d, i in enumerate(idx)]
                w.writerow([f"{v:.16e}" for v in [*r, *self.values[idx]]])

    @classmethod
    def from_csv(cls, path, k: int) -> "SolutionTable":
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, data = rows[0], np.array(rows[1:], dtype=float)
        axes = [np.unique(data[:, d]) for d in range(k)]
        shape = [len(a) for a in axes] + [data.shape[1] - k]
        return cls(axes, data[:, k:].reshape(shape), header[k:], coordinates=header[:k])


def _fill(rhs, axes, f0, order, max_step):
    """Integrate along ``order[0]`` first, then each further axis."""
    k = len(axes)
    shape = [len(a) for a in axes]
    q = np.asarray(f0).size
    vals = np.full(shape + [q], np.nan)
    origin = [a[0] for a in axes]
    first = order[0]
    col = lambda ax: (lambda r, f: rhs(r, f)[:, ax])
    vals[tuple(0 if d != first else slice(None) for d in range(k))] = _rk4_line(
        col(first), axes[first], f0, first, origin, max_step)
    done = [first]
    for ax in order[1:]:
        for idx in itertools.product(*[range(shape[d]) if d in done else [0] for d in range(k)]):
            base = [axes[d][idx[d]] for d in range(k)]
            start = vals[idx]
            sl = list(idx)
            sl[ax] = slice(None)
            vals[tuple(sl)] = _rk4_line(col(ax), axes[ax], start, ax, base, max_step)
        done.append(ax)
    return vals


def cross_defect(rhs, axes, f0, table_values, max_step=MAX_STEP) -> float:
    """Mixed-partial mismatch measured by swapping integration order.

    For each pair of axes ``(A, B)`` on the 2-D slice through the origin the
    table (A first) is compared with a B-first integration; the difference
    divided by the rectangle area ``|dr_A| |dr_B|`` estimates the average of
    ``d/dr_B (f_{r_A}) - d/dr_A (f_{r_B})`` over the rectangle.
    """
    k = len(axes)
    worst = 0.0
    for a, b in itertools.combinations(range(k), 2):
        sub_axes = [axes[a], axes[b]]

        def sub_rhs(r2, f, a=a, b=b):
            r = np.array([ax[0] for ax in axes], dtype=float)
            r[a], r[b] = r2
            full = rhs(r, f)
            return full[:, [a, b]]

        swapped = _fill(sub_rhs, sub_axes, f0, [1, 0], max_step)
        sl = [0] * k
        sl[a] = slice(None)
        sl[b] = slice(None)
        ab = table_values[tuple(sl)]
        da = sub_axes[0] - sub_axes[0][0]
        db = sub_axes[1] - sub_axes[1][0]
        ma = np.abs(da) >= 0.5 * np.max(np.abs(da))
        mb = np.abs(db) >= 0.5 * np.max(np.abs(db))
        area = np.abs(np.outer(da, db))
        diff = np.max(np.abs(ab - swapped), axis=-1)
        mask = np.outer(ma, mb) & (area > 0)
        if np.any(mask):
            worst = max(worst, float(np.max(diff[mask] / area[mask])))
    return worst


def integrate_reduced(rhs, f0, grid: GridSpec, max_step: float = MAX_STEP,
                      labels: Sequence[str] = ()) -> SolutionTable:
    """Integrate ``df/dr = rhs(r, f)`` (``rhs`` returns ``q x k``) on a grid.

    ``rhs`` may also be a :class:`ReducedSystem`, in which case its
    ``table_rhs`` is used. The origin is the first node of every axis.
    Classic RK4 with at most ``max_step`` per substep (default 1e-3).
    """
    if isinstance(rhs, ReducedSystem):
        rhs = rhs.table_rhs
    if not max_step > 0:
        raise InputError("step must be positive")
    axes = grid.axes()
    k = len(axes)
    f0 = np.asarray(f0, dtype=float)
    try:
        vals = _fill(rhs, axes, f0, list(range(k)), max_step)
    except (RiemannKitError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        shape = [len(a) for a in axes] + [f0.size]
        return SolutionTable(axes, np.full(shape, np.nan), list(labels), math.inf, False,
                             f"rhs evaluation failed: {exc}", rhs, max_step)
    if not np.all(np.isfinite(vals)):
        return SolutionTable(axes, vals, list(labels), math.inf, False,
                             "non-finite values", rhs, max_step)
    defect = cross_defect(rhs, axes, f0, vals, max_step) if k >= 2 else 0.0
    return SolutionTable(axes, vals, list(labels), defect, defect <= DEFECT_LIMIT, "", rhs, max_step)


# ------------------------------------------------------------ lifting

def lift_solution(f, waves, x, guess=None, tol: float = 1e-10, maxiter: int = 200) -> np.ndarray:
    """Physical value ``u`` with ``u = f(r)``, ``r = W(u) x``.

    ``f`` maps the real invariant coordinates to ``u`` (a table or any
    callable). ``waves`` is a list of wave vectors or a callable
    ``u -> waves``. Constant waves give ``u = f(W x)`` directly; otherwise
    the fixed point is found by (damped) iteration, then Newton.
    """
    x = np.asarray(x, dtype=float)
    if not callable(waves):
        r = wave_rows(waves) @ x
        return np.asarray(f(r), dtype=float)

    def image(u):
        return np.asarray(f(wave_rows(waves(u)) @ x), dtype=float)

    if guess is None:
        raise InputError("u-dependent waves need an initial guess")
    u = np.asarray(guess, dtype=float)
    omega = 1.0
    err = np.linalg.norm(image(u) - u)
    for _ in range(maxiter):
        if err <= tol:
            return u
        trial = (1 - omega) * u + omega * image(u)
        terr = np.linalg.norm(image(trial) - trial)
        if terr < err:
            u, err = trial, terr
        else:
            omega *= 0.5
            if omega < 1e-3:
                break
    try:
        u = newton_solve(lambda v: v - image(v), u, tol=tol)
    except RiemannKitError as exc:
        raise LiftError(f"fixed point did not converge: {exc}", u) from exc
    if np.linalg.norm(image(u) - u) > tol:
        raise LiftError("fixed point residual above tolerance", u)
    return u


# ------------------------------------------------------------ simple states

@dataclass
class SimpleStateReport:
    passed: bool
    constancy: float
    residual: Optional[ResidualReport] = None
    max_rank: int = 0
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "direction_defect": self.constancy,
            "residual": None if self.residual is None else self.residual.to_dict(),
            "max_rank": self.max_rank,
            "reason": self.reason,
        }


def direction_defect(lambda0, gamma0, u, h: float = 1e-6) -> float:
    """Size of ``d lambda0 / d gamma0`` transverse to ``lambda0`` (relative)."""
    u = np.asarray(u, dtype=float)
    g = np.asarray(gamma0(u), dtype=float)
    lam = np.asarray(lambda0(u), dtype=float)
    d = (np.asarray(lambda0(u + h * g)) - np.asarray(lambda0(u - h * g))) / (2 * h)
    unit = lam / np.linalg.norm(lam)
    return float(np.linalg.norm(d - np.dot(d, unit) * unit) / np.linalg.norm(lam))


def simple_state_verify(sys: SystemSpec, gamma0, lambda0, f0, r_range=(-1.0, 1.0),
                        num: int = 201, sampler: Optional[BoxSampler] = None, n: int = 100,
                        h: float = DEFAULT_STEP, tol: float = 1e-5,
                        constancy_tol: float = 1e-6) -> SimpleStateReport:
    """Integrate ``df/dr = gamma0(f)``, lift with ``r = lambda0 . x`` and verify.

    The direction of ``lambda0`` must stay fixed along the curve; its length
    may vary, which is absorbed by integrating ``s(f) gamma0(f)`` with
    ``s = lambda0(f).l / |l|^2`` and lifting with the fixed ``l = lambda0(f0)``.
    """
    f0 = np.asarray(f0, dtype=float)
    lstar = np.asarray(lambda0(f0), dtype=float)
    l2 = float(np.dot(lstar, lstar))

    def rhs(r, f):
        s = float(np.dot(np.asarray(lambda0(f)), lstar)) / l2
        return (s * np.asarray(gamma0(f), dtype=float))[:, None]

    lo, hi = r_range
    axes_lo = np.linspace(0.0, lo, max(2, num // 2 + 1))
    axes_hi = np.linspace(0.0, hi, max(2, num // 2 + 1))
    left = integrate_reduced(rhs, f0, GridSpec([0.0], [lo], [len(axes_lo)]))
    right = integrate_reduced(rhs, f0, GridSpec([0.0], [hi], [len(axes_hi)]))
    nodes = np.concatenate([left.axes[0][::-1], right.axes[0][1:]])
    vals = np.concatenate([left.values[::-1], right.values[1:]])
    table = SolutionTable([nodes], vals, rhs=rhs)
    constancy = max(direction_defect(lambda0, gamma0, v) for v in vals[:: max(1, len(vals) // 25)])
    if constancy > constancy_tol:
        return SimpleStateReport(False, constancy, reason="direction of lambda0 varies along gamma0")

    def evaluate(x):
        return table.dense(np.dot(lstar, x))

    def domain(x):
        return lo <= np.dot(lstar, x) <= hi

    sol = CandidateSolution(evaluate, domain, name="simple-state")
    if sampler is None:
        span = max(abs(lo), abs(hi))
        box = span / np.linalg.norm(lstar) / math.sqrt(sys.p)
        sampler = BoxSampler([-box] * sys.p, [box] * sys.p, 0)
    report = verify_on_grid(sys, sol, sampler, n, h, tol)
    pts = sampler.points(min(n, 20), lambda x: domain(x))
    rank = max(numerical_rank(jacobian_fd(sol, x, h)) for x in pts)
    ok = report.passed and rank <= 1
    return SimpleStateReport(ok, constancy, report, rank, "" if ok else "residual or rank check failed")

"""Three-component system with the curl-divergence coupling.

``U_t + A^1 U_x + A^2 U_y + A^3 U_z = b(U)`` with constant matrices built
from a vector ``a``. Since ``sum_j a_j A^j = M I`` with ``M = |a|^2``, any
``U(r1, xi)`` with ``r1 = -M t + a.x``, ``xi = t + M a.x`` and
``(1 + M^2) dU/dxi = b`` is a solution. The module provides the solitonic,
cnoidal and bounded-multisoliton sources and solutions, and the mixed
wave/mode decomposition data (real wave ``eta``, complex wave ``lambda``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import profiles
from ..chardata import Component, DecompositionData, WaveVector
from ..errors import ConstraintError, DomainError, InputError
from ..pde_core import CandidateSolution, SystemSpec
from .special import jacobi_ellipj

VARIANTS = ("sech", "sech-printed", "cnoidal", "bounded-multisoliton", "custom")


@dataclass
class Example1Config:
    a: tuple = (1.0, 1.0, 1.0)
    variant: str = "sech"
    shifts: tuple = (None, None, None)
    moduli: tuple = (0.5, 0.5, 0.5)
    source: object = None

    def __post_init__(self):
        self.a = tuple(float(v) for v in self.a)
        if self.variant not in VARIANTS:
            raise InputError(f"unknown variant {self.variant!r}")
        if self.variant.startswith("sech") and any(v == 0 for v in self.a):
            raise ConstraintError("the solitonic variant needs every a_i nonzero")
        if self.variant in ("cnoidal", "bounded-multisoliton"):
            if not all(0 < k < 1 for k in self.moduli):
                raise ConstraintError("moduli must satisfy 0 < k^2 < 1")
        if self.variant == "custom" and self.source is None:
            raise InputError("custom variant needs a source callable")
        self.shifts = tuple(profiles.from_spec(c if c is not None else 0.0) for c in self.shifts)

    @property
    def M(self) -> float:
        return float(np.dot(self.a, self.a))

    @property
    def avec(self) -> np.ndarray:
        return np.array(self.a)


def coefficient_matrices(a) -> np.ndarray:
    a1, a2, a3 = a
    return np.array([
        np.eye(3),
        [[a1, -a2, -a3], [a2, a1, 0.0], [a3, 0.0, a1]],
        [[a2, a1, 0.0], [-a1, a2, -a3], [0.0, a3, a2]],
        [[a3, 0.0, a1], [0.0, a3, a2], [-a1, -a2, a3]],
    ])


def source_function(cfg: Example1Config):
    a = cfg.avec
    if cfg.variant == "sech":
        def b(u):
            return -(u / np.abs(a)) * np.sqrt(np.maximum(a * a - u * u, 0.0))
    elif cfg.variant == "sech-printed":
        def b(u):
            return -(u / a) * (a * a - u * u)
    elif cfg.variant == "cnoidal":
        k2 = np.array(cfg.moduli) ** 2

        def b(u):
            return -np.sqrt(np.maximum(1 - k2 * (1 - u * u), 0.0)) * np.sqrt(np.maximum(1 - u * u, 0.0))
    elif cfg.variant == "bounded-multisoliton":
        k2 = np.array(cfg.moduli) ** 2

        def b(u):
            return -np.sqrt(np.maximum(u * u - 1, 0.0)) * np.sqrt(np.maximum(u * u - k2, 0.0))
    else:
        b = cfg.source
    return b


def example1_system(cfg: Example1Config) -> SystemSpec:
    mats = coefficient_matrices(cfg.a)
    a = cfg.avec
    if cfg.variant.startswith("sech"):
        admissible = lambda u: bool(np.all(np.abs(u) < np.abs(a)))
    elif cfg.variant == "cnoidal":
        admissible = lambda u: bool(np.all(np.abs(u) <= 1))
    elif cfg.variant == "bounded-multisoliton":
        admissible = lambda u: bool(np.all(u >= 1))
    else:
        admissible = lambda u: True
    return SystemSpec(4, 3, 3, lambda u: mats, source_function(cfg), admissible,
                      f"example1[{cfg.variant}]")


def invariants(cfg: Example1Config, x):
    """``(r1, xi)`` at ``x = (t, x, y, z)``."""
    x = np.asarray(x, dtype=float)
    ax = np.dot(cfg.avec, x[1:])
    return -cfg.M * x[0] + ax, x[0] + cfg.M * ax


def phases(cfg: Example1Config, x) -> np.ndarray:
    """Arguments ``xi / (1 + M^2) + c_i(r1)`` of the three components."""
    r1, xi = invariants(cfg, x)
    base = xi / (1 + cfg.M ** 2)
    return np.array([base + c(r1) for c in cfg.shifts])


def profile(cfg: Example1Config, s) -> np.ndarray:
    """Component values as functions of their phases ``s``."""
    s = np.asarray(s, dtype=float)
    if cfg.variant.startswith("sech"):
        return cfg.avec / np.cosh(s)
    sn, cn = np.empty(3), np.empty(3)
    for i, k in enumerate(cfg.moduli):
        sn[i], cn[i], _ = jacobi_ellipj(float(s[i]), k)
    if cfg.variant == "cnoidal":
        return cn
    if cfg.variant == "bounded-multisoliton":
        return 1.0 / np.sqrt(1.0 - cn * cn)
    raise InputError("custom variant has no closed form")


def in_domain(cfg: Example1Config, x) -> bool:
    s = phases(cfg, x)
    if cfg.variant.startswith("sech"):
        return bool(np.all(s > 0))
    sn, cn = np.empty(3), np.empty(3)
    for i, k in enumerate(cfg.moduli):
        sn[i], cn[i], _ = jacobi_ellipj(float(s[i]), k)
    if cfg.variant == "cnoidal":
        return bool(np.all(sn > 0))
    return bool(np.all(sn > 1e-8) and np.all(cn > 0))


def example1_family(cfg: Example1Config) -> CandidateSolution:
    if cfg.variant == "custom":
        raise InputError("custom variant has no closed form")

    def evaluate(x):
        if not in_domain(cfg, x):
            raise DomainError(f"example1[{cfg.variant}]: outside the branch domain at {list(x)}")
        return profile(cfg, phases(cfg, x))

    return CandidateSolution(evaluate, lambda x: in_domain(cfg, x), name=f"example1[{cfg.variant}]")


def sampling_box(cfg: Example1Config):
    """Box in (t, x, y, z) on which the default variants are evaluated."""
    if cfg.variant.startswith("sech"):
        return [0.0, 0.0, 0.0, 0.0], [5.0, 1.0, 1.0, 1.0]
    scale = 1 + cfg.M ** 2
    # one quarter period of cn for k <= 0.9 is longer than 1.5
    hi = 1.4 * scale / (1 + cfg.M * np.sum(np.abs(cfg.a)))
    return [0.0] * 4, [hi] * 4


def waves(cfg: Example1Config) -> list:
    """Real wave ``eta`` and complex wave ``lambda``."""
    a = cfg.avec
    return [np.concatenate([[-cfg.M], a]), np.concatenate([[1.0], 1j * a])]


# ------------------------------------------------------------ decomposition

def theta(b, eps, form: str = "corrected"):
    """Complex rotation angle of the mode's rotation matrix.

    ``form="printed"`` keeps the denominator ``b3 (b2^2 + b3^2)``; the
    corrected form takes its square root on ``b2^2 + b3^2``.
    """
    b1, b2, b3 = b
    den = b3 * (b2 * b2 + b3 * b3) if form == "printed" else b3 * np.sqrt(b2 * b2 + b3 * b3)
    arg = -eps * b1 * np.sqrt(b1 * b1 + b2 * b2) / den
    return np.arctan(b2 * (b1 + b3) / (b1 * b3 - b2 * b2)) + 1j * np.arccosh(complex(arg))


def arccosh_argument(b, eps, form: str = "corrected") -> float:
    b1, b2, b3 = b
    den = b3 * (b2 * b2 + b3 * b3) if form == "printed" else b3 * np.sqrt(b2 * b2 + b3 * b3)
    return float(-eps * b1 * np.sqrt(b1 * b1 + b2 * b2) / den)


def default_eps(b) -> int:
    b1, b2, b3 = b
    return 1 if b1 * b3 - b2 * b2 >= 0 else -1


def mode_rotation(th) -> np.ndarray:
    s, c = np.sin(th), np.cos(th)
    return np.array([[0, -s, -c], [0, c, -s], [1, 0, 0]], dtype=complex)


def mode_scalar(cfg: Example1Config, b) -> complex:
    m = cfg.M
    return (1 - 1j * m) * b[2] / (2 * b[0] * (m * m + 1))


def admissible_mixed_state(b, form: str = "corrected") -> bool:
    """States where the mode data is defined: ``|b1| >= 1e-6`` and real arccosh."""
    b = np.asarray(b, dtype=float)
    if abs(b[0]) < 1e-6 or abs(b[2]) < 1e-12 or abs(b[0] * b[2] - b[1] ** 2) < 1e-12:
        return False
    return abs(arccosh_argument(b, default_eps(b), form)) >= 1.0


@dataclass
class MixedData:
    """Evaluator ``(x, u) -> DecompositionData`` for the mixed wave/mode ansatz.

    ``t_vec(x, u)`` gives the real vector ``T`` in ``tau2 = (M + i) T``;
    ``tau1``, ``omega1`` and ``rotation1`` are the free real-wave data.
    """

    cfg: Example1Config
    system: SystemSpec
    form: str = "corrected"
    eps: object = None
    t_vec: object = None
    tau1: object = None
    omega1: float = 0.0
    rotation1: object = None

    def __call__(self, x, u) -> DecompositionData:
        b = self.system.source_vector(u)
        eps = default_eps(b) if self.eps is None else self.eps
        eta, lam = waves(self.cfg)
        tvec = np.zeros(3) if self.t_vec is None else np.asarray(self.t_vec(x, u), dtype=float)
        tau1 = np.zeros(3) if self.tau1 is None else np.asarray(self.tau1(x, u), dtype=float)
        rot1 = np.eye(3) if self.rotation1 is None else np.asarray(self.rotation1(x, u))
        real = Component(WaveVector(eta), tau1, self.omega1, rot1)
        mode = Component(WaveVector(lam), (self.cfg.M + 1j) * tvec, mode_scalar(self.cfg, b),
                         mode_rotation(theta(b, eps, self.form)))
        return DecompositionData([real, mode], "mixed")


def derived_mode_derivative(cfg: Example1Config, b, tvec, eps=None) -> np.ndarray:
    """``dU/dr2 = Omega2 L2 b + (M + i) T`` written out in closed form.

    Equals ``(1 - iM)(b + i y) / (2 (1 + M^2)) + (M + i) T`` with
    ``y = tanh(Im theta) (-b2, b1, 0)``.
    """
    b = np.asarray(b, dtype=float)
    eps = default_eps(b) if eps is None else eps
    th = theta(b, eps)
    y = np.tanh(th.imag) * np.array([-b[1], b[0], 0.0])
    m = cfg.M
    return (1 - 1j * m) * (b + 1j * y) / (2 * (1 + m * m)) + (m + 1j) * np.asarray(tvec)


def printed_mode_derivative(cfg: Example1Config, b, tvec, eps=None) -> np.ndarray:
    """The vector for ``dU/dr2`` transcribed as printed (kept for comparison)."""
    b1, b2, b3 = b
    eps = default_eps(b) if eps is None else eps
    m = cfg.M
    rad = np.sqrt(complex(b1 ** 2 * (b1 ** 2 + b2 ** 2) - b3 ** 2 * (b2 ** 2 + b3 ** 2)))
    e = eps * rad / ((1 + m * m) * np.sqrt(b1 ** 2 + b2 ** 2))
    return (1 + 1j * m) * (np.asarray(tvec) + e * np.array([b2 / b1, 1.0, 0.0])
                           + 1j / (2 * (1 + m * m)) * np.array([b1, b2, b2]))


def reduced_rhs(cfg: Example1Config):
    """Right-hand side ``b / (1 + M^2)`` of the ODE along ``xi``."""
    b = source_function(cfg)
    scale = 1 + cfg.M ** 2
    return lambda f: np.asarray(b(np.asarray(f)), dtype=float) / scale

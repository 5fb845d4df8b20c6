import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemann_kit.chardata import (
    Component,
    DecompositionData,
    IntegralElement,
    WaveVector,
    assemble_projection,
    check_involutivity,
    check_wave_relation,
    dispersion_roots,
    homogeneous_gamma,
    inhomogeneous_gamma,
    nullspace,
    orthogonality_defect,
    symbol_rank,
)
from riemann_kit.errors import DegeneracyError, InputError
from riemann_kit.fluid import FluidParams, fluid_system
from riemann_kit.pde_core import SystemSpec

SQRT2 = 1.4142135623730951


def fluid(kappa=2.0, gravity=(0.0, 0.0, 1.0), omega=(0.0, 0.0, 0.0)):
    return fluid_system(FluidParams(kappa, gravity, omega))


def test_fluid_roots_at_rest():
    roots = dispersion_roots(fluid(), [1, 1, 0, 0, 0], [1, 0, 0])
    assert [m for _, m in roots] == [1, 3, 1]
    assert np.allclose([r for r, _ in roots], [-SQRT2, 0.0, SQRT2], atol=1e-12)


def test_fluid_roots_shift_with_velocity():
    roots = dispersion_roots(fluid(), [1, 1, 1, 0, 0], [1, 0, 0])
    assert np.allclose([r for r, _ in roots], [-1 - SQRT2, -1.0, -1 + SQRT2], atol=1e-12)
    assert roots[1][1] == 3


def test_scalar_burgers_root():
    burgers = SystemSpec(2, 1, 1, lambda u: np.array([[[1.0]], [[u[0]]]]), lambda u: np.zeros(1))
    roots = dispersion_roots(burgers, [2.0], [1.0])
    assert len(roots) == 1 and roots[0][1] == 1
    assert abs(roots[0][0] + 2.0) < 1e-13


def test_identically_zero_determinant():
    mat = np.array([[1.0, 0.0], [0.0, 0.0]])
    sys = SystemSpec(2, 2, 2, lambda u: np.array([mat, mat]), lambda u: np.zeros(2))
    with pytest.raises(DegeneracyError):
        dispersion_roots(sys, [0.0, 0.0], [1.0])


def test_underdetermined_system_has_no_dispersion_roots():
    sys = SystemSpec(2, 2, 1, lambda u: np.ones((2, 1, 2)), lambda u: np.zeros(1))
    with pytest.raises(InputError):
        dispersion_roots(sys, [0.0, 0.0], [1.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_symmetric_hyperbolic_roots_match_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(3, 3))
    b = b + b.T
    sys = SystemSpec(2, 3, 3, lambda u: np.array([np.eye(3), b]), lambda u: np.zeros(3))
    eig = np.sort(-np.linalg.eigvalsh(b))
    if np.min(np.diff(eig)) < 1e-3:
        return
    roots = dispersion_roots(sys, [0, 0, 0], [1.0])
    assert [m for _, m in roots] == [1, 1, 1]
    assert np.allclose([r for r, _ in roots], eig, atol=1e-9 * (1 + np.abs(eig).max()))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-3, 3), st.integers(0, 2**31 - 1))
def test_roots_scale_with_direction(c, v1, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    u = [1.3, 0.8, v1, 0.2, -0.4]
    base = dispersion_roots(fluid(1.4), u, d)
    scaled = dispersion_roots(fluid(1.4), u, c * d)
    assert [m for _, m in base] == [m for _, m in scaled]
    assert np.allclose([c * r for r, _ in base], [r for r, _ in scaled], rtol=1e-9, atol=1e-9)


def test_homogeneous_gamma_dimension_and_residual():
    sys = fluid()
    u = [1, 1, 0, 0, 0]
    basis = homogeneous_gamma(sys, u, [0.0, 1.0, 0.0, 0.0])
    assert basis.shape == (5, 3)
    assert np.max(np.abs(sys.symbol(u, [0.0, 1.0, 0.0, 0.0]) @ basis)) < 1e-12
    assert symbol_rank(sys, u, [0.0, 1.0, 0.0, 0.0]) == 2
    assert homogeneous_gamma(sys, u, [0.3, 1.0, 0.0, 0.0]).shape == (5, 0)


def test_inhomogeneous_gamma_solves_wave_relation():
    sys = fluid(gravity=(0.0, 0.0, 1.0))
    u = np.array([1.2, 0.9, 0.1, 0.0, 0.0])
    gamma, res = inhomogeneous_gamma(sys, u, [0.5, 0.0, 0.0, 1.0])
    assert res < 1e-12
    assert np.allclose(sys.symbol(u, [0.5, 0.0, 0.0, 1.0]) @ gamma, sys.source_vector(u))


def test_nullspace_columns_are_orthonormal():
    ns = nullspace(np.array([[1.0, 1.0, 0.0]]))
    assert ns.shape == (3, 2)
    assert np.allclose(ns.T @ ns, np.eye(2))


def test_wave_vector_validation():
    with pytest.raises(DegeneracyError):
        WaveVector([0.0, 0.0])
    assert not WaveVector(np.array([1.0 + 0j, 2.0])).is_complex
    w = WaveVector([1.0, 2j])
    assert w.is_complex and np.allclose(w.conj().components, [1.0, -2j])


def test_integral_element_residual():
    sys = fluid()
    el = IntegralElement(WaveVector([0.0, 1.0, 0.0, 0.0]), np.array([1.0, 0, 0, 0, 0]), "homogeneous")
    assert el.residual(sys, [1, 1, 0, 0, 0]) < 1e-14


def test_decomposition_variant_rules():
    real = Component(WaveVector([1.0, 0.0]), np.zeros(1), 0.0, np.eye(1))
    mode = Component(WaveVector([1.0, 1j]), np.zeros(1), 0.0, np.eye(1))
    with pytest.raises(InputError):
        DecompositionData([mode], "multiwave")
    with pytest.raises(InputError):
        DecompositionData([real], "multimode")
    with pytest.raises(InputError):
        DecompositionData([real], "mixed")
    with pytest.raises(InputError):
        DecompositionData([real], "nonsense")
    mixed = DecompositionData([real, mode], "mixed")
    assert len(mixed.expanded()) == 3
    assert np.allclose(mixed.expanded()[2].wave.components, [1.0, -1j])


def test_orthogonality_defect():
    th = 0.3 + 0.4j
    s, c = np.sin(th), np.cos(th)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    assert orthogonality_defect(rot) < 1e-14
    assert orthogonality_defect(np.diag([1.0, 1.0, -1.0])) == pytest.approx(2.0)


def test_assemble_projection_rows():
    rots = np.array([np.eye(2), [[0.0, 1.0], [-1.0, 0.0]]])
    proj = assemble_projection(np.array([2.0, 3.0]), rots)
    assert np.allclose(proj, [[2.0, 0.0], [0.0, 3.0]])


def test_wave_relation_is_homogeneous():
    # A = [[1, 0], [0, 1]] for lambda = (1, 0) and [[0, 1], [1, 0]] for lambda = (0, 1)
    sys = SystemSpec(2, 2, 2, lambda u: np.array([np.eye(2), [[0.0, 1.0], [1.0, 0.0]]]),
                     lambda u: np.ones(2))
    cancel = DecompositionData([
        Component(WaveVector([1.0, 0.0]), np.array([1.0, -1.0]), 0.0, np.eye(1)),
        Component(WaveVector([0.0, 1.0]), np.array([1.0, -1.0]), 0.0, np.eye(1)),
    ], "multiwave")
    assert check_wave_relation(sys, [0.0, 0.0], cancel) < 1e-15
    lone = DecompositionData([Component(WaveVector([1.0, 0.0]), np.array([2.0, 0.0]), 0.0,
                                        np.eye(1))], "multiwave")
    assert check_wave_relation(sys, [0.0, 0.0], lone) == pytest.approx(2.0)


def test_involutivity_constant_and_perturbed():
    const = lambda r: [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])]
    grid = [[0.1, 0.2], [0.3, -0.4]]
    assert float(check_involutivity(const, grid)) < 1e-12
    bent = lambda r: [np.array([1.0, 0.0, 0.5 * r[1]]), np.array([0.0, 1.0, 0.0])]
    assert float(check_involutivity(bent, grid)) > 1e-3

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemann_kit.chardata import Component, DecompositionData, WaveVector
from riemann_kit.errors import InputError, LiftError, SingularityError
from riemann_kit.examples import ex1
from riemann_kit.fluid import FluidParams, FluidState, fluid_element, fluid_system
from riemann_kit.pde_core import SystemSpec
from riemann_kit.superpose import (
    GridSpec,
    ReducedSystem,
    SolutionTable,
    build_reduced,
    integrate_reduced,
    lift_solution,
    mode_pair_rhs,
    simple_state_verify,
    welldefined_check,
)


def example1_reduced(t_vec=None):
    cfg = ex1.Example1Config()
    sys = ex1.example1_system(cfg)
    data = ex1.MixedData(cfg, sys, t_vec=t_vec)
    return cfg, sys, ReducedSystem(sys, data)


def admissible_state(sys, seed):
    rng = np.random.default_rng(seed)
    while True:
        u = rng.uniform(-1, 1, 3)
        if sys.admissible(u) and ex1.admissible_mixed_state(sys.source_vector(u)):
            return u


def unit_source():
    # u_t = 1, one real wave (1, 0)
    return SystemSpec(2, 1, 1, lambda u: np.array([[[1.0]], [[0.0]]]), lambda u: np.ones(1))


def test_mode_column_matches_closed_form():
    t = np.array([0.2, -0.1, 0.4])
    cfg, sys, rs = example1_reduced(lambda x, u: t)
    for seed in range(5):
        u = admissible_state(sys, seed)
        full = rs.rhs_complex(u, np.zeros(4))
        expected = ex1.derived_mode_derivative(cfg, sys.source_vector(u), t)
        assert np.allclose(full[:, 1], expected, atol=1e-12)
        assert np.allclose(full[:, 2], np.conj(full[:, 1]), atol=0)
        real = rs.rhs(u, np.zeros(4))
        assert real.shape == (3, 3)
        assert np.allclose(real[:, 1], 2 * expected.real) and np.allclose(real[:, 2], -2 * expected.imag)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_mode_pair_formula_matches_stacked_inverse(seed, q):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(q, 1)) + 1j * rng.normal(size=(q, 1))
    rho = 0.3 * (rng.normal(size=(1, q)) + 1j * rng.normal(size=(1, q)))
    big_z = np.hstack([z, z.conj()])
    big_r = np.vstack([rho, rho.conj()])
    mat = np.eye(2) + big_r @ big_z
    if np.linalg.cond(mat) > 1e8:
        return
    full = big_z @ np.linalg.inv(mat)
    s = z @ np.linalg.inv(np.eye(1) + rho @ z)
    assert np.allclose(mode_pair_rhs(s, rho)[:, 0], full[:, 0], atol=1e-9 * (1 + np.abs(full).max()))


def test_build_reduced_rejects_bad_rotation():
    sys = unit_source()
    bad = lambda x, u: DecompositionData([Component(WaveVector([1.0, 0.0]), np.zeros(1), 2.0, np.eye(1))],
                                         "multiwave")
    with pytest.raises(InputError):
        build_reduced(sys, bad, probes=[(np.zeros(2), np.zeros(1))])
    good = lambda x, u: DecompositionData([Component(WaveVector([1.0, 0.0]), np.zeros(1), 1.0, np.eye(1))],
                                          "multiwave")
    rs = build_reduced(sys, good, probes=[(np.zeros(2), np.zeros(1))])
    assert rs.variant == "multiwave"
    assert rs.rhs([0.0], np.zeros(2)).tolist() == [[1.0]]


def test_singular_matrix_is_reported():
    sys = unit_source()
    data = lambda x, u: DecompositionData([Component(WaveVector([1.0, u[0]]), np.zeros(1), 1.0, np.eye(1))],
                                          "multiwave")
    rs = ReducedSystem(sys, data, lambda u: [np.array([[0.0], [1.0]])])
    assert rs.rhs([0.0], np.array([0.0, 2.0])).tolist() == [[1.0 / 3.0]]
    with pytest.raises(SingularityError):
        rs.rhs_complex([0.0], np.array([0.0, -1.0]))


class _Stub:
    def __init__(self, waves, rhs):
        self._waves, self._rhs = waves, rhs

    def waves(self, u, x=None):
        return self._waves

    def rhs(self, u, x):
        return self._rhs(u, x)


def test_welldefined_constant_data_is_zero():
    _, sys, rs = example1_reduced()
    u = admissible_state(sys, 2)
    res = welldefined_check(rs, [(np.array([0.1, 0.2, 0.3, 0.4]), u)])
    assert not res.vacuous and float(res) < 1e-8


def test_welldefined_vacuous_and_violated():
    full = _Stub([np.array([1.0, 0.0]), np.array([0.0, 1.0])], lambda u, x: np.zeros((1, 2)))
    res = welldefined_check(full, [(np.zeros(2), np.zeros(1))])
    assert res.vacuous and res.note == "no orthogonality conditions"
    leaky = _Stub([np.array([1.0, 0.0, 0.0])], lambda u, x: np.array([[x[2]]]))
    assert float(welldefined_check(leaky, [(np.zeros(3), np.zeros(1))])) == pytest.approx(1.0)


def test_zero_rhs_gives_constant_table():
    tab = integrate_reduced(lambda r, f: np.zeros((2, 2)), [1.0, -2.0], GridSpec([0, 0], [1, 1], [4, 5]))
    assert tab.values.shape == (4, 5, 2)
    assert np.all(tab.values == np.array([1.0, -2.0]))
    assert tab.defect == 0.0 and tab.integrable


def test_potential_rhs_is_integrable():
    # f = r1^2 r2 + r2
    rhs = lambda r, f: np.array([[2 * r[0] * r[1], r[0] ** 2 + 1]])
    tab = integrate_reduced(rhs, [0.0], GridSpec([0, 0], [1, 1], [6, 6]), max_step=0.05)
    r1, r2 = np.meshgrid(*tab.axes, indexing="ij")
    assert np.allclose(tab.values[..., 0], r1 ** 2 * r2 + r2, atol=1e-12)
    assert tab.defect <= 1e-8 and tab.integrable


def test_incompatible_rhs_is_flagged():
    # d/dr2 of f_r1 is 1 but d/dr1 of f_r2 is 0
    tab = integrate_reduced(lambda r, f: np.array([[r[1], 0.0]]), [0.0], GridSpec([0, 0], [1, 1], [5, 5]),
                            max_step=0.1)
    assert tab.defect == pytest.approx(1.0, rel=1e-9)
    assert not tab.integrable


def sech_error(step):
    rhs = lambda r, f: (-f * np.sqrt(np.maximum(1 - f * f, 0.0)) / 10)[:, None]
    tab = integrate_reduced(rhs, [1 / np.cosh(0.5)], GridSpec([0], [10], [11]), max_step=step)
    return np.max(np.abs(tab.values[:, 0] - 1 / np.cosh(tab.axes[0] / 10 + 0.5)))


def test_fourth_order_convergence():
    assert sech_error(1e-3) <= 1e-6
    assert sech_error(0.2) / sech_error(0.1) >= 12


def test_dense_evaluation_between_nodes():
    rhs = lambda r, f: (-f * np.sqrt(np.maximum(1 - f * f, 0.0)) / 10)[:, None]
    tab = integrate_reduced(rhs, [1 / np.cosh(0.5)], GridSpec([0], [10], [6]))
    assert tab(3.3)[0] == pytest.approx(1 / np.cosh(0.83), abs=1e-10)


def test_csv_roundtrip(tmp_path):
    rhs = lambda r, f: np.array([[1.0, 2.0], [r[1], r[0]]])
    tab = integrate_reduced(rhs, [0.5, 0.0], GridSpec([0, 0], [1, 2], [3, 4]), labels=["a", "b"])
    path = tmp_path / "t.csv"
    tab.to_csv(path)
    back = SolutionTable.from_csv(path, 2)
    assert back.labels == ["a", "b"]
    assert np.array_equal(back.values, tab.values)
    assert all(np.array_equal(a, b) for a, b in zip(back.axes, tab.axes))
    assert path.read_text().splitlines()[0] == "r1,r2,a,b"


def test_failing_rhs_returns_marked_table():
    def rhs(r, f):
        if r[0] > 0.5:
            raise SingularityError("blow-up", np.inf)
        return np.ones((1, 1))

    tab = integrate_reduced(rhs, [0.0], GridSpec([0], [1], [5]))
    assert "blow-up" in tab.error and not tab.integrable
    assert np.all(np.isnan(tab.values))


def test_step_must_be_positive():
    with pytest.raises(InputError):
        integrate_reduced(lambda r, f: np.zeros((1, 1)), [0.0], GridSpec([0], [1], [2]), max_step=0.0)


def test_lift_constant_waves():
    u = lift_solution(lambda r: np.array([r[0] + 2 * r[1]]), [np.array([1.0, 0.0]), np.array([0.0, 1.0])],
                      [0.3, 0.4])
    assert u.tolist() == [pytest.approx(1.1)]


def test_lift_u_dependent_waves():
    f = lambda r: np.array([0.5 * np.sin(r[0])])
    waves = lambda u: [np.array([1.0, 0.2 * u[0]])]
    x = np.array([0.7, 1.5])
    u = lift_solution(f, waves, x, guess=[0.0])
    assert abs(u[0] - 0.5 * np.sin(0.7 + 0.3 * u[0])) <= 1e-10
    with pytest.raises(InputError):
        lift_solution(f, waves, x)


def test_lift_without_fixed_point():
    with pytest.raises(LiftError):
        lift_solution(lambda r: np.array([r[0] + 1.0]), lambda u: [np.array([u[0], 0.0])], [1.0, 0.0],
                      guess=[0.0])


def test_simple_state_linear_source():
    rep = simple_state_verify(unit_source(), lambda u: np.ones(1), lambda u: np.array([1.0, 0.0]), [0.0],
                              num=21, n=20)
    assert rep.passed and rep.max_rank == 1


def test_simple_state_fluid_entropic():
    params = FluidParams(1.4, (0.0, 0.0, 1.0))
    sys = fluid_system(params)
    opts = dict(gamma_rho=0.0, alpha=(1.0, 0.0, 0.0))

    def gamma0(u):
        return fluid_element("E0", FluidState.from_u(u), params, **opts).gamma

    def lambda0(u):
        return fluid_element("E0", FluidState.from_u(u), params, **opts).wave.components.real

    rep = simple_state_verify(sys, gamma0, lambda0, [1.0, 1.0, 0.1, 0.0, 0.0], r_range=(-0.2, 0.2),
                              num=21, n=20)
    assert rep.passed and rep.max_rank == 1
    assert rep.to_dict()["pass"] is True


def test_simple_state_rotating_direction_fails():
    rep = simple_state_verify(unit_source(), lambda u: np.ones(1), lambda u: np.array([1.0, u[0]]), [0.0],
                              num=11, n=5)
    assert not rep.passed
    assert rep.reason == "direction of lambda0 varies along gamma0"

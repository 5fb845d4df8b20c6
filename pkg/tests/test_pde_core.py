import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemann_kit.errors import (
    DomainError,
    EvaluationError,
    InputError,
    RankError,
    SamplingError,
    StateError,
)
from riemann_kit.pde_core import (
    BoxSampler,
    CandidateSolution,
    SystemSpec,
    complement_basis,
    jacobian_fd,
    negate_source,
    numerical_rank,
    residual,
    span_check,
    verify_on_grid,
)


def advection(c=0.7, source=0.0):
    return SystemSpec(2, 1, 1, lambda u: np.array([[[1.0]], [[c]]]),
                      lambda u: np.array([source]), name="advection")


def travelling(c=0.7):
    return CandidateSolution(lambda x: np.array([np.sin(x[1] - c * x[0])]), name="wave")


def test_travelling_wave_has_tiny_residual():
    r = residual(advection(), travelling(), [0.3, 0.4])
    assert abs(r[0]) < 1e-9


def test_wrong_speed_is_detected():
    r = residual(advection(0.7), travelling(1.2), [0.3, 0.4])
    assert abs(r[0]) > 0.1


def test_linear_candidate_jacobian_is_exact():
    mat = np.array([[1.0, 2.0, -1.0], [0.5, 0.0, 3.0]])
    sol = CandidateSolution(lambda x: mat @ x)
    assert np.allclose(jacobian_fd(sol, [0.1, -0.2, 0.3]), mat, atol=1e-9)


def test_jacobian_rejects_nonpositive_step():
    with pytest.raises(InputError):
        jacobian_fd(travelling(), [0.0, 0.0], h=0.0)


def test_coefficient_shape_is_checked():
    bad = SystemSpec(2, 1, 1, lambda u: np.zeros((2, 2, 2)), lambda u: np.zeros(1))
    with pytest.raises(InputError):
        bad.coefficient_matrices([0.0])


def test_nonfinite_source_raises():
    bad = SystemSpec(1, 1, 1, lambda u: np.ones((1, 1, 1)), lambda u: np.array([np.nan]))
    with pytest.raises(EvaluationError):
        bad.source_vector([0.0])


def test_overdetermined_system_rejected():
    with pytest.raises(InputError):
        SystemSpec(2, 1, 2, lambda u: None, lambda u: None)


def test_domain_and_complex_values():
    sol = CandidateSolution(lambda x: np.array([1.0 + 1e-15j]), domain=lambda x: x[0] > 0)
    assert sol([1.0]).dtype == float
    with pytest.raises(DomainError):
        sol([-1.0])
    loud = CandidateSolution(lambda x: np.array([1.0 + 1e-3j]))
    with pytest.raises(EvaluationError):
        loud([0.0])


def test_inadmissible_state_raises():
    sys = SystemSpec(2, 1, 1, lambda u: np.array([[[1.0]], [[0.0]]]), lambda u: np.zeros(1),
                     admissible=lambda u: u[0] > 0)
    with pytest.raises(StateError):
        residual(sys, CandidateSolution(lambda x: np.array([-1.0])), [0.0, 0.0])


def test_philox_sampler_is_frozen():
    # cross-implementation contract: numpy Philox with key = seed
    pts = BoxSampler([0.0, 0.0], [1.0, 1.0], 7).points(1, lambda x: True)
    assert pts[0].tolist() == [0.46881748695593284, 0.42614583623918467]


def test_sampler_rejects_inverted_box():
    with pytest.raises(InputError):
        BoxSampler([1.0], [0.0], 0)


def test_verify_passes_and_negative_control_fails():
    sampler = BoxSampler([0.0, 0.0], [1.0, 1.0], 3)
    good = verify_on_grid(advection(), travelling(), sampler, 50)
    assert good.passed and good.n == 50
    bad = verify_on_grid(advection(source=0.5), travelling(), sampler, 50)
    assert not bad.passed and len(bad.failures) == 50
    assert negate_source(advection(source=0.5)).source_vector([0.0])[0] == -0.5


def test_threads_do_not_change_report():
    sampler = BoxSampler([0.0, 0.0], [1.0, 1.0], 11)
    one = verify_on_grid(advection(), travelling(1.0), sampler, 40)
    many = verify_on_grid(advection(), travelling(1.0), sampler, 40, threads=4)
    assert one.to_dict() == many.to_dict()


def test_empty_domain_raises_sampling_error():
    sol = CandidateSolution(lambda x: np.zeros(1), domain=lambda x: False)
    with pytest.raises(SamplingError):
        verify_on_grid(advection(), sol, BoxSampler([0, 0], [1, 1], 0), 2)


def test_residual_consistent_at_two_steps():
    x = [0.2, 0.9]
    r1 = residual(advection(source=0.1), travelling(), x, 1e-5)
    r2 = residual(advection(source=0.1), travelling(), x, 1e-4)
    assert np.allclose(r1, r2, atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(12))))
def test_aggregates_do_not_depend_on_point_order(perm):
    sampler = BoxSampler([0.0, 0.0], [1.0, 1.0], 5)
    pts = sampler.points(12, lambda x: True)
    sys, sol = advection(source=0.3), travelling(0.5)
    res = np.array([np.abs(residual(sys, sol, p)) for p in pts])
    shuffled = res[list(perm)]
    assert res.max() == shuffled.max()
    assert np.isclose(res.mean(), shuffled.mean(), rtol=1e-15)


def test_span_check_in_span_and_out_of_span():
    waves = [np.array([1.0, 0.0, 2.0])]
    jac = np.outer([1.0, -2.0], waves[0])
    assert span_check(jac, waves) < 1e-14
    assert span_check(np.eye(3)[:2], waves) > 0.5


def test_dependent_waves_need_explicit_flag():
    waves = [np.array([1.0, 0.0]), np.array([2.0, 0.0])]
    with pytest.raises(RankError):
        complement_basis(waves, 2)
    assert complement_basis(waves, 2, allow_dependent=True).shape == (1, 2)


def test_complex_wave_contributes_two_rows():
    assert complement_basis([np.array([1.0, 1j, 0.0])], 3).shape == (1, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_complement_is_orthonormal_and_orthogonal(p, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, p))
    waves = list(rng.normal(size=(k, p)))
    xi = complement_basis(waves, p)
    assert xi.shape == (p - k, p)
    assert np.allclose(xi @ xi.T, np.eye(p - k), atol=1e-10)
    assert np.max(np.abs(np.array(waves) @ xi.T), initial=0.0) < 1e-10


def test_numerical_rank():
    assert numerical_rank(np.outer([1, 2], [3, 4, 5])) == 1
    assert numerical_rank(np.zeros((2, 2))) == 0
    assert numerical_rank(np.eye(3)) == 3

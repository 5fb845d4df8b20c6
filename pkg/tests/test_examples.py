import numpy as np
import pytest

from riemann_kit.chardata import check_rotation_condition, check_wave_relation, orthogonality_defect
from riemann_kit.errors import ConstraintError, DomainError, InputError
from riemann_kit.examples import ex1, ex2, ex3
from riemann_kit.pde_core import BoxSampler, jacobian_fd, numerical_rank, residual, span_check, \
    verify_on_grid


def admissible_states(sys, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        u = rng.uniform(-1, 1, 3)
        if sys.admissible(u) and ex1.admissible_mixed_state(sys.source_vector(u)):
            out.append(u)
    return out


# ---------------------------------------------------------------- example 1

def test_sech_value():
    cfg = ex1.Example1Config()
    u = ex1.example1_family(cfg)([1.0, 0.2, 0.3, 0.1])
    assert np.allclose(u, 0.962040964306006, atol=1e-15)


@pytest.mark.parametrize("variant", ["sech", "cnoidal", "bounded-multisoliton"])
def test_example1_variants_verify(variant):
    cfg = ex1.Example1Config(variant=variant)
    lo, hi = ex1.sampling_box(cfg)
    rep = verify_on_grid(ex1.example1_system(cfg), ex1.example1_family(cfg), BoxSampler(lo, hi, 2), 40,
                         tol=1e-6)
    assert rep.passed


def test_printed_sech_source_does_not_verify():
    cfg = ex1.Example1Config(variant="sech-printed", a=(2.0, 1.5, 1.0))
    lo, hi = ex1.sampling_box(cfg)
    rep = verify_on_grid(ex1.example1_system(cfg), ex1.example1_family(cfg), BoxSampler(lo, hi, 2), 40)
    assert not rep.passed


def test_solution_depends_only_on_invariants():
    cfg = ex1.Example1Config(a=(1.0, 0.5, -0.7), shifts=({"poly": [0.5, 0.3]}, 0.2, {"sin": [0.2, 1.0, 0.0]}))
    sol = ex1.example1_family(cfg)
    a = cfg.avec
    # directions in (t, x, y, z) annihilating dr1 and dxi
    kernel = [np.concatenate([[0.0], np.cross(a, e)]) for e in np.eye(3)[:2]]
    jac = jacobian_fd(sol, [0.3, 0.4, 0.3, 0.5])
    for k in kernel:
        assert np.max(np.abs(jac @ k)) < 1e-8


def test_derivative_along_xi_matches_reduced_ode():
    cfg = ex1.Example1Config(a=(1.2, 0.8, 1.0))
    sol = ex1.example1_family(cfg)
    x = np.array([1.5, 0.2, 0.1, 0.3])
    # (1, a) keeps r1 fixed because M = |a|^2, and advances xi by 1 + M^2
    step = np.concatenate([[1.0], cfg.avec])
    dxi = 1.0 + cfg.M ** 2
    h = 1e-5
    fd = (sol(x + h * step) - sol(x - h * step)) / (2 * h) / dxi
    rhs = ex1.reduced_rhs(cfg)(sol(x))
    assert np.allclose(fd, rhs, atol=1e-6)


def test_solitonic_variant_rejects_zero_coefficient():
    with pytest.raises(ConstraintError):
        ex1.Example1Config(a=(1.0, 0.0, 1.0))
    with pytest.raises(InputError):
        ex1.example1_family(ex1.Example1Config(variant="custom", source=lambda u: u))


def test_constant_coefficients_give_identical_dispersion():
    from riemann_kit.chardata import dispersion_roots

    sys = ex1.example1_system(ex1.Example1Config())
    assert dispersion_roots(sys, [0.1, 0.2, 0.3], [1, 0, 0]) == \
        dispersion_roots(sys, [0.5, -0.4, 0.0], [1, 0, 0])


def test_jacobian_in_wave_span():
    cfg = ex1.Example1Config()
    jac = jacobian_fd(ex1.example1_family(cfg), [1.0, 0.2, 0.3, 0.1])
    assert span_check(jac, ex1.waves(cfg), allow_dependent=True) < 1e-6


def test_corrected_mode_data_satisfies_rotation_condition():
    cfg = ex1.Example1Config()
    sys = ex1.example1_system(cfg)
    data = ex1.MixedData(cfg, sys)
    for u in admissible_states(sys, 30, 4):
        b = sys.source_vector(u)
        assert check_rotation_condition(sys, u, np.zeros(4), data) <= 1e-8
        rot = ex1.mode_rotation(ex1.theta(b, ex1.default_eps(b)))
        assert orthogonality_defect(rot) <= 1e-10
        assert abs(np.linalg.det(rot) - 1) <= 1e-10


def test_printed_angle_fails_rotation_condition():
    cfg = ex1.Example1Config()
    sys = ex1.example1_system(cfg)
    data = ex1.MixedData(cfg, sys, form="printed")
    worst = [check_rotation_condition(sys, u, np.zeros(4), data)
             for u in admissible_states(sys, 30, 4)
             if ex1.admissible_mixed_state(sys.source_vector(u), "printed")]
    assert worst and min(worst) > 0.1


def test_wave_relation_holds_for_any_real_t():
    cfg = ex1.Example1Config()
    sys = ex1.example1_system(cfg)
    rng = np.random.default_rng(5)
    for u in admissible_states(sys, 20, 6):
        t, tau1 = rng.normal(size=3), rng.normal(size=3)
        data = ex1.MixedData(cfg, sys, t_vec=lambda x, u: t, tau1=lambda x, u: tau1)
        assert check_wave_relation(sys, u, data(np.zeros(4), u)) <= 1e-10


def test_printed_mode_derivative_disagrees_with_derived():
    cfg = ex1.Example1Config()
    sys = ex1.example1_system(cfg)
    u = admissible_states(sys, 1, 7)[0]
    b = sys.source_vector(u)
    t = np.array([0.1, -0.2, 0.3])
    gap = np.max(np.abs(ex1.derived_mode_derivative(cfg, b, t) - ex1.printed_mode_derivative(cfg, b, t)))
    assert gap > 1e-2


# ---------------------------------------------------------------- example 2

def example2_report(seed=3, n=40, **kw):
    cfg = ex2.Example2Config(**kw)
    lo, hi = ex2.sampling_box(cfg)
    return verify_on_grid(ex2.example2_system(cfg), ex2.example2_family(cfg), BoxSampler(lo, hi, seed), n,
                          tol=1e-6)


def test_example2_passes_with_unit_mu():
    assert example2_report().passed


def test_example2_fails_for_other_mu():
    assert not example2_report(mu=2.0).passed


def test_example2_state_is_real():
    cfg = ex2.Example2Config(potential="r2^3+r2bar^3", f1={"sin": [0.3, 1.0, 0.0]})
    for x in ([0.1, 0.2, -0.3, 0.4], [-0.5, 0.7, 0.2, 0.0]):
        assert np.max(np.abs(ex2.complex_state(cfg, x).imag)) <= 1e-12
    assert ex2.reality_defect(cfg, [[0.3, 0.4], [-1.0, 2.0]]) == 0.0


def test_example2_log_domain():
    cfg = ex2.Example2Config(c1=-0.5)
    with pytest.raises(DomainError):
        ex2.complex_state(cfg, [1.0, 0.0, 0.0, 0.0])


def test_example2_rejects_bad_constants():
    with pytest.raises(ConstraintError):
        ex2.Example2Config(a=(1.0, 1.0, 0.0))
    with pytest.raises(InputError):
        ex2.Example2Config(potential="nope")


# ---------------------------------------------------------------- example 3

def test_neither_denominator_solves_transformed_system():
    out = ex3.resolve_denominator(ex3.Example3Config(), n=20)
    assert out["vanishes"] is False
    assert out["sq"] > 1e-2 and out["quartic"] > 1e-2


def test_original_and_transformed_residuals_agree():
    # rows: curl equation unchanged, continuity multiplied by rho
    cfg = ex3.Example3Config(f="r^2+1")
    trans, orig = ex3.example3_systems(cfg)
    x = [1.1, 0.7]
    rt = residual(trans, ex3.example3_family(cfg), x)
    ro = residual(orig, ex3.example3_family(cfg, original=True), x)
    rho = ex3.example3_family(cfg, original=True)(x)[2]
    assert abs(ro[0] - rt[0]) < 1e-6 * (1 + abs(rt[0]))
    assert abs(ro[1] - rho * rt[1]) < 1e-6 * (1 + abs(ro[1]))


def test_mode_solution_rank():
    x = [1.1, 0.7]
    rank_r = numerical_rank(jacobian_fd(ex3.example3_family(ex3.Example3Config(f="r")), x), 1e-6)
    rank_sq = numerical_rank(jacobian_fd(ex3.example3_family(ex3.Example3Config(f="r^2+1")), x), 1e-6)
    assert (rank_r, rank_sq) == (1, 2)


def test_example3_config_errors():
    with pytest.raises(ConstraintError):
        ex3.Example3Config(kappa=0.0)
    with pytest.raises(InputError):
        ex3.Example3Config(f="r^5")
    with pytest.raises(DomainError):
        ex3.example3_family(ex3.Example3Config(f="r^2+1"))([0.0, 1.0])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from vandamp import (ConfigError, DampingSchedule, NormTriple, PreconditionError, ScalarNonlinearity, SourceTerm,
                     SymmetricOperator, build_wave_problem, check_damping, classify_source, compute_minimizer,
                     flat_basin_problem, interpolation_constant, make_problem, quadratic_problem,
                     shifted_quartic_problem, source_weighted_integral, validate_problem)
from vandamp.problem import gamma_eval, grad_phi, phi, source_eval, v_norm, vprime_norm
from vandamp.rng import SplitMix64

from conftest import e1

GRID = np.linspace(0.0, 50.0, 501)


# damping

@pytest.mark.parametrize("K,alpha,t,expected", [(1, 0.5, 0, 1.0), (1, 0.5, 3, 0.5), (2, 0, 10, 2.0)])
def test_gamma_values(K, alpha, t, expected):
    assert gamma_eval(DampingSchedule("power", K, alpha), t) == pytest.approx(expected, rel=1e-15)


def test_gamma_rejects_negative_time():
    with pytest.raises(PreconditionError):
        gamma_eval(DampingSchedule("power", 1, 0.5), -1.0)


@pytest.mark.parametrize("kw", [dict(K=0.0), dict(alpha=1.0), dict(alpha=-0.1), dict(t0=-1.0)])
def test_damping_rejects_bad_constants(kw):
    with pytest.raises(PreconditionError):
        DampingSchedule("power", **{"K": 1.0, "alpha": 0.5, **kw})


def test_exact_power_law_meets_both_hypotheses_with_equality():
    rep = check_damping(DampingSchedule("power", 1, 0.5), GRID)
    assert rep.h1 and rep.h2 and rep.h2_equality


def test_faster_decay_breaks_lower_bound():
    t = np.linspace(0, 100, 201)
    sched = DampingSchedule("tabulated", 1.0, 0.5, table_t=tuple(t), table_gamma=tuple(1.0 / (1.0 + t)))
    rep = check_damping(sched, t)
    assert not rep.h1
    assert rep.h1_first_violation == pytest.approx(t[1])


def test_scaled_power_passes_with_constant_product():
    sched = DampingSchedule("scaled_power", 1.0, 0.3, scale=2.0)
    rep = check_damping(sched, GRID)
    assert rep.h1 and rep.h2 and rep.h2_equality
    assert gamma_eval(sched, 7.0) == pytest.approx(2.0 * 8.0 ** -0.3)


def test_increasing_product_breaks_monotonicity():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    sched = DampingSchedule("tabulated", 1.0, 0.0, table_t=tuple(t), table_gamma=(1.0, 1.0, 2.0, 2.0))
    rep = check_damping(sched, t)
    assert rep.h1 and not rep.h2 and rep.h2_first_violation == 2.0


def test_hypotheses_only_checked_after_t0():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    sched = DampingSchedule("tabulated", 1.0, 0.0, t0=1.5, table_t=tuple(t), table_gamma=(0.1, 0.1, 1.0, 1.0))
    assert check_damping(sched, t).h1


def test_empty_grid_rejected():
    with pytest.raises(PreconditionError):
        check_damping(DampingSchedule(), [])


# potential

def test_phi_and_grad_scalar_examples(scalar, scalar_cubic):
    assert phi(scalar, np.array([2.0])) == 2.0
    assert phi(scalar_cubic, np.array([1.0])) == 0.75
    assert grad_phi(scalar_cubic, np.array([2.0]))[0] == 10.0


def test_phi_at_minimizer_is_phi_star():
    prob = shifted_quartic_problem(4)
    assert phi(prob, prob.ubar) == pytest.approx(prob.phi_star, abs=1e-14)
    assert np.max(np.abs(grad_phi(prob, prob.ubar))) <= 1e-10


def test_identity_quadratic_minimizer():
    ubar, phi_star = compute_minimizer(SymmetricOperator.from_matrix(np.eye(5)))
    assert np.all(ubar == 0) and phi_star == 0


def test_odd_cubic_minimizer_at_zero(scalar_cubic):
    assert scalar_cubic.ubar[0] == pytest.approx(0.0, abs=1e-12)
    assert scalar_cubic.phi_star == pytest.approx(0.0, abs=1e-14)


def test_shifted_quartic_minimizer_matches_bisection():
    prob = make_problem([[1.0]], ScalarNonlinearity("cubic", 1.0, 2.0))
    root = optimize.bisect(lambda s: (s - 2.0) ** 3 + s, 0.0, 2.0, xtol=1e-15)
    assert prob.ubar[0] == pytest.approx(root, abs=1e-10)
    assert prob.ubar[0] == pytest.approx(1.0, abs=1e-10)
    assert prob.phi_star == pytest.approx(0.75, abs=1e-12)


def test_asymmetric_matrix_rejected():
    with pytest.raises(PreconditionError):
        SymmetricOperator.from_matrix([[1.0, 2.0], [0.0, 1.0]])


def test_indefinite_matrix_rejected():
    with pytest.raises(PreconditionError):
        SymmetricOperator.from_matrix([[1.0, 0.0], [0.0, -1.0]])


@pytest.mark.parametrize("builder", [lambda: quadratic_problem(4), lambda: shifted_quartic_problem(4),
                                     lambda: shifted_quartic_problem(3, shift=0.0), lambda: flat_basin_problem(3),
                                     lambda: build_wave_problem(8, ScalarNonlinearity("cubic", 1.0, 0.0))])
def test_families_validate(builder):
    assert all(validate_problem(builder()).values())


def test_even_and_flat_flags():
    assert shifted_quartic_problem(2, shift=0.0).even
    assert not shifted_quartic_problem(2, shift=1.0).even
    assert flat_basin_problem(2).flat_interior
    assert not quadratic_problem(2).flat_interior


def test_flat_basin_gradient_vanishes_inside():
    prob = flat_basin_problem(3, radius=1.0)
    assert np.all(prob.grad(np.array([0.9, -0.5, 0.0])) == 0)
    assert prob.phi(np.array([2.0, 0.0, 0.0])) == pytest.approx(1.0)


# wave problem

def test_wave_spectrum_matches_discrete_laplacian():
    n = 12
    prob = build_wave_problem(n)
    h = 1.0 / (n + 1)
    k = np.arange(1, n + 1)
    expected = 4.0 / h**2 * np.sin(k * math.pi * h / 2) ** 2
    assert np.allclose(np.sort(prob.A.eigvalsh()), np.sort(expected), rtol=1e-12)


def test_wave_cubic_minimizer_is_zero():
    prob = build_wave_problem(64, ScalarNonlinearity("cubic", 1.0, 0.0))
    assert np.max(np.abs(prob.ubar)) <= 1e-12 and abs(prob.phi_star) <= 1e-14
    assert prob.lambda_max_exact == pytest.approx(4 * 65**2)


def test_wave_rejects_nonmonotone_nonlinearity():
    with pytest.raises(PreconditionError):
        build_wave_problem(8, ScalarNonlinearity("cubic", 1.0, 1.0))


# sources

def test_source_examples():
    d = e1(3)
    assert np.all(source_eval(SourceTerm.zero(3), 5.0) == 0)
    assert np.allclose(source_eval(SourceTerm("power_decay", d, c=1.0, beta=2.0), 1.0), 0.25 * d)
    assert np.allclose(source_eval(SourceTerm("exp_decay", d, c=3.0, rate=1.0), 0.0), 3.0 * d)


def test_classify_examples():
    sched = DampingSchedule("power", 1.0, 0.5)
    rep = classify_source(sched, SourceTerm("power_decay", e1(1), c=1.0, beta=1.75))
    assert rep.op and rep.nu_max == 1.5 and rep.nu_max_open and not rep.probe
    rep = classify_source(sched, SourceTerm("power_decay", e1(1), c=1.0, beta=1.2))
    assert not rep.op and rep.probe and rep.nu_max == pytest.approx(0.4)
    rep = classify_source(DampingSchedule("power", 1.0, 0.3), SourceTerm.zero(1))
    assert rep.op and rep.th2_square and rep.th3_square and rep.nu_max == 1.3


def test_exp_source_satisfies_everything():
    rep = classify_source(DampingSchedule("power", 3.0, 0.5), SourceTerm("exp_decay", e1(2), c=1.0, rate=0.1))
    assert rep.op and rep.th2_square and rep.th3_square and rep.nu_max == 1.5


def test_prop1_applicability_is_open_at_nu_max():
    rep = classify_source(DampingSchedule("power", 1.0, 0.5), SourceTerm("power_decay", e1(1), c=1.0, beta=1.75))
    assert rep.prop1_applicable(1.3) and not rep.prop1_applicable(1.5) and not rep.prop1_applicable(1.6)


def test_weighted_integral_examples():
    s = SourceTerm("power_decay", e1(1), c=1.0, beta=2.0)
    assert source_weighted_integral(s, 0.5, 1, math.inf).value == pytest.approx(2.0, rel=1e-14)
    s = SourceTerm("power_decay", e1(1), c=2.0, beta=1.5)
    assert source_weighted_integral(s, 1.0, 2, math.inf).value == pytest.approx(4.0, rel=1e-14)
    assert source_weighted_integral(SourceTerm.zero(1), 1.0, 2, math.inf).value == 0.0


def test_weighted_integral_flags_divergence():
    s = SourceTerm("power_decay", e1(1), c=1.0, beta=1.2)
    res = source_weighted_integral(s, 0.5, 1, 100.0)
    assert res.divergent and math.isfinite(res.value)


def test_exp_weighted_integral_matches_quadrature():
    s = SourceTerm("exp_decay", e1(1), c=2.0, rate=0.3)
    res = source_weighted_integral(s, 1.5, 1, 40.0)
    ref = integrate.quad(lambda t: (1 + t) ** 1.5 * 2.0 * math.exp(-0.3 * t), 0, 40, epsrel=1e-12)[0]
    tail = integrate.quad(lambda t: (1 + t) ** 1.5 * 2.0 * math.exp(-0.3 * t), 40, math.inf, epsrel=1e-12)[0]
    assert res.value == pytest.approx(ref, rel=1e-10)
    assert res.tail_bound == pytest.approx(tail, rel=1e-8)


def test_modulated_integral_reference_value():
    # frozen from a 30-digit mpmath quadrature split at the zeros of sin
    s = SourceTerm("modulated_power", e1(1), c=1.0, beta=1.5, omega=2.0)
    assert source_weighted_integral(s, 0.5, 1, 50.0).value == pytest.approx(2.482343833341706, rel=1e-12)


@given(beta=st.floats(0.6, 4.0), alpha=st.floats(0.0, 0.95), p=st.sampled_from([1, 2]))
def test_classifier_agrees_with_integral(beta, alpha, p):
    # (op) and the square conditions hold iff the corresponding weighted integral converges
    s = SourceTerm("power_decay", e1(1), c=1.0, beta=beta)
    rep = classify_source(DampingSchedule("power", 1.0, alpha), s)
    r = alpha if p == 1 else 2 * alpha + 1
    converges = not source_weighted_integral(s, r, p, math.inf).divergent
    assert converges == (rep.op if p == 1 else rep.th3_square)


# norms

def test_norms_of_zero_vector():
    nt = NormTriple(quadratic_problem(3))
    assert v_norm(nt, np.zeros(3)) == 0 and vprime_norm(nt, np.zeros(3)) == 0


def test_identity_operator_norm_scaling():
    nt = NormTriple(make_problem(np.eye(4)))
    v = SplitMix64(3).normals(4)
    hv = np.linalg.norm(v)
    assert v_norm(nt, v) == pytest.approx(math.sqrt(2) * hv, rel=1e-14)
    assert vprime_norm(nt, v) == pytest.approx(hv / math.sqrt(2), rel=1e-14)


@given(seed=st.integers(0, 2**32))
def test_norm_chain_on_wave_problem(seed):
    prob = build_wave_problem(16)
    nt = NormTriple(prob)
    v = SplitMix64(seed).normals(16)
    assert nt.vprime_norm(v) <= nt.h_norm(v) * (1 + 1e-12)
    assert nt.h_norm(v) <= nt.v_norm(v) * (1 + 1e-12)


@pytest.mark.parametrize("builder", [lambda: make_problem(np.eye(3)), lambda: flat_basin_problem(3),
                                     lambda: build_wave_problem(16)])
def test_interpolation_constant_is_one(builder):
    assert interpolation_constant(NormTriple(builder()), m=300) <= 1 + 1e-12


# properties

@given(seed=st.integers(0, 2**32))
def test_gradient_matches_finite_differences(seed):
    prob = shifted_quartic_problem(4, shift=0.7)
    u = SplitMix64(seed).normals(4)
    g = prob.grad(u)
    eps = 1e-6
    fd = np.array([(prob.phi(u + eps * e) - prob.phi(u - eps * e)) / (2 * eps * prob.h) for e in np.eye(4)])
    assert np.allclose(g, fd, rtol=1e-6, atol=1e-6 * (1 + np.max(np.abs(g))))


@given(seed=st.integers(0, 2**32))
def test_nonlinearity_is_monotone(seed):
    rng = SplitMix64(seed)
    for nl in (ScalarNonlinearity("cubic", 1.3, 0.4), ScalarNonlinearity("box", 0.7, 1.0)):
        x, y = 3 * rng.normals(6), 3 * rng.normals(6)
        assert np.all((nl.f(x) - nl.f(y)) * (x - y) >= -1e-12)


@given(seed=st.integers(0, 2**32))
def test_convexity_inequality_toward_minimizer(seed):
    prob = shifted_quartic_problem(3, shift=0.5)
    u = 2 * SplitMix64(seed).normals(3)
    gap = prob.phi_star - prob.phi(u) - prob.inner(prob.grad(u), prob.ubar - u)
    assert gap >= -1e-10


def test_box_nonlinearity_potential_is_antiderivative():
    nl = ScalarNonlinearity("box", 0.5, 1.0)
    s = np.linspace(-3, 3, 61)
    eps = 1e-6
    assert np.allclose((nl.F(s + eps) - nl.F(s - eps)) / (2 * eps), nl.f(s), atol=1e-6)


def test_config_error_lists_messages():
    err = ConfigError(["a", "b"])
    assert err.errors == ["a", "b"]

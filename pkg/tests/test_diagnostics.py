import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vandamp import (DampingSchedule, DivergentIntegralError, IntegratorConfig, NormTriple, PreconditionError,
                     SourceTerm, TrajectoryState, build_wave_problem, default_initial, integrate, make_problem,
                     quadratic_problem, shifted_quartic_problem)
from vandamp import diagnostics as dg

from conftest import e1, zero_source

GAMMA1 = DampingSchedule("power", 1.0, 0.0)


def synthetic(t, E):
    return {"t": np.asarray(t, float), "E": np.asarray(E, float)}


def test_energy_examples(scalar):
    assert dg.energy(scalar, TrajectoryState(0, [0.0], [2.0])) == 2.0
    assert dg.energy(scalar, TrajectoryState(0, [1.0], [1.0])) == 1.0
    prob = shifted_quartic_problem(3)
    assert abs(dg.energy(prob, TrajectoryState(0, prob.ubar, np.zeros(3)))) <= 1e-14


def test_anchor_examples(scalar):
    assert dg.anchor(scalar, TrajectoryState(0, [3.0], [0.0])) == 4.5
    wave = build_wave_problem(64)
    u = default_initial(wave, 1.0, shape="bump").u
    assert dg.anchor(wave, TrajectoryState(0, u, np.zeros(64))) == pytest.approx(0.5)


def test_modified_energy_zero_source_equals_energy(scalar):
    s = TrajectoryState(3.0, [0.5], [0.2])
    assert dg.modified_energy(scalar, GAMMA1, zero_source(1), s) == dg.energy(scalar, s)


def test_source_tail_closed_form_matches_quadrature():
    sched = DampingSchedule("power", 2.0, 0.5)
    src = SourceTerm("power_decay", e1(1), c=0.5, beta=1.7)
    # c^2 / (4K) * 4^(-1.9) / 1.9, evaluated with mpmath
    assert dg.source_tail(sched, src, [3.0])[0] == pytest.approx(0.00118081656558083388, rel=1e-13)


def test_source_tail_modulated_matches_quadrature():
    sched = DampingSchedule("power", 1.0, 0.5)
    src = SourceTerm("modulated_power", e1(1), c=1.0, beta=2.0, omega=3.0)
    # mpmath: half the plain integral minus half the quadosc cosine transform
    assert dg.source_tail(sched, src, [0.0])[0] == pytest.approx(0.0419979599309264437, rel=1e-8)


def test_divergent_tail_raises():
    with pytest.raises(DivergentIntegralError):
        dg.source_tail(DampingSchedule("power", 1.0, 0.5), SourceTerm("power_decay", e1(1), c=1, beta=0.7), [0.0])


def test_big_gamma_examples():
    assert dg.big_gamma(DampingSchedule("power", 1.0, 0.0), 2.0, 5.0) == 3.0
    assert dg.big_gamma(DampingSchedule("power", 1.0, 0.5), 0.0, 3.0) == pytest.approx(2.0)
    assert dg.big_gamma(DampingSchedule("power", 1.0, 0.5), 4.0, 4.0) == 0.0


def test_tau0_examples():
    assert dg.tau0(DampingSchedule("power", 1.0, 0.5, t0=2.0)) == 2.0
    assert dg.tau0(DampingSchedule("power", 7.0, 0.0, t0=1.0)) == 1.0
    assert dg.tau0(DampingSchedule("power", 0.1, 0.5)) == pytest.approx(99.0)


@pytest.mark.parametrize("K,expected", [(1.0, 1.0), (2.0, 0.5)])
@pytest.mark.parametrize("tau", [0.0, 3.0, 50.0])
def test_lemma1_constant_damping_exact(K, expected, tau):
    res = dg.lemma1_check(DampingSchedule("power", K, 0.0), tau)
    assert res.lhs == pytest.approx(expected, abs=1e-9)
    assert res.rhs == pytest.approx(2 * expected) and res.passed


@pytest.mark.parametrize("tau", [0.0, 1.0, 10.0, 100.0])
def test_lemma1_half_power(tau):
    assert dg.lemma1_check(DampingSchedule("power", 1.0, 0.5), tau).passed


def test_lemma1_rejects_tau_below_threshold():
    with pytest.raises(PreconditionError):
        dg.lemma1_check(DampingSchedule("power", 0.1, 0.5), 10.0)


def test_lemma1_tabulated_matches_power():
    t = np.linspace(0, 300, 1201)
    tab = DampingSchedule("tabulated", 1.0, 0.5, table_t=tuple(t), table_gamma=tuple((1 + t) ** -0.5))
    a = dg.lemma1_check(tab, 5.0).lhs
    b = dg.lemma1_check(DampingSchedule("power", 1.0, 0.5), 5.0).lhs
    assert a == pytest.approx(b, rel=1e-4)


def test_checkpoint_indices_cover_final_half():
    idx = dg.checkpoint_indices(1001, 16)
    assert idx[0] == 0 and idx[-1] == 1000
    assert np.count_nonzero(idx >= 500) >= 4


def test_energy_residual_second_order(scalar):
    ini = TrajectoryState(0, [1.0], [1.0])
    res = {}
    for dts in (1e-2, 5e-3, 1e-3, 5e-4):
        rec = integrate(IntegratorConfig(dts, 10.0), scalar, GAMMA1, zero_source(1), ini)
        res[dts] = dg.energy_derivative_residual(rec, scalar, GAMMA1, zero_source(1))
    assert res[1e-2] <= 1e-3 and res[1e-3] <= 1e-5
    assert 3.5 <= res[1e-2] / res[5e-3] <= 4.5
    assert 3.5 <= res[1e-3] / res[5e-4] <= 4.5


def test_energy_residual_zero_at_equilibrium():
    prob = shifted_quartic_problem(2)
    rec = integrate(IntegratorConfig(0.01, 2.0), prob, GAMMA1, zero_source(2), TrajectoryState(0, prob.ubar, [0, 0]))
    assert dg.energy_derivative_residual(rec, prob, GAMMA1, zero_source(2)) <= 1e-14


def test_decay_fit_exact_power_law():
    t = np.logspace(0, 4, 400)
    fit = dg.decay_fit(synthetic(t, 1.0 / t), "E", 0.5, nu=0.5)
    assert fit.slope == pytest.approx(-1.0, abs=1e-6) and fit.verdict == "consistent"


def test_decay_fit_constant_is_inconsistent():
    t = np.linspace(0, 1e4, 1000)
    fit = dg.decay_fit(synthetic(t, np.full_like(t, 2.0)), "E", 0.5, nu=0.5)
    assert fit.slope == pytest.approx(0.0, abs=1e-12) and fit.verdict == "inconsistent"


def test_decay_fit_zero_series_is_degenerate():
    t = np.linspace(0, 100, 200)
    fit = dg.decay_fit(synthetic(t, np.zeros_like(t)), "E", 0.5, nu=1.0)
    assert fit.degenerate and fit.verdict == "consistent"


def test_trend_detects_boundary_rate():
    t = np.linspace(0, 1e4, 10001)
    assert not dg.scaled_energy_trend(synthetic(t, (1 + t) ** -1.0), 1.0).passed
    assert dg.scaled_energy_trend(synthetic(t, (1 + t) ** -1.5), 1.0).passed
    zero = dg.scaled_energy_trend(synthetic(t, np.zeros_like(t)), 1.0)
    assert zero.passed and zero.ratio == 0.0


@given(nu=st.floats(0.1, 2.0), excess=st.floats(0.5, 2.0))
def test_trend_passes_for_strictly_faster_power(nu, excess):
    t = np.linspace(0, 1e4, 2001)
    assert dg.scaled_energy_trend(synthetic(t, (1 + t) ** -(nu + excess)), nu).passed


def oscillator_record(undamped, t_end=200.0):
    prob = make_problem([[1.0]])
    rec = integrate(IntegratorConfig(0.01, t_end, 10), prob, undamped, zero_source(1),
                    TrajectoryState(0, [1.0], [0.0]), nu=(0.0,))
    return prob, rec


def test_velocity_integral_unbounded_without_damping(undamped):
    _, rec = oscillator_record(undamped)
    total, bounded = dg.velocity_integral_verdict(rec, 0.0)
    assert total == pytest.approx(100.0, rel=0.01) and not bounded


def test_velocity_integral_requires_configured_nu(undamped):
    _, rec = oscillator_record(undamped)
    with pytest.raises(PreconditionError):
        dg.velocity_integral_verdict(rec, 1.0)


def test_undamped_oscillator_never_converges(undamped):
    prob, rec = oscillator_record(undamped)
    dist, conv = dg.cauchy_check(rec, NormTriple(prob), "H")
    assert dist > 1.0 and not conv
    assert not dg.anchor_limit_check(rec)[1]


def test_equilibrium_passes_every_check():
    prob = quadratic_problem(3)
    rec = integrate(IntegratorConfig(0.01, 100.0, 10), prob, GAMMA1, zero_source(3),
                    TrajectoryState(0, prob.ubar, np.zeros(3)), nu=(1.0,))
    norms = NormTriple(prob)
    assert dg.velocity_integral_verdict(rec, 1.0) == (0.0, True)
    assert dg.cauchy_check(rec, norms) == (0.0, True)
    assert dg.anchor_limit_check(rec)[1]
    assert dg.limit_candidate_check(prob, norms, rec.u_final).member


def test_limit_candidate_scalar_example(scalar):
    lc = dg.limit_candidate_check(scalar, NormTriple(scalar), np.array([0.1]))
    assert lc.phi_gap == pytest.approx(0.005) and lc.grad_vprime == pytest.approx(0.1 / math.sqrt(2))
    assert not lc.member


def test_compliant_scenario_bounds_and_decays():
    prob = quadratic_problem(4)
    sched = DampingSchedule("power", 2.0, 0.5)
    src = SourceTerm("power_decay", e1(4), c=0.5, beta=1.75)
    rec = integrate(IntegratorConfig(0.01, 2000.0, 20), prob, sched, src, default_initial(prob), nu=(1.0,))
    assert dg.velocity_integral_verdict(rec, 1.0)[1]
    assert dg.scaled_energy_trend(rec, 1.0).passed
    assert dg.monotonicity_violations(rec.Etilde)[0] == 0


def test_monotonicity_counter():
    assert dg.monotonicity_violations(np.array([3.0, 2.0, 2.5, 1.0, 1.0 + 1e-12])) == (1, 0.5)

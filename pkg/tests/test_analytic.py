import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ghzmag import analytic, lindblad, quantum
from ghzmag.analytic import CoefficientSet
from ghzmag.lindblad import NoiseModel, SystemParams
from ghzmag.quantum import ProbeState, Scheme


def quad(f, t):
    val, _ = integrate.quad(f, 0, t, epsabs=1e-13, epsrel=1e-12, limit=500)
    return val


def test_sinc_series_branch_is_continuous():
    x = np.array([0.0, 9.999e-5, 1.0001e-4, 1e-3])
    expected = [1.0] + [math.sin(v) / v for v in x[1:]]
    np.testing.assert_allclose(analytic.sinc(x), expected, rtol=1e-15)


def test_window_at_zero():
    assert analytic.window(0.0, 1.0, 1.7) == 2.0
    assert analytic.window(1e-9, 1.0, 1.7) == pytest.approx(2.0, abs=1e-15)


def test_window_resonant():
    t = np.linspace(0.1, 30, 50)
    np.testing.assert_allclose(analytic.window(t, 1.0, 1.0), np.sin(2 * t) / (2 * t) + 1, rtol=1e-14)


def test_window_matches_quadrature():
    w, m, t = 1.0, 3.0, 10.0
    ref = quad(lambda s: 2 * math.cos(m * s) * math.cos(w * s), t) / t
    assert abs(analytic.window(t, w, m) - ref) < 1e-10


def test_window_rejects_negative_time():
    with pytest.raises(ValueError):
        analytic.window(-1.0, 1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(t=st.floats(0, 1e4), m=st.floats(0, 10), w=st.floats(0.1, 10))
def test_window_bounded(t, m, w):
    assert abs(analytic.window(t, w, m)) <= 2.0 + 1e-12


def test_window_regimes():
    w, m = 1.0, 1.2
    short = np.linspace(0, 0.1 / (w + m), 50)
    vals = analytic.window(short, w, m)
    assert np.all((vals >= 1.6) & (vals <= 2.0))
    long = np.linspace(20 / abs(w - m), 500 / abs(w - m), 2000)
    assert np.all(np.abs(analytic.window(long, w, m)) <= 1.5 / (abs(w - m) * long))


def test_signal_integrals_at_zero():
    assert analytic.signal_integrals(0.0, 1.0, 1.4, 0.01) == (0.0, 0.0, 0.0)


def test_signal_integrals_elementary():
    t = np.linspace(0, 12, 25)
    s_minus, s_plus, c = analytic.signal_integrals(t, 1.0, 0.0, 0.0)
    np.testing.assert_allclose(s_minus, 1 - np.cos(t), atol=1e-14)
    np.testing.assert_allclose(s_plus, 1 - np.cos(t), atol=1e-14)
    np.testing.assert_allclose(c, np.sin(t), atol=1e-14)


@pytest.mark.parametrize("gamma", [0.0, 1e-9, 0.01, 0.5])
def test_signal_integrals_match_quadrature(gamma):
    w, m, t = 1.0, 1.4, 7.0
    s_minus, s_plus, c = analytic.signal_integrals(t, w, m, gamma)
    ref_minus = quad(lambda s: math.cos(m * s) * math.sin(w * s) * math.exp(-gamma * s), t)
    ref_plus = quad(lambda s: math.cos(m * s) * math.sin(w * s) * math.exp(gamma * s), t)
    ref_c = quad(lambda s: math.cos(m * s) * math.cos(w * s), t)
    assert abs(s_minus - ref_minus) < 1e-10
    assert abs(s_plus - ref_plus) < 1e-10
    assert abs(c - ref_c) < 1e-10


def test_signal_integrals_reject_bad_input():
    with pytest.raises(ValueError):
        analytic.signal_integrals(1.0, 1.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        analytic.signal_integrals(-1.0, 1.0, 1.0, 0.1)


def test_coefficients_without_signal():
    g, t = 0.03, 4.0
    p = SystemParams(1.0, 1.5, 0.0, 1, NoiseModel.parallel(g))
    init = CoefficientSet(0.6, 0.4, 0.1 + 0.2j, 0.1 - 0.2j)
    out = analytic.evolve_coefficients(init, t, p)
    assert out.c_pp == init.c_pp and out.c_mm == init.c_mm
    assert out.c_pm == pytest.approx(math.exp(-g * t) * init.c_pm, abs=1e-16)


def test_coefficients_plus_state_transfer():
    g, t, eps = 0.03, 4.0, 1e-3
    p = SystemParams(1.0, 1.5, eps, 1, NoiseModel.parallel(g))
    out = analytic.evolve_coefficients(CoefficientSet(1, 0, 0, 0), t, p)
    integral = quad(lambda s: math.cos(1.5 * s) * math.sin(s) * math.exp(g * s), t)
    expected = 2 * eps * math.exp(-g * t) * integral
    assert out.c_pm == pytest.approx(expected, abs=1e-15)
    assert out.c_mp == pytest.approx(expected, abs=1e-15)
    assert out.c_pp == 1 and out.c_mm == 0


def test_coefficient_matrix_round_trip(rng):
    rho = quantum.random_density_matrix(1, rng)
    np.testing.assert_allclose(CoefficientSet.from_matrix(rho).to_matrix(), rho, atol=1e-15)


def test_coefficients_rejected_for_depolarizing():
    p = SystemParams(1.0, 1.5, 1e-3, 1, NoiseModel.depolarizing(0.01))
    with pytest.raises(ValueError):
        analytic.evolve_coefficients(CoefficientSet(1, 0, 0, 0), 1.0, p)


@pytest.mark.parametrize("t", [0.5, 3.0, 11.0])
def test_assembled_state_reproduces_closed_form(t):
    p = SystemParams(1.0, 1.5, 1e-4, 1, NoiseModel.parallel(0.02))
    rho0 = quantum.initial_state(ProbeState(Scheme.INDIVIDUAL, 1))
    out = analytic.evolve_coefficients(CoefficientSet.from_matrix(rho0), t, p)
    assert analytic.y_probability(out) == pytest.approx(analytic.p_individual_parallel(t, p).value, abs=1e-15)
    pmat = quantum.projection_probability(out.to_matrix(), quantum.projector_y(ProbeState(Scheme.INDIVIDUAL, 1)))
    assert pmat == pytest.approx(analytic.y_probability(out), abs=1e-15)


def test_coefficients_track_simulation():
    eps, t = 1e-4, 9.0
    p = SystemParams(1.0, 0.7, eps, 1, NoiseModel.parallel(0.02))
    rho0 = np.outer(quantum.KET_PLUS, quantum.KET_PLUS).astype(complex)
    ana = analytic.evolve_coefficients(CoefficientSet.from_matrix(rho0), t, p).to_matrix()
    num = lindblad.evolve(rho0, t, p)
    assert np.abs(ana - num).max() < 5 * eps


def test_individual_parallel_examples():
    p0 = SystemParams(1.0, 1.5, 0.0, 1, NoiseModel.parallel(0.01))
    np.testing.assert_array_equal(analytic.p_individual_parallel(np.linspace(0, 50, 11), p0).value, 0.5)
    eps, t = 1e-4, 3.0
    res = SystemParams(1.0, 1.0, eps, 1)
    expected = 0.5 - eps * t * (1 + math.sin(2 * t) / (2 * t))
    assert analytic.p_individual_parallel(t, res).value == pytest.approx(expected, abs=1e-16)


def test_individual_parallel_against_simulation():
    eps = 1e-4
    p = SystemParams(1.0, 1.5, eps, 1, NoiseModel.parallel(0.01))
    [(_, num)] = lindblad.probability_trace(p, ProbeState(Scheme.INDIVIDUAL, 1), [10.0])
    assert abs(num - analytic.p_individual_parallel(10.0, p).value) < 5 * eps**2


def test_ghz_parallel_against_simulation():
    eps, L = 1e-4, 3
    p = SystemParams(1.0, 1.5, eps, L, NoiseModel.parallel(0.01))
    [(_, num)] = lindblad.probability_trace(p, ProbeState(Scheme.GHZ, L), [8.0])
    assert abs(num - analytic.p_ghz_parallel(8.0, p).value) < 5 * (L * eps) ** 2 + 3 * eps


def test_ghz_depolarizing_exact_against_simulation():
    eps, L = 1e-4, 4
    p = SystemParams(1.0, 2.0, eps, L, NoiseModel.depolarizing(0.01))
    [(_, num)] = lindblad.probability_trace(p, ProbeState(Scheme.GHZ, L), [6.0])
    assert abs(num - analytic.p_ghz_depolarizing_exact(6.0, p).value) < 5 * (L * eps) ** 2 + 3 * eps


def test_ghz_depolarizing_exact_mixed_limit():
    for L in (1, 3, 6):
        p = SystemParams(1.0, 1.5, 0.0, L, NoiseModel.depolarizing(0.1))
        assert analytic.p_ghz_depolarizing_exact(1e4, p).value == pytest.approx(0.5**L, abs=1e-15)


def test_depolarizing_single_qubit_reduction():
    p = SystemParams(1.0, 1.5, 1e-5, 1, NoiseModel.depolarizing(0.02))
    t = np.linspace(0, 20, 41)
    exact = analytic.p_ghz_depolarizing_exact(t, p).value
    first = analytic.p_individual_depolarizing(t, p).value
    assert np.abs(exact - first).max() < 1e-9


def test_depolarizing_leading_examples():
    g = 0.01
    p0 = SystemParams(1.0, 1.5, 0.0, 8, NoiseModel.depolarizing(g))
    t = np.linspace(0, 10, 11)
    np.testing.assert_allclose(analytic.p_ghz_depolarizing_leading(t, p0).value, 0.5 * np.exp(-8 * g * t))
    p10 = SystemParams(1.0, 1.5, 1e-4, 10, NoiseModel.depolarizing(g))
    assert analytic.p_ghz_depolarizing_leading(0.0, p10).value == 0.5
    assert analytic.p_ghz_depolarizing_exact(0.0, p10).value == pytest.approx(0.5, abs=1e-16)


def test_depolarizing_leading_agrees_with_exact_at_large_L():
    L, g, eps = 40, 1e-4, 1e-6
    p = SystemParams(1.0, 1.5, eps, L, NoiseModel.depolarizing(g))
    t = np.linspace(0.5, 50, 100)
    x = L * g * t
    w = analytic.window(t, 1.0, 1.5)
    assert np.all(0.5**L < 1e-3 * np.exp(-x)) and np.all(np.abs(2 * L * eps * t * w) < 0.05)
    lead = analytic.p_ghz_depolarizing_leading(t, p).value
    exact = analytic.p_ghz_depolarizing_exact(t, p).value
    assert np.max(np.abs(lead / exact - 1)) < 0.01


def test_ghz_equals_individual_at_L1():
    p = SystemParams(1.0, 1.3, 1e-4, 1, NoiseModel.parallel(0.02))
    t = np.linspace(0, 30, 100)
    np.testing.assert_array_equal(analytic.p_ghz_parallel(t, p).value,
                                  analytic.p_individual_parallel(t, p).value)


def test_depolarizing_exact_at_L1_is_first_order_individual():
    # sin(2x)/2 = x + O(x^3), so the gap is third order in eps t W
    eps = 1e-4
    p = SystemParams(1.0, 1.3, eps, 1, NoiseModel.depolarizing(0.02))
    t = np.linspace(0, 30, 100)
    gap = analytic.p_ghz_depolarizing_exact(t, p).value - analytic.p_individual_depolarizing(t, p).value
    assert np.abs(gap).max() < (eps * 30 * 2) ** 3


@pytest.mark.parametrize("name", sorted(analytic.FORMULAS))
def test_derivative_matches_finite_difference(name):
    kind = "depolarizing" if "depolarizing" in name else "parallel"
    eps, h = 1e-4, 1e-7
    t = np.linspace(0.3, 25, 40)
    mk = lambda e: SystemParams(1.0, 1.3, e, 5, NoiseModel(kind, 0.01))
    f = analytic.FORMULAS[name]
    fd = (f(t, mk(eps + h)).value - f(t, mk(eps - h)).value) / (2 * h)
    an = analytic.dp_depsilon(t, mk(eps), name)
    np.testing.assert_allclose(fd, an, rtol=1e-8, atol=1e-8 * np.abs(an).max())


def test_derivative_unknown_formula():
    with pytest.raises(ValueError):
        analytic.dp_depsilon(1.0, SystemParams(), "ghz_dephasing")


def test_validity_flag():
    p = SystemParams(1.0, 1.5, 1e-3, 10, NoiseModel.parallel(0.0))
    assert analytic.p_ghz_parallel(5.0, p).validity == "ok"
    assert analytic.p_ghz_parallel(20.0, p).validity == "leading-order-suspect"
    # values are reported, not clamped
    big = SystemParams(1.0, 1.0, 0.1, 10, NoiseModel.parallel(0.0))
    assert analytic.p_ghz_parallel(5.0, big).value < 0


def test_noise_kind_mismatch():
    with pytest.raises(ValueError):
        analytic.p_ghz_parallel(1.0, SystemParams(noise=NoiseModel.depolarizing(0.1)))
    with pytest.raises(ValueError):
        analytic.p_ghz_depolarizing_exact(1.0, SystemParams(noise=NoiseModel.parallel(0.1)))


def test_model_probability_dispatch():
    p = SystemParams(1.0, 1.5, 1e-4, 3, NoiseModel.depolarizing(0.01))
    t = np.linspace(0, 5, 6)
    np.testing.assert_allclose(analytic.model_probability(t, p, "ghz").value,
                               analytic.p_ghz_depolarizing_exact(t, p).value)
    single = SystemParams(1.0, 1.5, 1e-4, 1, NoiseModel.depolarizing(0.01))
    np.testing.assert_allclose(analytic.model_probability(t, p, "individual").value,
                               analytic.p_ghz_depolarizing_exact(t, single).value)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_sim import (FIG1_PARAMS, BathOscillator, ModelParams, ParameterError,
                          UnsupportedRegimeError, bath_coeffs, build_ohmic_bath,
                          sigma_xi_sq_asymptotic, sigma_xi_sq_sum, weak_damping_width)
from collapse_sim.bath import bath_coeff_arrays, sigma_xi_sq_series, thermal_factor
from collapse_sim.verify import (asymptote_quadrature, bath_coefficient_errors,
                                 brownian_width_quadrature)

CUT = 50 * FIG1_PARAMS.omega0


@pytest.fixture(scope="module")
def bath4096():
    return build_ohmic_bath(FIG1_PARAMS, 4096, CUT)


def test_couplings_cancel_to_frequency():
    p = ModelParams(omega0=1.0, eta=math.pi / 2)
    with pytest.warns(UserWarning):
        bath = build_ohmic_bath(p, 4, 4.0)
    assert np.allclose(bath.omegas, [0.5, 1.5, 2.5, 3.5], rtol=0, atol=1e-15)
    assert np.allclose(bath.couplings, bath.omegas, rtol=1e-15)
    assert bath.delta_omega == 1.0


@given(st.integers(2, 5000), st.floats(0.1, 5), st.floats(0.1, 5))
def test_ohmic_constraint_reinverts_to_n(n, eta, M):
    p = ModelParams(M=M, omega0=1.0, eta=eta)
    bath = build_ohmic_bath(p, n, 20.0)
    dw = bath.delta_omega
    inv = math.pi * bath.couplings**2 / (2 * eta * M * bath.masses * bath.omegas**2 * dw)
    assert math.fsum(inv) == pytest.approx(n, rel=1e-12)


def test_bath_validation():
    with pytest.raises(ParameterError):
        build_ohmic_bath(FIG1_PARAMS, 1, CUT)
    with pytest.raises(ParameterError):
        build_ohmic_bath(FIG1_PARAMS, 10, -1.0)
    with pytest.raises(ParameterError):
        BathOscillator(0.0, 1.0, 1.0)


def test_oscillator_view(bath4096):
    oscs = bath4096.oscillators
    assert len(oscs) == len(bath4096) == 4096
    assert oscs[7].omega == bath4096.omegas[7]


@given(st.floats(0.05, 100), st.floats(0, 10))
def test_bath_coeffs_vanish_at_zero(wj, c):
    b1, b2 = bath_coeffs(FIG1_PARAMS, BathOscillator(1.0, wj, c), 0.0)
    assert abs(b1) < 1e-15 * max(c, 1) and abs(b2) < 1e-15 * max(c, 1)


def test_bath_coeff_derivatives_vanish_at_zero():
    h = 1e-7
    b1, b2 = bath_coeff_arrays(FIG1_PARAMS, [1.0, 7.0], [1.0, 1.0], h)
    # zero value and zero slope at t=0 leave a quadratic start
    assert np.all(np.abs(b1) < 1e-12) and np.all(np.abs(b2) < 1e-12)


def test_resonant_long_time_limit():
    p = FIG1_PARAMS
    c = 0.7
    b1, b2 = bath_coeffs(p, BathOscillator(1.0, p.omega0, c), 30.0)
    limit = c**2 / p.M**2 / (p.eta**2 * p.omega0**2)
    assert b1**2 + p.omega0**2 * b2**2 == pytest.approx(limit, rel=1e-12)


def test_bath_coeffs_match_ode():
    errs = bath_coefficient_errors(ModelParams.from_displacement(3, omega0=2 * math.pi, eta=2),
                                   1.0, 1.0, np.linspace(0, 3, 61))
    assert max(errs.values()) < 1e-8


def test_undamped_resonance_rejected():
    p = ModelParams(omega0=1.0)
    with pytest.raises(ParameterError):
        bath_coeffs(p, BathOscillator(1.0, 1.0, 1.0), 1.0)
    assert bath_coeffs(p, BathOscillator(1.0, 1.0, 0.0), 1.0) == (0.0, 0.0)


def test_width_zero_at_t0(bath4096):
    for T in (0.0, 1.0, 10.0):
        assert sigma_xi_sq_sum(FIG1_PARAMS, bath4096, 0.0, T).sigma_xi_sq == 0.0


def test_low_temperature_limit(bath4096):
    cold = sigma_xi_sq_sum(FIG1_PARAMS, bath4096, 5.0, 0.0)
    tiny = sigma_xi_sq_sum(FIG1_PARAMS, bath4096, 5.0, 1e-4)
    assert cold.method == "sum" and tiny.method == "thermal-sum"
    assert tiny.sigma_xi_sq == pytest.approx(cold.sigma_xi_sq, rel=1e-10)


def test_thermal_factor():
    assert np.all(thermal_factor(FIG1_PARAMS, [1.0, 2.0], 0.0) == 1.0)
    assert thermal_factor(FIG1_PARAMS, [2.0], 1.0)[0] == pytest.approx(1 / math.tanh(1.0))
    with pytest.raises(ParameterError):
        thermal_factor(FIG1_PARAMS, [1.0], -1.0)


@given(st.floats(0.1, 20), st.floats(0, 3), st.floats(0, 3))
def test_monotone_in_temperature(t, T1, dT):
    bath = build_ohmic_bath(FIG1_PARAMS, 512, CUT)
    lo = sigma_xi_sq_sum(FIG1_PARAMS, bath, t, T1).sigma_xi_sq
    hi = sigma_xi_sq_sum(FIG1_PARAMS, bath, t, T1 + dT).sigma_xi_sq
    assert lo <= hi


def test_sum_within_two_percent_of_asymptote(bath4096):
    s = sigma_xi_sq_sum(FIG1_PARAMS, bath4096, 20.0).sigma_xi_sq
    a = sigma_xi_sq_asymptotic(FIG1_PARAMS).sigma_xi_sq
    assert abs(s / a - 1) < 0.02


def test_sum_matches_quadrature(bath4096):
    t = 20 / FIG1_PARAMS.eta
    s = sigma_xi_sq_sum(FIG1_PARAMS, bath4096, t).sigma_xi_sq
    q = brownian_width_quadrature(FIG1_PARAMS, t, CUT)
    assert abs(s / q - 1) < 0.02
    # the frozen agreement is much tighter than the contract
    assert abs(s / q - 1) < 1e-4


def test_series_matches_pointwise(bath4096):
    times = [0.0, 1.0, 2.5]
    series = sigma_xi_sq_series(FIG1_PARAMS, bath4096, times)
    for t, v in zip(times, series):
        assert v == sigma_xi_sq_sum(FIG1_PARAMS, bath4096, t).sigma_xi_sq


def test_sum_order_independent(bath4096):
    perm = np.random.default_rng(3).permutation(len(bath4096))
    from collapse_sim import BathDiscretization
    shuffled = BathDiscretization(bath4096.masses[perm], bath4096.omegas[perm],
                                  bath4096.couplings[perm], bath4096.omega_cutoff)
    assert (sigma_xi_sq_sum(FIG1_PARAMS, shuffled, 3.0).sigma_xi_sq
            == sigma_xi_sq_sum(FIG1_PARAMS, bath4096, 3.0).sigma_xi_sq)


def test_cauchy_differences_decrease():
    t = 20 / FIG1_PARAMS.eta
    sums = [sigma_xi_sq_sum(FIG1_PARAMS, build_ohmic_bath(FIG1_PARAMS, n, CUT), t).sigma_xi_sq
            for n in (512, 1024, 2048, 4096, 8192)]
    diffs = [abs(a - b) / b for a, b in zip(sums, sums[1:])]
    assert all(x > y for x, y in zip(diffs, diffs[1:]))


def test_error_vs_cutoff_matched_limit_decreases():
    t = 20 / FIG1_PARAMS.eta
    target = sigma_xi_sq_asymptotic(FIG1_PARAMS, omega_cutoff=CUT).sigma_xi_sq
    errs = [abs(sigma_xi_sq_sum(FIG1_PARAMS, build_ohmic_bath(FIG1_PARAMS, n, CUT), t).sigma_xi_sq
                / target - 1) for n in (512, 1024, 2048, 4096, 8192)]
    assert all(x > y for x, y in zip(errs, errs[1:]))


def test_cutoff_saturation():
    vals = {f: sigma_xi_sq_asymptotic(FIG1_PARAMS, omega_cutoff=f * FIG1_PARAMS.omega0).sigma_xi_sq
            for f in (10, 25, 50, 100)}
    assert vals[10] < vals[25] < vals[50] < vals[100] < sigma_xi_sq_asymptotic(FIG1_PARAMS).sigma_xi_sq
    assert abs(vals[50] / vals[100] - 1) < 0.01


def test_asymptote_fig1_value():
    w = math.sqrt(4 * math.pi**2 - 1)
    expected = (math.pi / 2 + math.atan((w * w - 1) / (2 * w))) / (2 * math.pi * w)
    got = sigma_xi_sq_asymptotic(FIG1_PARAMS).sigma_xi_sq
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(asymptote_quadrature(FIG1_PARAMS), rel=1e-10)


def test_asymptote_eta_equals_omega():
    # eta = omega requires omega0**2 = 5 omega**2 / 4
    w = 1.3
    p = ModelParams(omega0=math.sqrt(1.25) * w, eta=w)
    expected = (math.pi / 2 + math.atan(0.75)) / (2 * math.pi * w)
    assert sigma_xi_sq_asymptotic(p).sigma_xi_sq == pytest.approx(expected, rel=1e-13)


@given(st.floats(1e-6, 0.02))
def test_weak_damping_limit(ratio):
    p = ModelParams(omega0=1.0, eta=ratio)
    assert sigma_xi_sq_asymptotic(p).sigma_xi_sq == pytest.approx(weak_damping_width(p), rel=0.01)
    assert weak_damping_width(ModelParams(omega0=1.0, eta=1e-9)) == pytest.approx(0.5)


def test_asymptote_regime_errors():
    with pytest.raises(UnsupportedRegimeError):
        sigma_xi_sq_asymptotic(ModelParams(omega0=1.0, eta=3.0))
    with pytest.raises(UnsupportedRegimeError):
        sigma_xi_sq_asymptotic(ModelParams(omega0=1.0, eta=0.0))

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_sim import (FIG1_PARAMS, ModelParams, ParameterError, Regime, coeffs, displacement,
                          wronskian)
from collapse_sim.verify import Forcing, ode_oracle

TWO_PI = 2 * math.pi

params_strategy = st.builds(
    lambda M, w0, ratio: ModelParams(M=M, omega0=w0, eta=ratio * w0),
    st.floats(0.1, 10), st.floats(0.1, 20), st.floats(0, 2.5),
)


def test_initial_conditions():
    for p in (FIG1_PARAMS, ModelParams(omega0=1, eta=2), ModelParams(omega0=1, eta=5)):
        c = coeffs(p, 0.0)
        assert (c.a1, c.a2, c.a1dot, c.a2dot) == (1.0, 0.0, 0.0, 1.0)


def test_undamped_quarter_period():
    c = coeffs(ModelParams(omega0=1.0), math.pi / 2)
    assert c.a1 == pytest.approx(0.0, abs=1e-15)
    assert c.a2 == pytest.approx(1.0, rel=1e-15)


def test_fig1_coefficients_match_ode():
    t = np.array([0.0, 1.0])
    one = ode_oracle(FIG1_PARAMS, Forcing(), t, (1.0, 0.0))
    two = ode_oracle(FIG1_PARAMS, Forcing(), t, (0.0, 1.0))
    c = coeffs(FIG1_PARAMS, 1.0)
    assert abs(c.a1 - one.q[-1]) < 1e-8
    assert abs(c.a2 - two.q[-1]) < 1e-8


def test_scalar_and_array_inputs():
    c = coeffs(FIG1_PARAMS, 0.5)
    assert isinstance(c.a1, float)
    arr = coeffs(FIG1_PARAMS, np.array([0.5, 1.0]))
    assert arr.a1.shape == (2,)
    assert arr.a1[0] == c.a1


@pytest.mark.parametrize("t", [-1.0, math.nan, math.inf])
def test_bad_times_rejected(t):
    with pytest.raises(ParameterError):
        coeffs(FIG1_PARAMS, t)


def test_wronskian_examples():
    assert wronskian(FIG1_PARAMS, 0.0) == 1.0
    assert wronskian(FIG1_PARAMS, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-13)
    assert wronskian(FIG1_PARAMS, 1.0) == pytest.approx(0.135335, abs=1e-6)
    assert np.allclose(wronskian(ModelParams(omega0=3.0), np.linspace(0, 50, 101)), 1.0,
                       rtol=1e-13, atol=0)


def test_displacement_examples():
    assert displacement(ModelParams(omega0=TWO_PI, B=3 * TWO_PI**2)) == pytest.approx(3.0, rel=1e-15)
    assert displacement(ModelParams(omega0=TWO_PI)) == 0.0
    assert displacement(ModelParams(omega0=1.7, B=1.7**2)) == pytest.approx(1.0, rel=1e-15)
    assert FIG1_PARAMS.d == pytest.approx(3.0, rel=1e-15)


def test_regimes():
    assert ModelParams(omega0=1, eta=1).regime is Regime.UNDERDAMPED
    assert ModelParams(omega0=1, eta=2).regime is Regime.CRITICAL
    assert ModelParams(omega0=1, eta=2 * (1 + 1e-10)).regime is Regime.CRITICAL
    assert ModelParams(omega0=1, eta=3).regime is Regime.OVERDAMPED


@pytest.mark.parametrize("field,value", [("M", 0), ("M", -1), ("omega0", 0), ("eta", -0.1),
                                         ("hbar", 0), ("B", math.nan)])
def test_invalid_params(field, value):
    with pytest.raises(ParameterError):
        ModelParams(**{field: value})


@given(params_strategy)
def test_wronskian_log_grid(p):
    t = np.geomspace(1e-6, 20 / max(p.eta, p.omega0), 1000)
    rel = np.abs(wronskian(p, t) * np.exp(p.eta * t) - 1)
    assert rel.max() < 1e-10


@given(params_strategy)
def test_a1dot_identity(p):
    t = np.linspace(0, 10 / p.omega0, 50)
    c = coeffs(p, t)
    # a1dot is the derivative; compare with a centered difference of a1
    h = 1e-6 / p.omega0
    fd = (coeffs(p, t + h).a1 - coeffs(p, np.maximum(t - h, 0)).a1) / (t + h - np.maximum(t - h, 0))
    assert np.allclose(c.a1dot, -p.omega0**2 * c.a2, rtol=1e-12, atol=1e-300)
    assert np.allclose(fd, c.a1dot, rtol=1e-5, atol=1e-6 * p.omega0)


def _rel_change(w0, eps, t):
    crit = coeffs(ModelParams(omega0=w0, eta=2 * w0), t)
    near = coeffs(ModelParams(omega0=w0, eta=2 * w0 * (1 + eps)), t)
    out = []
    for x, y in ((crit.a1, near.a1), (crit.a2, near.a2), (crit.a2dot, near.a2dot)):
        scale = np.maximum(np.abs(x), np.exp(-w0 * t) / w0)
        out.append((y - x) / scale)
    return np.array(out)


@given(st.floats(0.2, 10), st.sampled_from([1e-6, -1e-6]))
def test_continuity_across_critical(w0, eps):
    # the genuine eta-sensitivity grows like t**2, so compare over a few decay times
    t = np.linspace(0, 5 / w0, 200)
    assert np.max(np.abs(_rel_change(w0, eps, t))) < 1e-5


@given(st.floats(0.2, 10), st.sampled_from([1e-6, 1e-8, 5.1e-9]))
def test_no_jump_at_branch_switch(w0, eps):
    # a branch jump would break the first-order antisymmetry of the +/- offsets
    t = np.linspace(0, 10 / w0, 200)
    up, down = _rel_change(w0, eps, t), _rel_change(w0, -eps, t)
    assert np.max(np.abs(up + down)) < 1e-4 * np.max(np.abs(up)) + 1e-12


@given(st.floats(0.1, 10), st.floats(0.0, 1.99))
def test_underdamped_envelope(w0, ratio):
    p = ModelParams(omega0=w0, eta=ratio * w0)
    t = np.linspace(0, 40 / w0, 500)
    bound = np.exp(-p.eta * t / 2) * (1 + p.eta / (2 * p.omega))
    assert np.all(np.abs(coeffs(p, t).a1) <= bound * (1 + 1e-12))


@given(st.floats(2.6, 10), st.floats(0.1, 5))
def test_deep_overdamping_wronskian(ratio, w0):
    # cancellation in a1*a2dot - a1dot*a2 grows like exp(2kt); the bound scales with it
    p = ModelParams(omega0=w0, eta=ratio * w0)
    k = math.sqrt(-p.omega_sq)
    t = np.geomspace(1e-6, 20 / p.eta, 300)
    cond = np.exp(2 * k * t) * (1 + p.eta / k) ** 2
    rel = np.abs(wronskian(p, t) * np.exp(p.eta * t) - 1)
    assert np.all(rel < 1e-14 * cond + 1e-13)


@given(params_strategy)
def test_overdamped_and_underdamped_match_ode(p):
    t = np.linspace(0, 5 / p.omega0, 20)
    one = ode_oracle(p, Forcing(), t, (1.0, 0.0), rtol=1e-11, max_error=1e-7)
    assert np.max(np.abs(coeffs(p, t).a1 - one.q)) < 1e-8

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssw.model import ModelParams, NonPhysicalStateError, source_terms
from ssw.source import (
    ImplicitUpdateInput,
    implicit_source_update,
    solve_momentum,
    solve_trace,
    trace_residual,
)
from states import random_source_inputs, relative_residual


def test_implicit_update_residual():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        inp = random_source_inputs(rng, 1000)
        worst = max(worst, relative_residual(inp, implicit_source_update(inp)))
    assert worst < 1e-11


def test_implicit_update_recovers_constructed_state():
    # build U first, then U_tilde = U - theta dt S(U); the solve must return U
    rng = np.random.default_rng(12)
    inp = random_source_inputs(rng, 2000)
    u = inp.u_tilde
    s = source_terms(u, inp.dbdx, inp.dbdy, inp.params)
    inp2 = ImplicitUpdateInput(u - inp.theta_dt * s, inp.dbdx, inp.dbdy, inp.theta_dt, inp.params)
    back = implicit_source_update(inp2)
    assert np.allclose(back, u, rtol=1e-10, atol=1e-15)


def test_zero_step_is_identity():
    inp = random_source_inputs(np.random.default_rng(0), 10)
    inp.theta_dt = 0.0
    assert np.array_equal(implicit_source_update(inp), inp.u_tilde)


def test_depth_is_untouched():
    inp = random_source_inputs(np.random.default_rng(5), 100)
    assert np.array_equal(implicit_source_update(inp)[0], inp.u_tilde[0])


def test_solve_momentum_residual():
    rng = np.random.default_rng(2)
    a1, a2 = rng.normal(size=(2, 10000)) * 10 ** rng.uniform(-4, 1, (2, 10000))
    c = 10 ** rng.uniform(-6, 4, 10000)
    m1, m2 = solve_momentum(a1, a2, c)
    m = np.hypot(m1, m2)
    a = np.hypot(a1, a2)
    assert np.max(np.abs(m * (1 + c * m) - a) / a) < 1e-13
    # direction is kept
    assert np.allclose(m1 * a2, m2 * a1, rtol=1e-12, atol=1e-300)


def test_solve_momentum_without_friction():
    m1, m2 = solve_momentum(np.array([3.0]), np.array([-4.0]), np.array([0.0]))
    assert m1[0] == 3.0 and m2[0] == -4.0
    with pytest.raises(ValueError):
        solve_momentum(1.0, 1.0, -1.0)


def test_solve_trace_root_and_bracket():
    rng = np.random.default_rng(3)
    n = 10000
    h = rng.uniform(0.002, 0.02, n)
    params = ModelParams(cr=0.01, phi=50.0)
    s_sum = 0.5 * h * params.phi * h * h * 10 ** rng.uniform(-1, 2, n)
    speed3 = rng.uniform(0, 2, n) ** 3
    tdt = 0.01
    t = solve_trace(s_sum, h, speed3, tdt, params)
    f = trace_residual(t, s_sum, h, speed3, tdt, params)
    # above the threshold f = h T/2 + k - k phi h^2 / T - S with k = Cr |v|^3 theta dt;
    # the residual is measured against the largest of these terms
    k = params.cr * speed3 * tdt
    terms = np.maximum.reduce([0.5 * h * t, k, k * params.phi * h * h / t, s_sum])
    assert np.max(np.abs(f) / terms) < 1e-13
    lo = trace_residual(t * (1 - 1e-8), s_sum, h, speed3, tdt, params)
    hi = trace_residual(t * (1 + 1e-8), s_sum, h, speed3, tdt, params)
    assert np.all(lo < 0) and np.all(hi > 0)


def test_solve_trace_below_threshold_is_explicit():
    # T_hat = 2 S / h below phi h^2: no dissipation acts
    p = ModelParams(cr=0.1, phi=10.0)
    assert solve_trace(0.5 * 1.0 * 4.0, 1.0, 1.0, 0.1, p) == pytest.approx(4.0)


def test_solve_trace_hand_value():
    # h=1, phi=1, Cr=1, |v|=1, theta dt=1, S=2: T^2/2 - T - 1 = 0 -> T = 1 + sqrt(3)
    p = ModelParams(cr=1.0, phi=1.0)
    assert solve_trace(2.0, 1.0, 1.0, 1.0, p) == pytest.approx(1 + np.sqrt(3), rel=1e-15)


def test_solve_trace_rejects_non_positive():
    with pytest.raises(NonPhysicalStateError):
        solve_trace(np.array([1.0, -1.0]), np.array([1.0, 1.0]), 0.0, 0.1, ModelParams())


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_property_update_residual(seed):
    inp = random_source_inputs(np.random.default_rng(seed), 50)
    assert relative_residual(inp, implicit_source_update(inp)) < 1e-11


def test_documented_examples():
    m1, m2 = solve_momentum(np.array([2.0]), np.array([0.0]), np.array([1.0]))
    assert m1[0] == pytest.approx(1.0, rel=1e-15) and m2[0] == 0.0
    assert solve_trace(1.0, 1.0, 1.0, 1.0, ModelParams(cr=1.0, phi=10.0)) == pytest.approx(2.0)
    # h=2, k=1, phi h^2=1, S=3: T^2 - 2T - 1 = 0
    assert solve_trace(3.0, 2.0, 1.0, 1.0, ModelParams(cr=1.0, phi=0.25)) == pytest.approx(1 + np.sqrt(2), rel=1e-15)

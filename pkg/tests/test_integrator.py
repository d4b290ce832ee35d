import numpy as np
import pytest

from ssw.grid import BoundarySpec, Grid, apply_bc, init_case
from ssw.integrator import (
    PositivityError,
    StepControls,
    advance,
    compute_dt,
    default_theta,
    face_states,
    minmod,
    minmod_slope,
    predictor,
    step,
)
from ssw.model import ModelParams, noncons_vector, prim_slope_to_cons, physical_flux, prim_to_cons
from ssw.riemann import hll


def uniform_grid(nx=8, ny=1, ndim=1, q=(0.01, 0.3, -0.1, 1e-6, 2e-7, 2e-6)):
    grid = Grid(nx=nx, ny=ny, dx=0.1, dy=0.2, ndim=ndim)
    shape = grid.shape
    grid.u[:] = prim_to_cons(np.array(q)).reshape((6,) + (1,) * len(shape))
    return grid


def test_compute_dt_examples():
    grid = Grid(nx=1, ny=1, dx=0.1, dy=1.0)
    grid.u[:] = prim_to_cons(np.array([1.0, 0.0, 0.0, 0.01, 0.0, 0.01]))[:, None]
    params = ModelParams(g=0.25 - 0.03)
    assert compute_dt(grid, StepControls(cfl=0.5), params) == pytest.approx(0.1)
    grid.dx = 0.2
    assert compute_dt(grid, StepControls(cfl=0.5), params) == pytest.approx(0.2)
    g2 = Grid(nx=1, ny=1, dx=0.1, dy=0.1, ndim=2)
    g2.u[:] = prim_to_cons(np.array([1.0, 0.0, 0.0, 0.01, 0.0, 0.01]))[:, None, None]
    assert compute_dt(g2, StepControls(cfl=0.5), params) == pytest.approx(0.05)


def test_minmod_examples():
    assert minmod_slope(np.array(-1.0), np.array(0.0), np.array(1.0)) == 1.0
    assert minmod(np.array(1.0), np.array(2.0), np.array(3.0)) == 1.0
    assert minmod(np.array(-1.0), np.array(2.0), np.array(3.0)) == 0.0
    assert minmod(np.array(-3.0), np.array(-2.0), np.array(-1.0)) == -1.0
    q = np.linspace(0, 1, 6)
    assert minmod_slope(q[:-2], q[1:-1], q[2:], beta=2.0) == pytest.approx(np.full(4, 0.2))


def test_controls_validation():
    for bad in (dict(order=3), dict(solver="roe"), dict(cfl=0), dict(cfl=1.5), dict(beta=0.5),
                dict(theta=2), dict(limiter="vanleer"), dict(faces="both")):
        with pytest.raises(ValueError):
            StepControls(**bad)


def test_default_theta():
    assert default_theta(2, False) == 0.0
    assert default_theta(2, True) == 0.5
    assert default_theta(1, True) == 1.0


@pytest.mark.parametrize("ndim", [1, 2])
def test_uniform_state_is_fixed_point(ndim):
    grid = uniform_grid(ndim=ndim, ny=4 if ndim == 2 else 1)
    bc = BoundarySpec.uniform("periodic")
    params = ModelParams()
    u0 = grid.interior_state().copy()
    for solver in ("hll", "hllc3", "hllc5"):
        controls = StepControls(solver=solver)
        apply_bc(grid, bc)
        u_half, _, _ = predictor(grid, controls, params, 1e-3)
        assert np.array_equal(u_half, grid.u)
        advance(grid, bc, controls, params, None, dt=1e-3, nsteps=100)
        assert np.array_equal(grid.interior_state(), u0)


def test_roll_wave_base_predictor_identity():
    setup = init_case("rollwave1d_case1", 50, overrides={"a": 0.0})
    apply_bc(setup.grid, setup.bc)
    for theta in (0.0, 0.5, 1.0):
        controls = StepControls(theta=theta)
        dt = compute_dt(setup.grid, controls, setup.params)
        u_half, _, _ = predictor(setup.grid, controls, setup.params, dt)
        scale = np.abs(setup.grid.u).max(axis=1, keepdims=True)
        scale = np.where(scale > 0, scale, 1.0)
        assert np.max(np.abs(u_half - setup.grid.u) / scale) < 1e-12


def test_predictor_conserved_faces_by_hand():
    # one smooth cell: U^{n+1/2} = U - dt/2 [(F(U + dU/2) - F(U - dU/2)) + B(U) dh] / dx
    setup = init_case("dambreak1d", 10)
    grid = setup.grid
    x = grid.x
    q = np.stack([0.01 + 0.001 * x, 0.1 * x, 0.05 - 0.02 * x, 1e-6 + 1e-7 * x, 1e-8 * x, 1e-6 + 0 * x])
    grid.u = prim_to_cons(q)
    controls = StepControls(faces="conserved", theta=0.0)
    dt = 1e-3
    u_half, du, dq = predictor(grid, controls, setup.params, dt)
    j = 5
    d = (q[:, j + 1] - q[:, j - 1]) / 2  # linear data: all three minmod arguments agree
    assert np.allclose(dq[0][:, j], d, rtol=1e-12, atol=1e-20)
    u = grid.u[:, j]
    dU = du[0][:, j]
    g = setup.params.g
    rate = -(physical_flux(u + dU / 2, g) - physical_flux(u - dU / 2, g)) / grid.dx
    rate -= noncons_vector(u[1], u[2], g) * d[0] / grid.dx
    assert np.allclose(u_half[:, j], u + 0.5 * dt * rate, rtol=1e-13, atol=1e-22)


def test_face_reconstructions_agree_to_second_order():
    # the two face states differ by the quadratic term of U(Q): halving the slope quarters the gap
    q = np.array([0.01, 0.2, -0.1, 1e-6, 1e-7, 2e-6])[:, None] * np.ones((6, 5))
    u = prim_to_cons(q)
    shape = q * np.random.default_rng(0).uniform(-1, 1, q.shape) + np.array([0, 0.1, 0.1, 0, 0, 0])[:, None]
    diffs = []
    for eps in (1e-2, 5e-3):
        dq = eps * shape
        du = prim_slope_to_cons(q, dq)
        a = face_states(u, q, dq, du, "conserved")[0]
        b = face_states(u, q, dq, du, "primitive")[0]
        diffs.append(np.abs(a - b).max())
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.05)


def test_first_order_single_face_by_hand():
    grid = Grid(nx=2, ny=1, dx=0.05, dy=1.0)
    qL = np.array([0.02, 0.0, 0.0, 2e-6, 0.0, 2e-6])
    qR = np.array([0.01, 0.0, 0.0, 1e-6, 0.0, 1e-6])
    grid.u[:, :3] = prim_to_cons(qL)[:, None]
    grid.u[:, 3:] = prim_to_cons(qR)[:, None]
    bc = BoundarySpec()
    apply_bc(grid, bc)
    params = ModelParams()
    dt = 1e-3
    new = step(grid, StepControls(order=1, solver="hll"), params, dt)
    d_minus, d_plus = hll(prim_to_cons(qL), prim_to_cons(qR), params.g)
    assert np.allclose(new[:, 0], prim_to_cons(qL) - dt / grid.dx * d_minus, rtol=1e-14, atol=1e-20)
    assert np.allclose(new[:, 1], prim_to_cons(qR) - dt / grid.dx * d_plus, rtol=1e-14, atol=1e-20)


@pytest.mark.parametrize("solver", ["hll", "hllc3", "hllc5"])
def test_second_order_without_slopes_is_first_order(solver):
    setup = init_case("moddambreak1d", 40)
    apply_bc(setup.grid, setup.bc)
    dt = 0.5 * compute_dt(setup.grid, StepControls(), setup.params)
    a = step(setup.grid, StepControls(order=1, solver=solver), setup.params, dt)
    b = step(setup.grid, StepControls(order=2, solver=solver, limiter="none"), setup.params, dt)
    assert np.array_equal(a, b)


def test_advance_zero_time_is_identity():
    setup = init_case("dambreak1d", 20)
    u0 = setup.grid.u.copy()
    res = advance(setup.grid, setup.bc, StepControls(), setup.params, 0.0)
    assert res.steps == 0 and np.array_equal(setup.grid.u[:, 2:-2], u0[:, 2:-2])


def test_advance_lands_on_t_end_and_logs():
    setup = init_case("dambreak1d", 50)
    res = advance(setup.grid, setup.bc, StepControls(), setup.params, 0.05)
    assert setup.grid.time == 0.05
    assert res.log[-1].time == 0.05
    assert all(r.min_h > 0 and r.min_p11 > 0 and r.min_p22 > 0 for r in res.log)
    assert sum(r.dt for r in res.log) == pytest.approx(0.05, rel=1e-14)


def test_split_run_is_bitwise_identical():
    setup = init_case("moddambreak1d", 60)
    full = setup.grid.copy()
    controls = StepControls(solver="hllc5")
    advance(full, setup.bc, controls, setup.params, None, dt=2e-4, nsteps=40)
    half = setup.grid.copy()
    advance(half, setup.bc, controls, setup.params, None, dt=2e-4, nsteps=20)
    advance(half, setup.bc, controls, setup.params, None, dt=2e-4, nsteps=20)
    assert np.array_equal(full.u, half.u) and full.time == half.time


def test_positivity_violation_aborts():
    setup = init_case("dambreak1d", 20)
    with pytest.raises(PositivityError) as info:
        # a step far above the CFL limit empties cells
        advance(setup.grid, setup.bc, StepControls(order=1), setup.params, None, dt=1.0, nsteps=1)
    assert info.value.step == 1 and "step 1" in str(info.value)


def test_two_dimensional_conservation():
    setup = init_case("rollwave2d", 16, 8, overrides={"Cf": 0.0036})
    grid = setup.grid
    grid.dbdx[:] = 0.0
    params = ModelParams(g=9.81)
    before = grid.interior_state()[:3].sum(axis=(1, 2))
    advance(grid, setup.bc, StepControls(solver="hllc5"), params, None, dt=1e-3, nsteps=30)
    after = grid.interior_state()[:3].sum(axis=(1, 2))
    assert np.all(np.abs(after - before) <= 1e-12 * np.abs(grid.interior_state()[:3]).sum(axis=(1, 2)))


def test_two_dimensional_step_is_symmetric_under_axis_swap():
    # a y-only problem on a 2-D grid evolves like the transposed x-only problem
    gx = Grid(nx=20, ny=4, dx=0.05, dy=0.05, ndim=2)
    gy = Grid(nx=4, ny=20, dx=0.05, dy=0.05, ndim=2)
    x = gx.x
    q = np.stack([0.01 + 0.005 * (x > 0.5), 0 * x, 0.1 + 0 * x, 1e-6 + 0 * x, 2e-7 + 0 * x, 3e-6 + 0 * x])
    gx.u[:] = prim_to_cons(q)[:, :, None]
    qy = q[[0, 2, 1, 5, 4, 3]]
    gy.u[:] = prim_to_cons(qy)[:, None, :]
    bc = BoundarySpec(bottom="periodic", top="periodic")
    bcy = BoundarySpec(left="periodic", right="periodic")
    params = ModelParams()
    advance(gx, bc, StepControls(), params, None, dt=5e-4, nsteps=10)
    advance(gy, bcy, StepControls(), params, None, dt=5e-4, nsteps=10)
    ux = gx.interior_state()[:, :, 0]
    uy = gy.interior_state()[[0, 2, 1, 5, 4, 3], 0, :]
    assert np.allclose(ux, uy, rtol=1e-13, atol=1e-18)

import numpy as np
import pytest

from ptails.nonlinearity import default_nonlinearity, zero_nonlinearity
from ptails.semigroup import apply_eLt
from ptails.solver import (SimConfig, Stepper, from_characteristic_frame,
                           gaussian_initial_state, run, to_characteristic_frame)
from ptails.spectral import Grid, StateVector, mass, transform_forward


def small_state(grid, amp=0.05, frac=0.3):
    a0 = amp * np.exp(-grid.x ** 2 / 4)
    b0 = frac * amp * np.exp(-grid.x ** 2 / 4)
    return StateVector(transform_forward(a0, grid),
                       transform_forward(b0, grid), "physical")


@pytest.fixture(scope="module")
def grid():
    return Grid(2 ** 10, 80.0)


def test_config_domain_rule():
    cfg = SimConfig(n_points=2 ** 10, half_length=50.0, t_final=100.0)
    with pytest.raises(ValueError):
        cfg.validate()


def test_config_cfl_guard():
    cfg = SimConfig(n_points=2 ** 10, half_length=300.0, t_final=10.0, dt=10.0)
    with pytest.raises(ValueError):
        cfg.validate()


def test_linear_limit_exactness(grid):
    # with the source off, integrating-factor stepping is the semigroup itself
    state = small_state(grid)
    st = Stepper(grid, 0.05, zero_nonlinearity())
    s = state
    for i in range(100):
        s = st.step(s, i * 0.05)
    exact = apply_eLt(state, 5.0)
    assert np.abs(s.first.coeffs - exact.first.coeffs).max() < 1e-10
    assert np.abs(s.second.coeffs - exact.second.coeffs).max() < 1e-10


def test_mass_conservation_per_1000_steps(grid):
    state = small_state(grid)
    st = Stepper(grid, 0.05, default_nonlinearity())
    m0a, m0b = mass(state.first), mass(state.second)
    s = state
    for i in range(1000):
        s = st.step(s, i * 0.05)
    assert abs(mass(s.first) - m0a) < 1e-9
    assert abs(mass(s.second) - m0b) < 1e-9


def test_dt_self_convergence_fourth_order(grid):
    state = small_state(grid, amp=0.4)
    nl = default_nonlinearity()

    def run_dt(dt, T=8.0):
        st = Stepper(grid, dt, nl)
        s = state
        for i in range(int(round(T / dt))):
            s = st.step(s, i * dt)
        return s

    sA, sB, sC = run_dt(0.2), run_dt(0.1), run_dt(0.05)
    eAB = np.abs(sA.first.coeffs - sB.first.coeffs).max()
    eBC = np.abs(sB.first.coeffs - sC.first.coeffs).max()
    assert 12.0 <= eAB / eBC <= 20.0


def test_etd_heun_cross_check(grid):
    # the second-order scheme converges to the same solution
    state = small_state(grid, amp=0.2)
    nl = default_nonlinearity()
    st4 = Stepper(grid, 0.01, nl)
    st2 = Stepper(grid, 0.01, nl)
    s4 = s2 = state
    for i in range(200):
        s4 = st4.step(s4, i * 0.01, "IF-RK4")
        s2 = st2.step(s2, i * 0.01, "ETD-Heun")
    assert np.abs(s4.first.coeffs - s2.first.coeffs).max() < 5e-7


def test_reality_preserved(grid):
    state = small_state(grid)
    st = Stepper(grid, 0.05, default_nonlinearity())
    s = state
    for i in range(50):
        s = st.step(s, i * 0.05)
    assert np.abs(s.first.samples_complex().imag).max() < 1e-12
    assert s.first.hermitian_defect() < 1e-14


def test_frame_change_t0_and_roundtrip(grid):
    state = small_state(grid)
    uv = to_characteristic_frame(state, 0.0)
    a, b = state.first.samples(), state.second.samples()
    assert np.abs(uv.first.samples() - (a + b)).max() < 1e-12
    assert np.abs(uv.second.samples() - (a - b)).max() < 1e-12
    uv5 = to_characteristic_frame(state, 5.0)
    back = from_characteristic_frame(uv5, 5.0)
    assert np.abs(back.first.coeffs - state.first.coeffs).max() < 1e-12
    assert np.abs(back.second.coeffs - state.second.coeffs).max() < 1e-12


def test_frame_reconstruction_identity(grid):
    # a(x) = (u(x+t) + v(x-t))/2 pointwise
    state = small_state(grid)
    t = 3.0
    uv = to_characteristic_frame(state, t)
    k = grid.k
    a_rec = 0.5 * (np.exp(1j * k * t) * uv.first.coeffs
                   + np.exp(-1j * k * t) * uv.second.coeffs)
    assert np.abs(a_rec - state.first.coeffs).max() < 1e-10


def test_rightward_pulse_stationary_in_u():
    # linear run, data on the + characteristic only: in the co-moving frame
    # the peak stays put up to diffusion/dispersion.  A wide pulse keeps the
    # dispersive correction to the unit characteristic speed (order k^2)
    # below the grid spacing over the run.
    g = Grid(2 ** 12, 200.0)
    amp = 0.05
    a0 = amp * np.exp(-g.x ** 2 / 400)
    state = StateVector(transform_forward(a0, g), transform_forward(a0, g),
                        "physical")   # a = b puts everything in u
    st = Stepper(g, 0.1, zero_nonlinearity())
    s = state
    for i in range(200):
        s = st.step(s, i * 0.1)
    u = to_characteristic_frame(s, 20.0).first.samples()
    drift = abs(g.x[np.argmax(u)])
    assert drift <= 2 * g.dx


def test_run_records_and_conserves():
    cfg = SimConfig(n_points=2 ** 10, half_length=120.0, t_final=20.0,
                    n_snapshots=12)
    traj = run(cfg, nl=default_nonlinearity())
    assert not traj.aborted
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(20.0)
    assert traj.mass_drift() < 1e-10
    series = traj.composite_norm_series()
    assert np.isfinite(series["l2_weighted"]).all()
    assert len(traj.snapshots) == len(traj.times)


def test_weighted_l2_component_bounded():
    # (1+t)^{1/4} ||z||_2 stays bounded and stops growing past the transient
    cfg = SimConfig(n_points=2 ** 12, half_length=450.0, t_final=150.0,
                    n_snapshots=40)
    traj = run(cfg, nl=default_nonlinearity())
    series = traj.composite_norm_series()
    t = series["times"]
    w = series["l2_weighted"]
    assert np.isfinite(w).all()
    late = w[t >= 10.0]
    assert late.max() <= w.max() * (1 + 1e-9)
    assert late[-1] <= late[0] * 1.02     # non-increasing after the transient


def test_run_zero_data_stays_zero():
    cfg = SimConfig(n_points=2 ** 10, half_length=120.0, t_final=10.0,
                    epsilon0=0.0)
    traj = run(cfg, nl=default_nonlinearity())
    final = traj.snapshots[-1]
    assert np.abs(final.first.coeffs).max() == 0.0
    assert np.abs(final.second.coeffs).max() == 0.0


def test_weighted_norm_growth_at_most_exponential():
    # N(t) = 0.5 ||x^2 z||^2 grows at most exponentially: every pairwise
    # growth rate (log N(t2) - log N(t1))/(t2 - t1) stays below a fixed B
    # once the transient has passed
    cfg = SimConfig(n_points=2 ** 11, half_length=150.0, t_final=30.0,
                    n_snapshots=20)
    traj = run(cfg, nl=default_nonlinearity())
    t = np.asarray(traj.times)
    logN = np.log(np.asarray(traj.weighted_sq))
    sel = t >= 5.0
    ts, ln = t[sel], logN[sel]
    rates = [(ln[j] - ln[i]) / (ts[j] - ts[i])
             for i in range(len(ts)) for j in range(i + 1, len(ts))]
    b_hat = max(rates)
    assert np.isfinite(b_hat)
    assert b_hat <= 1.0

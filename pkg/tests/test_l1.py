import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from tilthex.l1 import (
    AdaptationError,
    L1Config,
    L1State,
    adapt,
    b_matrix_inverse,
    ideal_dynamics,
    input_matrix,
    l1_step,
    lpf_step,
)
from tilthex.quat import quat_from_axis_angle
from tilthex.vehicle import (
    PlantPerturbation,
    VehicleParams,
    VehicleState,
    dynamics_nominal,
    rk4_step,
)

from conftest import unit_quats


def test_config_validation():
    with pytest.raises(ValueError):
        L1Config(adapt_gain=np.full(6, 1.0))
    with pytest.raises(ValueError):
        L1Config(period=0.0)


def test_b_inverse_identity_case():
    params = VehicleParams(mass=1.0, inertia=np.eye(3))
    binv = b_matrix_inverse(np.array([1.0, 0, 0, 0]), params)
    assert np.allclose(binv, np.eye(6))


@given(unit_quats())
@settings(max_examples=300, deadline=None)
def test_b_inverse_is_inverse(q):
    params = VehicleParams(mass=3.7, inertia=np.diag([0.07, 0.09, 0.13]),
                           d_com=np.array([0.01, -0.02, 0.005]))
    b = input_matrix(q, params)
    binv = b_matrix_inverse(q, params)
    assert np.allclose(b @ binv, np.eye(6), atol=1e-10)
    assert np.allclose(binv @ b, np.eye(6), atol=1e-10)


@given(unit_quats())
@settings(max_examples=100, deadline=None)
def test_b_inverse_matches_numerical_inverse(q):
    params = VehicleParams(mass=4.0, inertia=np.diag([0.08, 0.08, 0.14]),
                           d_com=np.array([0.012, 0.008, -0.01]))
    binv = b_matrix_inverse(q, params)
    assert np.allclose(binv, np.linalg.inv(input_matrix(q, params)), atol=1e-9)


def test_adapt_zero_error():
    cfg = L1Config()
    assert np.allclose(adapt(np.zeros(6), np.eye(6), cfg), 0.0)


def test_adapt_scalar_gain_oracle():
    """Gain for A = -10 I, Ts = 0.01 against a matrix-exponential oracle."""
    cfg = L1Config(adapt_gain=np.full(6, -10.0), period=0.01)
    a_mat = -10.0 * np.eye(6)
    e_at = expm(a_mat * 0.01)
    gain_mat = np.linalg.inv(e_at - np.eye(6)) @ a_mat @ e_at
    z = np.ones(6)
    expected = -np.eye(6) @ gain_mat @ z
    got = adapt(z, np.eye(6), cfg)
    assert np.allclose(got, expected, atol=1e-9)
    scalar = -10.0 * np.exp(-0.1) / (np.exp(-0.1) - 1.0)
    assert abs(scalar - 95.083) < 1e-3
    assert np.allclose(got, -scalar * z, atol=1e-9)


def test_adapt_distinct_gains_per_axis():
    gains = np.array([-1.0, -2.0, -5.0, -10.0, -20.0, -40.0])
    cfg = L1Config(adapt_gain=gains, period=0.01)
    z = np.ones(6)
    got = adapt(z, np.eye(6), cfg)
    for i, a in enumerate(gains):
        e = np.exp(a * 0.01)
        assert np.isclose(got[i], -(a * e / (e - 1.0)), atol=1e-9)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=300, deadline=None)
def test_adapt_linearity(a, b):
    cfg = L1Config()
    rng = np.random.default_rng(17)
    z1 = rng.normal(size=6)
    z2 = rng.normal(size=6)
    binv = b_matrix_inverse(quat_from_axis_angle(np.array([0.0, 0, 1]), 0.4),
                            VehicleParams())
    lhs = adapt(a * z1 + b * z2, binv, cfg)
    rhs = a * adapt(z1, binv, cfg) + b * adapt(z2, binv, cfg)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_lpf_dc_gain():
    cfg = L1Config()
    y = np.zeros(6)
    sigma = np.full(6, 2.5)
    for _ in range(3000):
        u, y = lpf_step(sigma, y, cfg)
    assert np.allclose(u, -sigma, atol=1e-9)


def test_lpf_zero_input():
    cfg = L1Config()
    u, y = lpf_step(np.zeros(6), np.zeros(6), cfg)
    assert np.allclose(u, 0.0)


def test_lpf_beta_formula():
    cfg = L1Config(cutoff=np.full(6, 50.0), period=0.01)
    beta = 1.0 - np.exp(-0.5)
    assert np.allclose(cfg.lpf_beta, beta)
    u, y = lpf_step(np.ones(6), np.zeros(6), cfg)
    assert np.allclose(u, -beta)
    assert abs(beta - 0.39347) < 1e-5


def test_initialization_defaults():
    z0 = np.arange(6.0)
    st0 = L1State.initial(z0)
    assert np.array_equal(st0.z_hat, z0)
    assert np.array_equal(st0.u_mpc, np.zeros(6))
    assert np.array_equal(st0.u_l1, np.zeros(6))
    assert np.array_equal(st0.sigma_hat, np.zeros(6))


def test_precomputed_discrete_matrices():
    cfg = L1Config(adapt_gain=np.full(6, -10.0), period=0.01)
    assert np.allclose(cfg.exp_at, np.exp(-0.1))
    assert np.allclose(cfg.exp_at_minus_i_inv, 1.0 / (np.exp(-0.1) - 1.0))


def test_non_finite_input_raises():
    params = VehicleParams()
    x = VehicleState.hover(params).as_vector()
    x[0] = np.nan
    st0 = L1State.initial(np.zeros(6))
    with pytest.raises(AdaptationError):
        l1_step(x, np.zeros(6), st0, L1Config(), params)


def _hover_loop(params, cfg, disturbance, steps, plant_pert=None,
                u_mpc0=None):
    """Closed plant/adaptive-layer loop at hover; no OCP in the loop."""
    pert = plant_pert or PlantPerturbation()
    from tilthex.vehicle import Plant

    plant = Plant(params, pert)
    x = VehicleState.hover(params).as_vector()
    wrench0 = x[13:19].copy() if u_mpc0 is None else u_mpc0
    state = L1State.initial(np.concatenate([x[7:10], x[10:13]]), wrench0)
    dt = cfg.period
    for _ in range(steps):
        wrench, state = l1_step(x, np.zeros(6), state, cfg, params)
        x[13:19] = wrench + disturbance
        for _ in range(10):
            x = rk4_step(x, np.zeros(6), dt / 10.0, plant.derivative)
    return x, state


def test_zero_uncertainty_fixed_point(params):
    """Matched plant at hover: predictor error and compensation stay ~zero."""
    cfg = L1Config()
    x, state = _hover_loop(params, cfg, np.zeros(6), steps=300)
    z = np.concatenate([x[7:10], x[10:13]])
    assert np.linalg.norm(state.z_hat - z) < 1e-9
    assert np.max(np.abs(state.u_l1)) < 1e-6 * np.max(np.abs(state.u_mpc))


def test_constant_disturbance_compensation(params):
    """u_l1 converges to the negated disturbance within 2 percent."""
    cfg = L1Config()
    d = np.array([2.0, -1.0, 3.0, 0.0, 0.0, 0.0])
    x, state = _hover_loop(params, cfg, d, steps=400)
    assert np.allclose(state.u_l1[:3], -d[:3], rtol=0.02, atol=0.02)


def test_predictor_error_dynamics_analytic(params):
    """With compensation forced off and constant sigma, the predictor error
    follows the linear error dynamics; compare against its exact solution."""
    cfg = L1Config(adapt_gain=np.full(6, -4.0), period=0.002)
    sigma = np.array([1.5, -0.5, 0.8, 0.02, -0.03, 0.01])
    q = np.array([1.0, 0, 0, 0])
    b = input_matrix(q, params)
    a = cfg.adapt_gain
    forcing = -(b @ sigma)  # dz~/dt = A z~ - B sigma with u_l1 = sigma_hat = 0

    def f(z):
        return a * z + forcing

    z_t = np.zeros(6)
    n = 500
    dt = cfg.period
    for _ in range(n):
        k1 = f(z_t)
        k2 = f(z_t + 0.5 * dt * k1)
        k3 = f(z_t + 0.5 * dt * k2)
        k4 = f(z_t + dt * k3)
        z_t = z_t + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    t = n * dt
    expected = (np.exp(a * t) - 1.0) / a * forcing
    assert np.allclose(z_t, expected, atol=1e-6)


def test_output_reduces_to_mpc_when_adaptation_disabled(params):
    """Tiny gains plus zeroed filter output degenerate to the nominal MPC."""
    cfg = L1Config(adapt_gain=np.full(6, -1e-9), cutoff=np.full(6, 1e-12))
    x = VehicleState.hover(params).as_vector()
    state = L1State.initial(np.concatenate([x[7:10], x[10:13]]), x[13:19])
    u_ocp = np.array([0.5, -0.2, 0.1, 0.05, 0.0, -0.01])
    for _ in range(50):
        wrench, state = l1_step(x, u_ocp, state, cfg, params)
    assert np.allclose(wrench, state.u_mpc, atol=1e-7)


def test_ideal_dynamics_matches_vehicle_model(params):
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.normal(size=19)
        x[3:7] /= np.linalg.norm(x[3:7])
        z_dot = ideal_dynamics(x[3:7], x[10:13], x[13:19], params)
        full = dynamics_nominal(x, np.zeros(6), params)
        assert np.allclose(z_dot, np.concatenate([full[7:10], full[10:13]]),
                           atol=1e-12)

import numpy as np
import pytest

from tilthex.quat import quat_from_axis_angle, rotate
from tilthex.vehicle import (
    Plant,
    PlantPerturbation,
    VehicleParams,
    VehicleState,
    dynamics_nominal,
    dynamics_plant,
    equilibrium_wrench,
    rk4_step,
)


def test_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(mass=-1.0)
    with pytest.raises(ValueError):
        VehicleParams(inertia=np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        VehicleParams(inertia=np.array([[1, 0.5, 0], [0, 1, 0], [0, 0, 1.0]]))


def test_state_roundtrip():
    params = VehicleParams()
    s = VehicleState.hover(params, p=(1.0, 2.0, -3.0))
    x = s.as_vector()
    assert x.shape == (19,)
    s2 = VehicleState.from_vector(x)
    assert np.array_equal(s2.as_vector(), x)


def test_hover_force_balance(params):
    x = VehicleState.hover(params).as_vector()
    d = dynamics_nominal(x, np.zeros(6), params)
    assert np.allclose(d, 0.0)


def test_torque_row_euler_reduction(params):
    x = VehicleState.hover(params).as_vector()
    x[13:16] = 0.0  # drop force so only the applied torque acts
    x[16:19] = [0.1, 0.0, 0.0]
    d = dynamics_nominal(x, np.zeros(6), params)
    assert np.allclose(d[10:13], params.inertia_inv @ [0.1, 0.0, 0.0])


def test_angular_momentum_term_oracle():
    params = VehicleParams(inertia=np.diag([0.08, 0.11, 0.14]))
    rng = np.random.default_rng(42)
    for _ in range(20):
        x = rng.normal(size=19)
        x[3:7] /= np.linalg.norm(x[3:7])
        base = x.copy()
        base[16:19] = 0.0
        base[13:16] = 0.0
        d = dynamics_nominal(base, np.zeros(6), params)
        w = base[10:13]
        expected = params.inertia_inv @ (-np.cross(w, params.inertia @ w))
        assert np.allclose(d[10:13], expected, atol=1e-12)


def test_wrench_rate_passthrough(params):
    x = VehicleState.hover(params).as_vector()
    u = np.array([1.0, -2.0, 3.0, 0.5, 0.0, -0.25])
    d = dynamics_nominal(x, u, params)
    assert np.array_equal(d[13:19], u)


def test_group_a_is_nominal_bitwise(params):
    rng = np.random.default_rng(0)
    pert = PlantPerturbation.for_group("A")
    for _ in range(10):
        x = rng.normal(size=19)
        x[3:7] /= np.linalg.norm(x[3:7])
        u = rng.normal(size=6)
        da = dynamics_plant(x, u, params, pert)
        dn = dynamics_nominal(x, u, params)
        assert np.array_equal(da, dn)


def test_group_deltas():
    shift = np.full(3, 0.01)
    b = PlantPerturbation.for_group("B")
    c = PlantPerturbation.for_group("C")
    d = PlantPerturbation.for_group("D")
    assert b.mass_delta == -0.5 and b.inertia_scale == 0.5
    assert c.mass_delta == +0.5 and c.inertia_scale == 2.0
    assert d.mass_delta == +0.5 and d.inertia_scale == 2.0 and d.wrench_distortion
    for p in (b, c, d):
        assert np.allclose(p.com_shift, shift)
        assert abs(np.linalg.norm(p.com_shift) - np.sqrt(3) / 100) < 1e-12


def test_group_d_zero_wrench(params):
    pert = PlantPerturbation.for_group("D")
    x = VehicleState.hover(params).as_vector()
    x[13:19] = 0.0
    d = dynamics_plant(x, np.zeros(6), params, pert)
    assert np.allclose(d[7:10], params.gravity)
    assert np.allclose(d[10:13], 0.0)


def test_group_d_distortion_value(params):
    pert = PlantPerturbation.for_group("D")
    x = VehicleState.hover(params).as_vector()
    x[13:16] = [0.0, 0.0, -40.0]
    x[16:19] = 0.0
    d = dynamics_plant(x, np.zeros(6), params, pert)
    m_pert = params.mass + 0.5
    assert np.isclose(d[9], 9.81 + 0.95 * (-40.0 + np.sin(-40.0)) / m_pert)


def test_group_d_torque_expression(params):
    pert = PlantPerturbation.for_group("D")
    plant = Plant(params, pert)
    rng = np.random.default_rng(3)
    x = rng.normal(size=19)
    x[3:7] /= np.linalg.norm(x[3:7])
    d = plant.derivative(x, np.zeros(6))
    pt = plant.params_true
    f, tau, w = x[13:16], x[16:19], x[10:13]
    expected = pt.inertia_inv @ (
        0.9 * (tau + np.sin(tau))
        - 0.95 * np.cross(pt.d_com, f)
        - np.cross(w, pt.inertia @ w)
    )
    assert np.allclose(d[10:13], expected, atol=1e-12)


def test_rk4_zero_derivative(params):
    x = VehicleState.hover(params).as_vector()
    out = rk4_step(x, np.zeros(6), 0.01, lambda xx, uu: np.zeros(19))
    assert np.array_equal(out, x)


def test_rk4_constant_acceleration_exact(params):
    # pure vertical fall: quadratic position growth is exact under RK4
    x = VehicleState.hover(params).as_vector()
    x[13:16] = 0.0
    x[7:10] = [0.0, 0.0, 1.0]
    dt = 0.01
    out = rk4_step(x, np.zeros(6), dt, lambda xx, uu: dynamics_nominal(xx, uu, params))
    expected_z = x[2] + 1.0 * dt + 0.5 * 9.81 * dt**2
    assert np.isclose(out[2], expected_z, atol=1e-15)


def test_rk4_torque_free_energy_drift():
    params = VehicleParams(inertia=np.diag([0.08, 0.1, 0.14]))
    x = VehicleState.hover(params).as_vector()
    x[13:19] = 0.0
    x[10:13] = [1.0, 0.5, -0.7]
    deriv = lambda xx, uu: dynamics_nominal(xx, uu, params)

    def energy(state):
        w = state[10:13]
        return 0.5 * w @ params.inertia @ w

    e0 = energy(x)
    dt = 1e-3
    for _ in range(10_000):
        x = rk4_step(x, np.zeros(6), dt, deriv)
    assert abs(energy(x) - e0) / e0 < 1e-6


def test_rk4_momentum_conserved_no_gravity():
    params = VehicleParams(gravity=np.zeros(3))
    x = VehicleState.hover(params).as_vector()
    x[13:19] = 0.0
    x[7:10] = [0.4, -0.2, 0.1]
    x[10:13] = [0.5, 0.2, -0.3]
    deriv = lambda xx, uu: dynamics_nominal(xx, uu, params)
    prev = x[7:10] * params.mass
    for _ in range(100):
        x = rk4_step(x, np.zeros(6), 1e-3, deriv)
        mom = x[7:10] * params.mass
        assert np.allclose(mom, prev, atol=1e-12)
        prev = mom


def test_rk4_renormalizes_quaternion(params):
    x = VehicleState.hover(params).as_vector()
    x[10:13] = [3.0, -2.0, 1.0]
    for _ in range(200):
        x = rk4_step(x, np.zeros(6), 1e-2,
                     lambda xx, uu: dynamics_nominal(xx, uu, params))
    assert abs(np.linalg.norm(x[3:7]) - 1.0) < 1e-12


def test_equilibrium_wrench_cancels_dynamics(params):
    q = quat_from_axis_angle(np.array([0.3, 0.8, 0.1]), 0.7)
    w = np.array([0.2, -0.1, 0.4])
    wr = equilibrium_wrench(q, w, params)
    x = np.concatenate([np.zeros(3), q, np.zeros(3), w, wr])
    d = dynamics_nominal(x, np.zeros(6), params)
    assert np.allclose(d[7:10], 0.0, atol=1e-12)
    assert np.allclose(d[10:13], 0.0, atol=1e-12)

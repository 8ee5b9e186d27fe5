"""Disturbance-wrench EKF and the disturbance-aware OCP hook.

The filter state is [p, q, v, w, f_dist, tau_dist]: kinematics plus a
body-frame disturbance wrench. The disturbance force is assumed constant
in the world frame, which in body coordinates gives f_dist' = -w x f_dist;
the disturbance torque is modelled constant. The covariance lives on an
18-dimensional error state with a 3-component multiplicative attitude
error, so it stays full rank despite the unit-norm quaternion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat import (
    cross,
    quat_from_rotvec,
    quat_inverse,
    quat_mul,
    quat_normalize,
    quat_to_rot,
    rotvec_from_quat,
    skew,
)
from .vehicle import VehicleParams

NES = 18  # error-state dimension


@dataclass
class EkfConfig:
    """Noise model: observation variances (12), process variance rates (18),
    initial covariance diagonal (18), update period."""

    obs_var: np.ndarray = field(default_factory=lambda: np.concatenate([
        np.full(3, 0.01**2),            # position [m]
        np.full(3, np.deg2rad(0.5)**2),  # attitude [rad]
        np.full(3, 0.02**2),            # velocity [m/s]
        np.full(3, 0.01**2),            # body rate [rad/s]
    ]))
    process_var: np.ndarray = field(default_factory=lambda: np.concatenate([
        np.full(3, 1e-8),   # position random walk
        np.full(3, 1e-8),   # attitude
        np.full(3, 1e-6),   # velocity
        np.full(3, 1e-6),   # body rate
        np.full(3, 2e-3),   # disturbance force [N^2/s]; raise for faster estimates
        np.full(3, 2e-4),   # disturbance torque [N^2 m^2/s]
    ]))
    init_var: np.ndarray = field(default_factory=lambda: np.concatenate([
        np.full(12, 1e-6),
        np.full(3, 0.04),
        np.full(3, 4e-3),
    ]))
    period: float = 0.01

    def __post_init__(self):
        self.obs_var = np.asarray(self.obs_var, dtype=float)
        self.process_var = np.asarray(self.process_var, dtype=float)
        self.init_var = np.asarray(self.init_var, dtype=float)
        if np.any(self.obs_var < 0) or np.any(self.process_var < 0):
            raise ValueError("noise variances must be nonnegative")


@dataclass
class EkfState:
    """Filter mean x = [p, q, v, w, f_dist, tau_dist] and covariance P."""

    x: np.ndarray
    P: np.ndarray

    @property
    def f_dist(self) -> np.ndarray:
        return self.x[13:16]

    @property
    def tau_dist(self) -> np.ndarray:
        return self.x[16:19]

    @classmethod
    def initial(cls, kin_state: np.ndarray, cfg: EkfConfig) -> "EkfState":
        x = np.zeros(19)
        x[:13] = np.asarray(kin_state, dtype=float)[:13]
        return cls(x=x, P=np.diag(cfg.init_var.copy()))


def _ekf_derivative(x: np.ndarray, u_wrench: np.ndarray,
                    params: VehicleParams) -> np.ndarray:
    q = x[3:7]
    v = x[7:10]
    w = x[10:13]
    f = u_wrench[:3] + x[13:16]
    tau = u_wrench[3:] + x[16:19]
    out = np.empty(19)
    out[0:3] = v
    out[3:7] = 0.5 * quat_mul(q, np.concatenate([[0.0], w]))
    r = quat_to_rot(q)
    out[7:10] = params.gravity + r @ f / params.mass
    out[10:13] = params.inertia_inv @ (tau - cross(params.d_com, f)
                                       - cross(w, params.inertia @ w))
    out[13:16] = -cross(w, x[13:16])
    out[16:19] = 0.0
    return out


def _error_state_jacobian(x: np.ndarray, u_wrench: np.ndarray,
                          params: VehicleParams) -> np.ndarray:
    """Continuous-time Jacobian on the 18-dim error state
    [dp, dtheta, dv, dw, df, dtau]."""
    q = x[3:7]
    w = x[10:13]
    f = u_wrench[:3] + x[13:16]
    r = quat_to_rot(q)
    F = np.zeros((NES, NES))
    F[0:3, 6:9] = np.eye(3)
    F[3:6, 3:6] = -skew(w)
    F[3:6, 9:12] = np.eye(3)
    F[6:9, 3:6] = -r @ skew(f) / params.mass
    F[6:9, 12:15] = r / params.mass
    jw = params.inertia @ w
    F[9:12, 9:12] = params.inertia_inv @ (skew(jw) - skew(w) @ params.inertia)
    F[9:12, 12:15] = -params.inertia_inv @ skew(params.d_com)
    F[9:12, 15:18] = params.inertia_inv
    F[12:15, 9:12] = skew(x[13:16])
    F[12:15, 12:15] = -skew(w)
    return F


def ekf_predict(state: EkfState, u_wrench: np.ndarray, cfg: EkfConfig,
                params: VehicleParams, dt: float) -> EkfState:
    """RK4 mean propagation; covariance through a second-order transition."""
    u_wrench = np.asarray(u_wrench, dtype=float)
    x = state.x

    def f(xx):
        return _ekf_derivative(xx, u_wrench, params)

    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    xn = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    xn[3:7] = quat_normalize(xn[3:7])

    F = _error_state_jacobian(x, u_wrench, params)
    Fdt = F * dt
    phi = np.eye(NES) + Fdt + 0.5 * (Fdt @ Fdt)
    P = phi @ state.P @ phi.T + np.diag(cfg.process_var) * dt
    P = 0.5 * (P + P.T)
    return EkfState(x=xn, P=P)


def ekf_update(state: EkfState, z_obs: np.ndarray, cfg: EkfConfig):
    """Measurement update with z = [p, q, v, w]; attitude innovation through
    the multiplicative error. Returns (new state, accepted flag); a
    non-finite innovation skips the update."""
    z_obs = np.asarray(z_obs, dtype=float)
    x = state.x
    nu = np.empty(12)
    nu[0:3] = z_obs[0:3] - x[0:3]
    dq = quat_mul(quat_inverse(x[3:7]), z_obs[3:7])
    nu[3:6] = rotvec_from_quat(dq)
    nu[6:9] = z_obs[7:10] - x[7:10]
    nu[9:12] = z_obs[10:13] - x[10:13]
    if not np.all(np.isfinite(nu)):
        return state, False

    H = np.zeros((12, NES))
    H[:, :12] = np.eye(12)
    P = state.P
    S = P[:12, :12] + np.diag(cfg.obs_var)
    K = np.linalg.solve(S.T, P[:, :12].T).T
    delta = K @ nu

    xn = x.copy()
    xn[0:3] += delta[0:3]
    xn[3:7] = quat_normalize(quat_mul(x[3:7], quat_from_rotvec(delta[3:6])))
    xn[7:10] += delta[6:9]
    xn[10:13] += delta[9:12]
    xn[13:16] += delta[12:15]
    xn[16:19] += delta[15:18]

    ikh = np.eye(NES) - K @ H
    Pn = ikh @ P @ ikh.T + K @ np.diag(cfg.obs_var) @ K.T  # Joseph form
    Pn = 0.5 * (Pn + Pn.T)
    return EkfState(x=xn, P=Pn), True


def solve_ocp_ekf(solver, x0: np.ndarray, refs, f_dist: np.ndarray,
                  tau_dist: np.ndarray):
    """Solve the OCP with the estimated disturbance wrench added to the
    actuator wrench inside the prediction model."""
    dist = np.concatenate([np.asarray(f_dist, dtype=float),
                           np.asarray(tau_dist, dtype=float)])
    return solver.solve(x0, refs, dist=dist)

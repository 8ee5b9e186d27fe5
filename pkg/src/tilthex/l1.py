"""Adaptive augmentation layer between the OCP solver and the allocator.

A state predictor runs on the nominal translational/rotational dynamics
z = [v_world, w_body]. The predictor error drives a piecewise-constant
uncertainty estimate (held over each control period), which is low-pass
filtered and subtracted from the commanded wrench, so the closed loop
behaves like the nominal model the OCP predicts with.

Per control period:

    u_mpc  <- u_mpc + u_ocp * T_s          (wrench integrated from OCP rates)
    ztilde <- z_hat - z
    sigma  <- -Binv * G * ztilde           (G precomputed from the gain matrix)
    u_l1   <- first-order LPF of -sigma
    output u_mpc + u_l1
    z_hat  <- z_hat + T_s * (ideal(z; u_mpc) + B (u_l1 + sigma) + A ztilde)

The input matrix B maps a body wrench to [v_dot, w_dot]; its inverse has
the closed form [[m R^T, 0], [-m skew(d_com) R^T, J]].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat import cross, quat_to_rot, skew
from .vehicle import VehicleParams


class AdaptationError(RuntimeError):
    """Non-finite input to the adaptive layer; callers fall back to PID."""


@dataclass
class L1Config:
    """Adaptive gain (diagonal, Hurwitz), control period, per-axis LPF cutoffs.

    The piecewise-constant law settles at sigma_hat = e^(A Ts) sigma for a
    constant uncertainty, so the fraction |A| Ts of it is never compensated;
    convergence is one-step regardless of |A|. Keep |A| Ts small (default
    0.01, a 1% residual) and let the filter cutoffs set the smoothing.
    """

    adapt_gain: np.ndarray = field(default_factory=lambda: np.full(6, -1.0))
    period: float = 0.01
    cutoff: np.ndarray = field(
        default_factory=lambda: np.concatenate([np.full(3, 40.0), np.full(3, 60.0)])
    )

    def __post_init__(self):
        self.adapt_gain = np.asarray(self.adapt_gain, dtype=float)
        self.cutoff = np.asarray(self.cutoff, dtype=float)
        if self.adapt_gain.shape != (6,) or self.cutoff.shape != (6,):
            raise ValueError("adapt_gain and cutoff must have 6 entries")
        if np.any(self.adapt_gain >= 0.0):
            raise ValueError("adaptive gain matrix must be Hurwitz (all negative)")
        if self.period <= 0.0:
            raise ValueError("control period must be positive")
        exp_at = np.exp(self.adapt_gain * self.period)
        self.exp_at = exp_at
        self.exp_at_minus_i_inv = 1.0 / (exp_at - 1.0)
        # combined discrete adaptation gain (diagonal entries)
        self.adapt_matrix = self.exp_at_minus_i_inv * self.adapt_gain * exp_at
        self.lpf_beta = 1.0 - np.exp(-self.cutoff * self.period)


@dataclass
class L1State:
    """Predictor state, uncertainty estimate, filtered compensation, and the
    accumulated OCP wrench."""

    z_hat: np.ndarray
    sigma_hat: np.ndarray
    u_l1: np.ndarray
    u_mpc: np.ndarray

    @classmethod
    def initial(cls, z0: np.ndarray, u_mpc0: np.ndarray | None = None) -> "L1State":
        u0 = np.zeros(6) if u_mpc0 is None else np.asarray(u_mpc0, dtype=float)
        return cls(z_hat=np.asarray(z0, dtype=float).copy(),
                   sigma_hat=np.zeros(6), u_l1=np.zeros(6), u_mpc=u0.copy())


def input_matrix(q: np.ndarray, params: VehicleParams) -> np.ndarray:
    """B = [[R/m, 0], [J^-1 skew(d_com), J^-1]] for attitude q."""
    r = quat_to_rot(q)
    out = np.zeros((6, 6))
    out[:3, :3] = r / params.mass
    out[3:, :3] = params.inertia_inv @ skew(params.d_com)
    out[3:, 3:] = params.inertia_inv
    return out


def b_matrix_inverse(q: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Closed-form inverse of the input matrix.

    Block inversion of [[R/m, 0], [J^-1 D, J^-1]] gives
    [[m R^T, 0], [-m D R^T, J]] with D = skew(d_com); the lower-left block
    needs the minus sign for B @ Binv == I to hold when d_com != 0.
    """
    r = quat_to_rot(q)
    out = np.zeros((6, 6))
    out[:3, :3] = params.mass * r.T
    out[3:, :3] = -params.mass * skew(params.d_com) @ r.T
    out[3:, 3:] = params.inertia
    return out


def ideal_dynamics(q: np.ndarray, w: np.ndarray, wrench: np.ndarray,
                   params: VehicleParams) -> np.ndarray:
    """[v_dot, w_dot] of the nominal model under the commanded wrench."""
    f = wrench[:3]
    tau = wrench[3:]
    r = quat_to_rot(q)
    v_dot = params.gravity + r @ f / params.mass
    w_dot = params.inertia_inv @ (tau - cross(params.d_com, f)
                                  - cross(w, params.inertia @ w))
    return np.concatenate([v_dot, w_dot])


def adapt(z_tilde: np.ndarray, b_inv: np.ndarray, cfg: L1Config) -> np.ndarray:
    """Piecewise-constant adaptive law: sigma = -Binv G ztilde with the
    discrete gain G = (e^(A Ts) - I)^-1 A e^(A Ts) precomputed at init."""
    return -b_inv @ (cfg.adapt_matrix * z_tilde)


def lpf_step(sigma_hat: np.ndarray, y_prev: np.ndarray, cfg: L1Config):
    """One step of the per-axis first-order filter; returns (u_l1, y_new).

    y tracks sigma with beta = 1 - e^(-wc Ts); the compensation output is -y,
    so a constant estimate is cancelled with DC gain one.
    """
    y = y_prev + cfg.lpf_beta * (sigma_hat - y_prev)
    return -y, y


def l1_step(x: np.ndarray, u_ocp: np.ndarray, state: L1State, cfg: L1Config,
            params: VehicleParams):
    """One control period of the adaptive layer.

    x is the measured 13+ state vector ([p, q, v, w, ...]); u_ocp the
    wrench rate returned by the OCP. Returns (wrench for the allocator,
    next L1State).
    """
    x = np.asarray(x, dtype=float)
    u_ocp = np.asarray(u_ocp, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u_ocp))):
        raise AdaptationError("non-finite input to adaptive layer")
    q = x[3:7]
    w = x[10:13]
    z = np.concatenate([x[7:10], w])

    u_mpc = state.u_mpc + u_ocp * cfg.period
    z_tilde = state.z_hat - z
    b_inv = b_matrix_inverse(q, params)
    sigma_hat = adapt(z_tilde, b_inv, cfg)
    u_l1, _ = lpf_step(sigma_hat, -state.u_l1, cfg)
    out = u_mpc + u_l1

    b_mat = input_matrix(q, params)
    z_hat_dot = (ideal_dynamics(q, w, u_mpc, params)
                 + b_mat @ (u_l1 + sigma_hat)
                 + cfg.adapt_gain * z_tilde)
    z_hat = state.z_hat + cfg.period * z_hat_dot
    if not np.all(np.isfinite(z_hat)):
        raise AdaptationError("predictor state diverged")
    return out, L1State(z_hat=z_hat, sigma_hat=sigma_hat, u_l1=u_l1, u_mpc=u_mpc)

"""Cascaded PID wrench controller (standalone or OCP backup).

Position P -> velocity PID -> acceleration setpoint; quaternion-error
attitude P -> body-rate PID -> angular-acceleration setpoint. The wrench
follows from the setpoints and the rigid-body model:

    f_a   = m (rotate(vdot_sp - g, q^-1) + w x rotate(v, q^-1))
    tau_a = J wdot_sp + d_com x f_a + w x (J w)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat import cross, quat_inverse, quat_mul, rotate
from .vehicle import VehicleParams


@dataclass
class PidGains:
    pos_p: np.ndarray = field(default_factory=lambda: np.full(3, 2.5))
    vel_p: np.ndarray = field(default_factory=lambda: np.full(3, 4.0))
    vel_i: np.ndarray = field(default_factory=lambda: np.full(3, 1.0))
    vel_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    att_p: np.ndarray = field(default_factory=lambda: np.full(3, 7.0))
    rate_p: np.ndarray = field(default_factory=lambda: np.full(3, 18.0))
    rate_i: np.ndarray = field(default_factory=lambda: np.full(3, 4.0))
    rate_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acc_limit: float = 15.0
    ang_acc_limit: float = 60.0
    int_limit: float = 5.0

    def __post_init__(self):
        for name in ("pos_p", "vel_p", "vel_i", "vel_d", "att_p",
                     "rate_p", "rate_i", "rate_d"):
            val = np.asarray(getattr(self, name), dtype=float)
            if np.any(val < 0):
                raise ValueError(f"{name} must be nonnegative")
            setattr(self, name, val)


def wrench_from_setpoints(x: np.ndarray, vdot_sp: np.ndarray,
                          wdot_sp: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Map acceleration setpoints to the body wrench."""
    q = x[3:7]
    v = x[7:10]
    w = x[10:13]
    q_inv = quat_inverse(q)
    f = params.mass * (rotate(vdot_sp - params.gravity, q_inv)
                       + cross(w, rotate(v, q_inv)))
    tau = (params.inertia @ wdot_sp + cross(params.d_com, f)
           + cross(w, params.inertia @ w))
    return np.concatenate([f, tau])


def attitude_rate_setpoint(q: np.ndarray, q_sp: np.ndarray,
                           att_p: np.ndarray) -> np.ndarray:
    """Nonlinear quaternion attitude P law.

    The body-frame error axis comes from q^-1 ⊗ q_sp with the sign of the
    scalar part folded in, so the command always takes the short way round.
    """
    qe = quat_mul(quat_inverse(q), q_sp)
    sign = -1.0 if qe[0] < 0.0 else 1.0
    return att_p * (2.0 * sign * qe[1:])


class PidController:
    """Cascade with velocity/rate integrators; one instance per loop."""

    def __init__(self, gains: PidGains, params: VehicleParams, period: float = 0.01):
        self.gains = gains
        self.params = params
        self.period = period
        self.reset()

    def reset(self):
        self._vel_int = np.zeros(3)
        self._rate_int = np.zeros(3)
        self._prev_vel_err = None
        self._prev_rate_err = None

    def wrench(self, x: np.ndarray, p_ref, q_ref, v_ref, w_ref) -> np.ndarray:
        g = self.gains
        dt = self.period
        x = np.asarray(x, dtype=float)

        v_sp = np.asarray(v_ref, dtype=float) + g.pos_p * (p_ref - x[0:3])
        v_err = v_sp - x[7:10]
        self._vel_int = np.clip(self._vel_int + v_err * dt, -g.int_limit, g.int_limit)
        v_der = np.zeros(3) if self._prev_vel_err is None \
            else (v_err - self._prev_vel_err) / dt
        self._prev_vel_err = v_err
        vdot_sp = g.vel_p * v_err + g.vel_i * self._vel_int + g.vel_d * v_der
        vdot_sp = np.clip(vdot_sp, -g.acc_limit, g.acc_limit)

        w_sp = np.asarray(w_ref, dtype=float) + attitude_rate_setpoint(
            x[3:7], np.asarray(q_ref, dtype=float), g.att_p)
        w_err = w_sp - x[10:13]
        self._rate_int = np.clip(self._rate_int + w_err * dt, -g.int_limit, g.int_limit)
        w_der = np.zeros(3) if self._prev_rate_err is None \
            else (w_err - self._prev_rate_err) / dt
        self._prev_rate_err = w_err
        wdot_sp = g.rate_p * w_err + g.rate_i * self._rate_int + g.rate_d * w_der
        wdot_sp = np.clip(wdot_sp, -g.ang_acc_limit, g.ang_acc_limit)

        return wrench_from_setpoints(x, vdot_sp, wdot_sp, self.params)


def pid_wrench(x: np.ndarray, ref, gains: PidGains, params: VehicleParams) -> np.ndarray:
    """One-shot evaluation (integrator and derivative terms at rest).

    ref is a (p_ref, q_ref, v_ref, w_ref) tuple.
    """
    ctrl = PidController(gains, params)
    return ctrl.wrench(np.asarray(x, dtype=float), *ref)

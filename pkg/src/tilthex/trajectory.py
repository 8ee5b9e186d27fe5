"""Smooth periodic 6-DOF reference trajectories with analytic derivatives.

Position traces a lemniscate in XY with a sinusoidal height profile;
attitude combines roll/pitch sinusoids with a yaw ramp plus sinusoid.
Velocity and body rates are exact derivatives (body rates via the ZYX
Euler-rate map), so the reference is dynamically consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quat import quat_from_euler


@dataclass
class TrajectorySpec:
    period: float = 15.0
    x_amp: float = 2.0
    y_amp: float = 1.0
    z_amp: float = 0.5
    z_offset: float = -1.5
    roll_amp: float = np.deg2rad(60.0)
    pitch_amp: float = np.deg2rad(60.0)
    yaw_amp: float = 0.5
    yaw_turns: float = 1.0  # full yaw revolutions per period

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if abs(self.roll_amp) >= np.pi / 2 or abs(self.pitch_amp) >= np.pi / 2:
            raise ValueError("attitude amplitudes must stay below 90 degrees")

    def scaled(self, period: float) -> "TrajectorySpec":
        """Same shape on a different period."""
        out = TrajectorySpec(**self.__dict__)
        out.period = period
        return out


def reference(t, spec: TrajectorySpec):
    """Reference tuple (p, q, v, w) at time(s) t; arrays broadcast over t."""
    t = np.asarray(t, dtype=float)
    om = 2.0 * np.pi / spec.period
    th = om * t
    s1, c1 = np.sin(th), np.cos(th)
    s2, c2 = np.sin(2.0 * th), np.cos(2.0 * th)

    p = np.stack([spec.x_amp * s1,
                  spec.y_amp * s2,
                  spec.z_offset + spec.z_amp * s1], axis=-1)
    v = np.stack([spec.x_amp * om * c1,
                  2.0 * spec.y_amp * om * c2,
                  spec.z_amp * om * c1], axis=-1)

    roll = spec.roll_amp * s1
    pitch = spec.pitch_amp * s2
    yaw = spec.yaw_turns * th + spec.yaw_amp * s1
    droll = spec.roll_amp * om * c1
    dpitch = 2.0 * spec.pitch_amp * om * c2
    dyaw = spec.yaw_turns * om + spec.yaw_amp * om * c1

    q = quat_from_euler(roll, pitch, yaw)

    sr, cr = np.sin(roll), np.cos(roll)
    sp, cp = np.sin(pitch), np.cos(pitch)
    w = np.stack([
        droll - dyaw * sp,
        dpitch * cr + dyaw * cp * sr,
        -dpitch * sr + dyaw * cp * cr,
    ], axis=-1)
    return p, q, v, w


def initial_state(spec: TrajectorySpec, wrench: np.ndarray | None = None) -> np.ndarray:
    """Full 19-state vector sitting exactly on the reference at t = 0."""
    p, q, v, w = reference(0.0, spec)
    wr = np.zeros(6) if wrench is None else np.asarray(wrench, dtype=float)
    return np.concatenate([p, q, v, w, wr])

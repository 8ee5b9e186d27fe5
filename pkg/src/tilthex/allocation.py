"""Actuator effectiveness model and pseudo-inverse control allocation.

Six arms at 60 degree spacing, each carrying one rotor that tilts about the
arm axis. With the substitution U = [O1^2 sin(a1), O1^2 cos(a1), ...] the
body wrench is linear in U, so a single 6x12 matrix maps U to wrench and
its Moore-Penrose inverse gives the least-squares allocation. Thrust and
drag-torque coefficients are absorbed into the matrix columns, so the
extraction step divides them back out before taking the fourth root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat import cross, quat_from_axis_angle, rotate


@dataclass
class ActuatorGeometry:
    """Rotor layout: azimuths (rad), arm length (m), thrust/drag coefficients,
    spin directions, and rotor-speed bounds (rad/s)."""

    arm_length: float = 0.3
    thrust_coeff: float = 8.0e-6
    drag_coeff: float = 1.3e-7
    azimuths: tuple = tuple(np.deg2rad(60.0 * i) for i in range(6))
    spin_dirs: tuple = (1, -1, 1, -1, 1, -1)
    rotor_speed_min: float = 0.0
    rotor_speed_max: float = 1500.0

    def __post_init__(self):
        if self.thrust_coeff <= 0.0 or self.drag_coeff <= 0.0:
            raise ValueError("thrust and drag coefficients must be positive")
        if len(self.azimuths) != 6 or len(self.spin_dirs) != 6:
            raise ValueError("expected six rotors")
        if any(s not in (-1, 1) for s in self.spin_dirs):
            raise ValueError("spin directions must be +1 or -1")

    def rotor_position(self, i: int) -> np.ndarray:
        g = self.azimuths[i]
        return self.arm_length * np.array([np.cos(g), np.sin(g), 0.0])

    def arm_axis(self, i: int) -> np.ndarray:
        g = self.azimuths[i]
        return np.array([np.cos(g), np.sin(g), 0.0])


@dataclass
class ActuatorCommand:
    """Rotor speeds (rad/s, >= 0) and tilt angles (rad, in (-pi, pi])."""

    omega: np.ndarray
    alpha: np.ndarray
    saturated: bool = False


@dataclass
class AllocationMatrices:
    """Wrench map M_c, force-allocation matrix B, and cached pseudo-inverses."""

    geometry: ActuatorGeometry
    M_c: np.ndarray
    B: np.ndarray
    M_c_pinv: np.ndarray = field(init=False)
    B_pinv: np.ndarray = field(init=False)

    def __post_init__(self):
        self.M_c_pinv = np.linalg.pinv(self.M_c)
        self.B_pinv = np.linalg.pinv(self.B)


def rotor_wrench(geom: ActuatorGeometry, i: int, omega: float, alpha: float) -> np.ndarray:
    """Forward model of one rotor: thrust direction from an explicit rotation
    of [0, 0, -1] about the arm axis, drag torque along the same direction."""
    q_tilt = quat_from_axis_angle(geom.arm_axis(i), alpha)
    direction = rotate(np.array([0.0, 0.0, -1.0]), q_tilt)
    thrust = geom.thrust_coeff * omega**2
    f = thrust * direction
    tau = cross(geom.rotor_position(i), f) \
        + geom.spin_dirs[i] * geom.drag_coeff * omega**2 * direction
    return np.concatenate([f, tau])


def forward_model(geom: ActuatorGeometry, cmd: ActuatorCommand) -> np.ndarray:
    """Total body wrench produced by a full actuator command."""
    w = np.zeros(6)
    for i in range(6):
        w += rotor_wrench(geom, i, cmd.omega[i], cmd.alpha[i])
    return w


def build_matrices(geom: ActuatorGeometry) -> AllocationMatrices:
    """Assemble the 6x12 wrench map from per-rotor geometry.

    Column 2i   multiplies mu O_i^2 sin(a_i): tangential thrust component.
    Column 2i+1 multiplies mu O_i^2 cos(a_i): downward thrust component.
    The thrust coefficient is absorbed, so the solved variables are in
    newtons and the command extraction divides it back out; drag torque
    enters through the drag/thrust ratio.
    """
    ratio = geom.drag_coeff / geom.thrust_coeff
    m = np.zeros((6, 12))
    down = np.array([0.0, 0.0, -1.0])
    for i in range(6):
        p = geom.rotor_position(i)
        tangent = cross(geom.arm_axis(i), down)
        sigma = geom.spin_dirs[i]
        m[:3, 2 * i] = tangent
        m[3:, 2 * i] = cross(p, tangent) + sigma * ratio * tangent
        m[:3, 2 * i + 1] = down
        m[3:, 2 * i + 1] = cross(p, down) + sigma * ratio * down
    if np.linalg.matrix_rank(m) < 6:
        raise ValueError("degenerate actuator geometry: wrench map rank < 6")
    return AllocationMatrices(geometry=geom, M_c=m, B=m.copy())


def extract_rotor_command(omega_sq_sin: np.ndarray, omega_sq_cos: np.ndarray,
                          mismatch: bool = False):
    """Recover (omega, alpha) from the substituted pair per rotor.

    The correct extraction takes the fourth root of the squared pair sum;
    the mismatch mode (a deliberate plant-side fault) takes the square root.
    atan2(0, 0) maps idle rotors to alpha = 0.
    """
    mag = omega_sq_sin**2 + omega_sq_cos**2
    omega = np.sqrt(mag) if mismatch else mag**0.25
    alpha = np.arctan2(omega_sq_sin, omega_sq_cos)
    return omega, alpha


def _allocate(wrench: np.ndarray, mats: AllocationMatrices, mismatch: bool) -> ActuatorCommand:
    geom = mats.geometry
    u = mats.M_c_pinv @ np.asarray(wrench, dtype=float)
    os_pair = u[0::2] / geom.thrust_coeff
    oc_pair = u[1::2] / geom.thrust_coeff
    omega, alpha = extract_rotor_command(os_pair, oc_pair, mismatch=mismatch)
    saturated = bool(np.any(omega > geom.rotor_speed_max)
                     or np.any(omega < geom.rotor_speed_min))
    omega = np.clip(omega, geom.rotor_speed_min, geom.rotor_speed_max)
    return ActuatorCommand(omega=omega, alpha=alpha, saturated=saturated)


def allocate(wrench: np.ndarray, mats: AllocationMatrices) -> ActuatorCommand:
    """Least-squares allocation: pseudo-inverse, then per-rotor extraction.
    Speeds outside bounds are clamped and flagged."""
    return _allocate(wrench, mats, mismatch=False)


def allocate_mismatched(wrench: np.ndarray, mats: AllocationMatrices) -> ActuatorCommand:
    """Allocation with the wrong root in the speed extraction (plant-side
    mismatch mode for the benchmark harness); tilt angles are unaffected."""
    return _allocate(wrench, mats, mismatch=True)


def rotor_thrust_vector(wrench: np.ndarray, mats: AllocationMatrices) -> np.ndarray:
    """Per-rotor squared-thrust-like quantities used as constrained outputs.

    y = B^+ wrench carries the thrust coefficient, so each entry is
    (mu O^2 sin, mu O^2 cos) and the pair sum is (mu O^2)^2, monotone in
    physical rotor thrust.
    """
    y = mats.B_pinv @ np.asarray(wrench, dtype=float)
    return y[0::2] ** 2 + y[1::2] ** 2


def thrust_output_jacobian(wrench: np.ndarray, mats: AllocationMatrices) -> np.ndarray:
    """d(rotor_thrust_vector)/d(wrench), shape (6, 6)."""
    y = mats.B_pinv @ np.asarray(wrench, dtype=float)
    return 2.0 * (y[0::2, None] * mats.B_pinv[0::2, :]
                  + y[1::2, None] * mats.B_pinv[1::2, :])

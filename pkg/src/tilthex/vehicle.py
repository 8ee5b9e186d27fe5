"""Rigid-body vehicle model and the mismatched plant variants.

State layout (19 components, used everywhere downstream):

    x = [p(3) world NED, q(4) scalar-first, v(3) world, w(3) body FRD,
         f_a(3) body actuator force, tau_a(3) body actuator torque]

Control u is the actuator wrench rate [df(3), dtau(3)]. The nominal
derivative is

    p'   = v
    q'   = 0.5 q ⊗ [0, w]
    v'   = g + rotate(f_a, q) / m
    w'   = J^-1 (tau_a - d_com x f_a - w x (J w))
    f_a' = df
    tau' = dtau

Plant groups A-D perturb mass/inertia/center of mass and, for group D,
distort the applied wrench nonlinearly (elementwise sin in SI units).
All functions broadcast over leading axes of x and u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat import cross, rotate, quat_inverse

NX = 19
NU = 6

# state slices
P = slice(0, 3)
Q = slice(3, 7)
V = slice(7, 10)
W = slice(10, 13)
FA = slice(13, 16)
TA = slice(16, 19)

# renormalization triggers well below the 1e-12 post-step norm guarantee
QUAT_RENORM_TOL = 1e-13


@dataclass
class VehicleParams:
    """Nominal rigid-body parameters (SI units, world NED gravity)."""

    mass: float = 4.0
    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([0.08, 0.08, 0.14])
    )
    d_com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 9.81]))
    geometry: object | None = None  # ActuatorGeometry, see allocation module

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.d_com = np.asarray(self.d_com, dtype=float)
        self.gravity = np.asarray(self.gravity, dtype=float)
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if not np.allclose(self.inertia, self.inertia.T):
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0.0):
            raise ValueError("inertia must be positive definite")
        arm = getattr(self.geometry, "arm_length", None)
        if arm is not None and np.linalg.norm(self.d_com) >= arm:
            raise ValueError("center-of-mass offset exceeds arm length")
        self.inertia_inv = np.linalg.inv(self.inertia)


@dataclass
class VehicleState:
    """Convenience container over the flat 19-vector."""

    p: np.ndarray
    q: np.ndarray
    v: np.ndarray
    w: np.ndarray
    f_a: np.ndarray
    tau_a: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q, self.v, self.w, self.f_a, self.tau_a])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "VehicleState":
        x = np.asarray(x, dtype=float)
        return cls(x[P].copy(), x[Q].copy(), x[V].copy(), x[W].copy(),
                   x[FA].copy(), x[TA].copy())

    @classmethod
    def hover(cls, params: VehicleParams, p=(0.0, 0.0, 0.0)) -> "VehicleState":
        """Static hover at position p with gravity-balancing force."""
        f = -params.mass * params.gravity
        return cls(np.asarray(p, dtype=float), np.array([1.0, 0, 0, 0]),
                   np.zeros(3), np.zeros(3), f, np.zeros(3))


@dataclass
class PlantPerturbation:
    """Deviation of the true plant from the nominal parameter set."""

    mass_delta: float = 0.0
    inertia_scale: float = 1.0
    com_shift: np.ndarray = field(default_factory=lambda: np.zeros(3))
    wrench_distortion: bool = False
    allocation_mismatch: bool = False

    def __post_init__(self):
        self.com_shift = np.asarray(self.com_shift, dtype=float)

    @classmethod
    def for_group(cls, group: str, com_shift=(0.01, 0.01, 0.01)) -> "PlantPerturbation":
        """Benchmark plant groups: A matched, B lighter, C heavier, D = C + distortion."""
        group = group.upper()
        shift = np.asarray(com_shift, dtype=float)
        if group == "A":
            return cls()
        if group == "B":
            return cls(mass_delta=-0.5, inertia_scale=0.5, com_shift=shift)
        if group == "C":
            return cls(mass_delta=+0.5, inertia_scale=2.0, com_shift=shift)
        if group == "D":
            return cls(mass_delta=+0.5, inertia_scale=2.0, com_shift=shift,
                       wrench_distortion=True)
        raise ValueError(f"unknown plant group {group!r}")

    def is_identity(self) -> bool:
        return (self.mass_delta == 0.0 and self.inertia_scale == 1.0
                and not self.wrench_distortion and not np.any(self.com_shift))

    def apply(self, params: VehicleParams) -> VehicleParams:
        return VehicleParams(
            mass=params.mass + self.mass_delta,
            inertia=params.inertia * self.inertia_scale,
            d_com=params.d_com + self.com_shift,
            gravity=params.gravity.copy(),
            geometry=params.geometry,
        )


def _rigid_rows(out, x, f, tau, params: VehicleParams):
    """Fill the kinematic/dynamic rows for an applied body wrench (f, tau).

    Component arithmetic throughout: roughly an order of magnitude faster
    than composing the quaternion helpers, and exact on unit quaternions.
    """
    qw, qx, qy, qz = x[..., 3], x[..., 4], x[..., 5], x[..., 6]
    wx, wy, wz = x[..., 10], x[..., 11], x[..., 12]
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    out[..., 0:3] = x[..., V]
    out[..., 3] = 0.5 * (-qx * wx - qy * wy - qz * wz)
    out[..., 4] = 0.5 * (qw * wx + qy * wz - qz * wy)
    out[..., 5] = 0.5 * (qw * wy + qz * wx - qx * wz)
    out[..., 6] = 0.5 * (qw * wz + qx * wy - qy * wx)
    # rotate(f, q) as f + qw*t + u x t with t = 2 u x f
    tx = 2.0 * (qy * fz - qz * fy)
    ty = 2.0 * (qz * fx - qx * fz)
    tz = 2.0 * (qx * fy - qy * fx)
    g = params.gravity
    inv_m = 1.0 / params.mass
    out[..., 7] = g[0] + (fx + qw * tx + qy * tz - qz * ty) * inv_m
    out[..., 8] = g[1] + (fy + qw * ty + qz * tx - qx * tz) * inv_m
    out[..., 9] = g[2] + (fz + qw * tz + qx * ty - qy * tx) * inv_m
    J = params.inertia
    jwx = J[0, 0] * wx + J[0, 1] * wy + J[0, 2] * wz
    jwy = J[1, 0] * wx + J[1, 1] * wy + J[1, 2] * wz
    jwz = J[2, 0] * wx + J[2, 1] * wy + J[2, 2] * wz
    d = params.d_com
    mx = tau[..., 0] - (d[1] * fz - d[2] * fy) - (wy * jwz - wz * jwy)
    my = tau[..., 1] - (d[2] * fx - d[0] * fz) - (wz * jwx - wx * jwz)
    mz = tau[..., 2] - (d[0] * fy - d[1] * fx) - (wx * jwy - wy * jwx)
    Ji = params.inertia_inv
    out[..., 10] = Ji[0, 0] * mx + Ji[0, 1] * my + Ji[0, 2] * mz
    out[..., 11] = Ji[1, 0] * mx + Ji[1, 1] * my + Ji[1, 2] * mz
    out[..., 12] = Ji[2, 0] * mx + Ji[2, 1] * my + Ji[2, 2] * mz


def dynamics_nominal(x: np.ndarray, u: np.ndarray, params: VehicleParams,
                     dist: np.ndarray | None = None) -> np.ndarray:
    """Nominal 19-state derivative; optional constant disturbance wrench
    (body frame) added to the actuator wrench in the force/torque rows."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    f = x[..., FA]
    tau = x[..., TA]
    if dist is not None:
        f = f + dist[..., :3]
        tau = tau + dist[..., 3:]
    out = np.empty(np.broadcast_shapes(x.shape[:-1], u.shape[:-1]) + (NX,))
    _rigid_rows(out, x, f, tau, params)
    out[..., FA] = u[..., :3]
    out[..., TA] = u[..., 3:]
    return out


def _distorted_derivative(x, u, params_true: VehicleParams) -> np.ndarray:
    """Group-D derivative: lossy gain plus elementwise-sin wrench distortion.

    The center-of-mass torque keeps the undistorted actuator force with its
    own 0.95 factor, so it is folded in here instead of reusing _rigid_rows.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    f = x[..., FA]
    tau = x[..., TA]
    f_eff = 0.95 * (f + np.sin(f))
    tau_eff = (0.9 * (tau + np.sin(tau))
               - 0.95 * cross(params_true.d_com, f)
               + cross(params_true.d_com, f_eff))
    out = np.empty(np.broadcast_shapes(x.shape[:-1], u.shape[:-1]) + (NX,))
    _rigid_rows(out, x, f_eff, tau_eff, params_true)
    out[..., FA] = u[..., :3]
    out[..., TA] = u[..., 3:]
    return out


def dynamics_plant(x: np.ndarray, u: np.ndarray, params: VehicleParams,
                   pert: PlantPerturbation) -> np.ndarray:
    """True-plant derivative for a perturbation applied to nominal params."""
    if pert.is_identity():
        return dynamics_nominal(x, u, params)
    return Plant(params, pert).derivative(x, u)


class Plant:
    """Perturbed plant with the effective parameter set resolved once."""

    def __init__(self, params: VehicleParams, pert: PlantPerturbation):
        self.nominal = params
        self.pert = pert
        self.params_true = pert.apply(params)

    def derivative(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.pert.is_identity():
            return dynamics_nominal(x, u, self.nominal)
        if self.pert.wrench_distortion:
            return _distorted_derivative(x, u, self.params_true)
        return dynamics_nominal(x, u, self.params_true)


def rk4_step(x: np.ndarray, u: np.ndarray, dt: float, deriv) -> np.ndarray:
    """Classical 4th-order step; attitude renormalized when drift exceeds tol."""
    k1 = deriv(x, u)
    k2 = deriv(x + 0.5 * dt * k1, u)
    k3 = deriv(x + 0.5 * dt * k2, u)
    k4 = deriv(x + dt * k3, u)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    qn = np.linalg.norm(out[..., Q], axis=-1, keepdims=True)
    drift = np.abs(qn - 1.0)
    if np.any(drift > QUAT_RENORM_TOL):
        out = np.array(out, copy=True)
        out[..., Q] = np.where(drift > QUAT_RENORM_TOL, out[..., Q] / qn, out[..., Q])
    return out


def equilibrium_wrench(q: np.ndarray, w: np.ndarray, params: VehicleParams) -> np.ndarray:
    """Wrench holding the current attitude/rate: balances gravity and w x Jw."""
    f = params.mass * rotate(-params.gravity, quat_inverse(q))
    tau = cross(w, w @ params.inertia.T) + cross(params.d_com, f)
    return np.concatenate([f, tau], axis=-1)

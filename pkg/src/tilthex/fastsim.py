"""JIT-compiled plant integration kernel.

The benchmark loop integrates the true plant at 1 kHz between 100 Hz
control updates; doing that with numpy single-state calls is overhead
bound, so the substep loop is compiled with numba when available. The
kernel mirrors vehicle.dynamics_nominal / the distorted group-D variant
for a constant applied wrench (wrench rates are zero between control
updates) and renormalizes the quaternion after every step. A pure-numpy
fallback keeps the package importable without numba; equivalence of the
two paths is covered by tests.
"""

from __future__ import annotations

import numpy as np

from . import vehicle
from .vehicle import Plant, rk4_step

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def _deriv13(x, f, tau, m, J, Ji, d, g, distorted):
    out = np.empty(13)
    qw, qx, qy, qz = x[3], x[4], x[5], x[6]
    wx, wy, wz = x[10], x[11], x[12]
    fx, fy, fz = f[0], f[1], f[2]
    tax, tay, taz = tau[0], tau[1], tau[2]
    if distorted:
        gx = 0.95 * (fx + np.sin(fx))
        gy = 0.95 * (fy + np.sin(fy))
        gz = 0.95 * (fz + np.sin(fz))
        mx0 = 0.9 * (tax + np.sin(tax)) - 0.95 * (d[1] * fz - d[2] * fy)
        my0 = 0.9 * (tay + np.sin(tay)) - 0.95 * (d[2] * fx - d[0] * fz)
        mz0 = 0.9 * (taz + np.sin(taz)) - 0.95 * (d[0] * fy - d[1] * fx)
    else:
        gx, gy, gz = fx, fy, fz
        mx0 = tax - (d[1] * fz - d[2] * fy)
        my0 = tay - (d[2] * fx - d[0] * fz)
        mz0 = taz - (d[0] * fy - d[1] * fx)
    out[0] = x[7]
    out[1] = x[8]
    out[2] = x[9]
    out[3] = 0.5 * (-qx * wx - qy * wy - qz * wz)
    out[4] = 0.5 * (qw * wx + qy * wz - qz * wy)
    out[5] = 0.5 * (qw * wy + qz * wx - qx * wz)
    out[6] = 0.5 * (qw * wz + qx * wy - qy * wx)
    tx = 2.0 * (qy * gz - qz * gy)
    ty = 2.0 * (qz * gx - qx * gz)
    tz = 2.0 * (qx * gy - qy * gx)
    out[7] = g[0] + (gx + qw * tx + qy * tz - qz * ty) / m
    out[8] = g[1] + (gy + qw * ty + qz * tx - qx * tz) / m
    out[9] = g[2] + (gz + qw * tz + qx * ty - qy * tx) / m
    jwx = J[0, 0] * wx + J[0, 1] * wy + J[0, 2] * wz
    jwy = J[1, 0] * wx + J[1, 1] * wy + J[1, 2] * wz
    jwz = J[2, 0] * wx + J[2, 1] * wy + J[2, 2] * wz
    mx = mx0 - (wy * jwz - wz * jwy)
    my = my0 - (wz * jwx - wx * jwz)
    mz = mz0 - (wx * jwy - wy * jwx)
    out[10] = Ji[0, 0] * mx + Ji[0, 1] * my + Ji[0, 2] * mz
    out[11] = Ji[1, 0] * mx + Ji[1, 1] * my + Ji[1, 2] * mz
    out[12] = Ji[2, 0] * mx + Ji[2, 1] * my + Ji[2, 2] * mz
    return out


@njit(cache=True)
def _substeps(x13, f, tau, dt, n, m, J, Ji, d, g, distorted):
    x = x13.copy()
    for _ in range(n):
        k1 = _deriv13(x, f, tau, m, J, Ji, d, g, distorted)
        k2 = _deriv13(x + 0.5 * dt * k1, f, tau, m, J, Ji, d, g, distorted)
        k3 = _deriv13(x + 0.5 * dt * k2, f, tau, m, J, Ji, d, g, distorted)
        k4 = _deriv13(x + dt * k3, f, tau, m, J, Ji, d, g, distorted)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        qn = np.sqrt(x[3] ** 2 + x[4] ** 2 + x[5] ** 2 + x[6] ** 2)
        if abs(qn - 1.0) > 1e-9:
            x[3] /= qn
            x[4] /= qn
            x[5] /= qn
            x[6] /= qn
    return x


class PlantSimulator:
    """Steps a Plant over the control period with fixed applied wrench."""

    def __init__(self, plant: Plant, dt: float, substeps: int,
                 use_jit: bool = True):
        self.plant = plant
        self.dt = dt
        self.substeps = substeps
        self.use_jit = use_jit and _HAVE_NUMBA
        p = plant.params_true
        self._args = (p.mass, p.inertia, p.inertia_inv, p.d_com, p.gravity,
                      plant.pert.wrench_distortion)

    def step(self, x: np.ndarray, wrench: np.ndarray) -> np.ndarray:
        """Advance the 19-state by one control period under a held wrench."""
        out = np.asarray(x, dtype=float).copy()
        out[13:16] = wrench[:3]
        out[16:19] = wrench[3:]
        if self.use_jit:
            out[:13] = _substeps(out[:13].copy(), out[13:16].copy(),
                                 out[16:19].copy(), self.dt, self.substeps,
                                 *self._args)
        else:
            zero_u = np.zeros(6)
            for _ in range(self.substeps):
                out = rk4_step(out, zero_u, self.dt, self.plant.derivative)
        return out


def reference_step(plant: Plant, x: np.ndarray, wrench: np.ndarray, dt: float,
                   substeps: int) -> np.ndarray:
    """Numpy reference for the JIT kernel (used by tests)."""
    out = np.asarray(x, dtype=float).copy()
    out[13:16] = wrench[:3]
    out[16:19] = wrench[3:]
    zero_u = np.zeros(6)
    for _ in range(substeps):
        out = rk4_step(out, zero_u, dt, plant.derivative)
    return out

"""Quaternion algebra and small fixed-size linear-algebra helpers.

Quaternions are scalar-first arrays [w, x, y, z]. Every function broadcasts
over leading axes, so the same code serves single vectors and stacked
batches. World frame is NED, body frame FRD; rotate(v, q) maps body
vectors to world for an attitude quaternion q.
"""

from __future__ import annotations

import numpy as np

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product a x b, broadcasting. Faster than np.cross for small stacks."""
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack(
        [a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1
    )


def skew(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix S with S @ u == v x u."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a ⊗ b, scalar-first."""
    aw, av = a[..., :1], a[..., 1:]
    bw, bv = b[..., :1], b[..., 1:]
    w = aw * bw - np.sum(av * bv, axis=-1, keepdims=True)
    v = aw * bv + bw * av + cross(av, bv)
    return np.concatenate([w, v], axis=-1)


def quat_conj(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def quat_inverse(q: np.ndarray) -> np.ndarray:
    """True inverse conj(q) / |q|^2; equals the conjugate for unit q."""
    nsq = np.sum(np.square(q), axis=-1, keepdims=True)
    return quat_conj(q) / nsq


def quat_normalize(q: np.ndarray, canonical: bool = False) -> np.ndarray:
    """Scale to unit norm; optionally flip sign so that w >= 0."""
    q = np.asarray(q, dtype=float)
    out = q / np.linalg.norm(q, axis=-1, keepdims=True)
    if canonical:
        flip = np.where(out[..., :1] < 0.0, -1.0, 1.0)
        out = out * flip
    return out


def rotate(v: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rotate v by q via the sandwich q ⊗ [0, v] ⊗ q^-1 (norm preserving)."""
    v = np.asarray(v, dtype=float)
    pv = np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)
    return quat_mul(quat_mul(q, pv), quat_inverse(q))[..., 1:]


def quat_error(q: np.ndarray, q_ref: np.ndarray) -> np.ndarray:
    """Vector part of q ⊗ q_ref^-1, sign-canonicalized so w >= 0.

    Zero iff q and q_ref describe the same rotation (double cover folded).
    At exactly 180 degrees (w == 0) the sign comes from the first nonzero
    vector component, keeping the map deterministic on both sheets.
    """
    # conjugate rather than true inverse: identical for unit-norm inputs,
    # and the scalar-vector terms cancel exactly when q == q_ref
    prod = quat_mul(q, quat_conj(q_ref))
    w = prod[..., :1]
    tie = np.sign(prod[..., 1:2])
    tie = np.where(tie == 0.0, np.sign(prod[..., 2:3]), tie)
    tie = np.where(tie == 0.0, np.sign(prod[..., 3:4]), tie)
    tie = np.where(tie == 0.0, 1.0, tie)
    sign = np.where(w < 0.0, -1.0, np.where(w > 0.0, 1.0, tie))
    return sign * prod[..., 1:]


def quat_from_axis_angle(axis: np.ndarray, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=float)
    half = 0.5 * angle
    w = np.cos(half)[..., None]
    v = np.sin(half)[..., None] * axis
    return np.concatenate([w, v], axis=-1)


def quat_from_rotvec(rv: np.ndarray) -> np.ndarray:
    """exp map: rotation vector (axis * angle) to quaternion."""
    rv = np.asarray(rv, dtype=float)
    angle = np.linalg.norm(rv, axis=-1, keepdims=True)
    half = 0.5 * angle
    # sinc form keeps the zero-angle limit exact
    small = angle < 1e-12
    k = np.where(small, 0.5, np.sin(half) / np.where(small, 1.0, angle))
    return np.concatenate([np.cos(half), k * rv], axis=-1)


def rotvec_from_quat(q: np.ndarray) -> np.ndarray:
    """log map: unit quaternion to rotation vector, shortest arc."""
    q = np.asarray(q, dtype=float)
    sign = np.where(q[..., :1] < 0.0, -1.0, 1.0)
    w = sign[..., 0] * q[..., 0]
    v = sign * q[..., 1:]
    vn = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(vn, w)
    small = vn < 1e-12
    scale = np.where(small, 2.0, angle / np.where(small, 1.0, vn))
    return scale[..., None] * v


def quat_from_euler(roll, pitch, yaw) -> np.ndarray:
    """ZYX (yaw-pitch-roll) Euler angles to quaternion."""
    roll, pitch, yaw = np.broadcast_arrays(
        np.asarray(roll, dtype=float),
        np.asarray(pitch, dtype=float),
        np.asarray(yaw, dtype=float),
    )
    cr, sr = np.cos(0.5 * roll), np.sin(0.5 * roll)
    cp, sp = np.cos(0.5 * pitch), np.sin(0.5 * pitch)
    cy, sy = np.cos(0.5 * yaw), np.sin(0.5 * yaw)
    return np.stack(
        [
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        ],
        axis=-1,
    )


def quat_to_rot(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[..., 0, 1] = 2.0 * (x * y - w * z)
    out[..., 0, 2] = 2.0 * (x * z + w * y)
    out[..., 1, 0] = 2.0 * (x * y + w * z)
    out[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[..., 1, 2] = 2.0 * (y * z - w * x)
    out[..., 2, 0] = 2.0 * (x * z - w * y)
    out[..., 2, 1] = 2.0 * (y * z + w * x)
    out[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def left_mul_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix L(q) with L(q) @ r == q ⊗ r."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (4, 4))
    out[..., 0, 0], out[..., 0, 1], out[..., 0, 2], out[..., 0, 3] = w, -x, -y, -z
    out[..., 1, 0], out[..., 1, 1], out[..., 1, 2], out[..., 1, 3] = x, w, -z, y
    out[..., 2, 0], out[..., 2, 1], out[..., 2, 2], out[..., 2, 3] = y, z, w, -x
    out[..., 3, 0], out[..., 3, 1], out[..., 3, 2], out[..., 3, 3] = z, -y, x, w
    return out


def right_mul_matrix(r: np.ndarray) -> np.ndarray:
    """Matrix R(r) with R(r) @ q == q ⊗ r."""
    w, x, y, z = r[..., 0], r[..., 1], r[..., 2], r[..., 3]
    out = np.empty(r.shape[:-1] + (4, 4))
    out[..., 0, 0], out[..., 0, 1], out[..., 0, 2], out[..., 0, 3] = w, -x, -y, -z
    out[..., 1, 0], out[..., 1, 1], out[..., 1, 2], out[..., 1, 3] = x, w, z, -y
    out[..., 2, 0], out[..., 2, 1], out[..., 2, 2], out[..., 2, 3] = y, -z, w, x
    out[..., 3, 0], out[..., 3, 1], out[..., 3, 2], out[..., 3, 3] = z, y, -x, w
    return out


def rot_action_jacobian(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d(R(q) v)/dq for the homogeneous quadratic form of R, shape (..., 3, 4).

    Exact on the unit sphere; used to linearize attitude-coupled dynamics.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w = q[..., 0]
    u = q[..., 1:]
    uv = cross(u, v)
    udotv = np.sum(u * v, axis=-1)
    out = np.empty(np.broadcast_shapes(q.shape[:-1], v.shape[:-1]) + (3, 4))
    out[..., :, 0] = 2.0 * (w[..., None] * v + uv)
    eye = np.eye(3)
    out[..., :, 1:] = 2.0 * (
        udotv[..., None, None] * eye
        + u[..., :, None] * v[..., None, :]
        - v[..., :, None] * u[..., None, :]
        - w[..., None, None] * skew(v)
    )
    return out

import numpy as np
import pytest
from hypothesis import given, settings

from tilthex.quat import (
    cross,
    quat_error,
    quat_from_axis_angle,
    quat_from_euler,
    quat_inverse,
    quat_mul,
    quat_normalize,
    quat_to_rot,
    rotate,
    skew,
)

from conftest import unit_quats, vec3

IDENT = np.array([1.0, 0.0, 0.0, 0.0])


def test_rotate_identity():
    assert np.allclose(rotate(np.array([1.0, 2.0, 3.0]), IDENT), [1, 2, 3])


def test_rotate_quarter_turn_about_z():
    q = np.array([np.cos(np.pi / 4), 0.0, 0.0, np.sin(np.pi / 4)])
    assert np.allclose(rotate(np.array([1.0, 0.0, 0.0]), q), [0, 1, 0], atol=1e-12)


@given(unit_quats(), vec3())
@settings(max_examples=1000, deadline=None)
def test_rotate_inverse_composition(q, v):
    back = rotate(rotate(v, q), quat_inverse(q))
    assert np.allclose(back, v, atol=1e-9)


@given(unit_quats(), vec3())
@settings(max_examples=1000, deadline=None)
def test_rotate_preserves_norm(q, v):
    assert abs(np.linalg.norm(rotate(v, q)) - np.linalg.norm(v)) < 1e-9


def test_quat_mul_identity_element():
    b = quat_normalize(np.array([0.3, -0.5, 0.7, 0.2]))
    assert np.allclose(quat_mul(IDENT, b), b)


def test_quat_mul_i_squared():
    i = np.array([0.0, 1.0, 0.0, 0.0])
    assert np.allclose(quat_mul(i, i), [-1, 0, 0, 0])


@given(unit_quats(), unit_quats())
@settings(max_examples=1000, deadline=None)
def test_quat_mul_group_cancellation(b, c):
    a = quat_mul(quat_inverse(b), c)
    assert np.allclose(quat_mul(b, a), c, atol=1e-12)


@given(unit_quats(), unit_quats(), unit_quats())
@settings(max_examples=1000, deadline=None)
def test_quat_mul_associative(a, b, c):
    left = quat_mul(quat_mul(a, b), c)
    right = quat_mul(a, quat_mul(b, c))
    assert np.allclose(left, right, atol=1e-12)


def test_quat_error_identity_case():
    q = quat_normalize(np.array([0.9, 0.1, -0.3, 0.2]))
    assert np.allclose(quat_error(q, q), 0.0)


def test_quat_error_axis_angle_form():
    theta = 0.8
    q = quat_from_axis_angle(np.array([1.0, 0.0, 0.0]), theta)
    err = quat_error(q, IDENT)
    assert np.allclose(err, [np.sin(theta / 2), 0, 0], atol=1e-12)


@given(unit_quats(), unit_quats())
@settings(max_examples=1000, deadline=None)
def test_quat_error_magnitude_is_half_angle_sine(q, q_ref):
    # independent oracle: geodesic angle from the inner product
    dot = abs(float(np.dot(q, q_ref)))
    angle = 2.0 * np.arccos(min(dot, 1.0))
    err = quat_error(q, q_ref)
    assert abs(np.linalg.norm(err) - np.sin(angle / 2.0)) < 1e-7


@given(unit_quats(), unit_quats())
@settings(max_examples=1000, deadline=None)
def test_quat_error_double_cover(q, q_ref):
    assert np.allclose(quat_error(-q, q_ref), quat_error(q, q_ref), atol=1e-12)


def test_skew_zero():
    assert np.array_equal(skew(np.zeros(3)), np.zeros((3, 3)))


def test_skew_unit_axes():
    assert np.allclose(skew(np.array([1.0, 0, 0])) @ np.array([0.0, 1, 0]), [0, 0, 1])


@given(vec3(), vec3())
@settings(max_examples=500, deadline=None)
def test_skew_matches_cross(v, u):
    assert np.allclose(skew(v) @ u, np.cross(v, u), atol=1e-9)
    assert np.allclose(skew(v).T, -skew(v))


@given(vec3(), vec3())
@settings(max_examples=500, deadline=None)
def test_cross_matches_numpy(a, b):
    assert np.allclose(cross(a, b), np.cross(a, b))


@given(unit_quats(), vec3())
@settings(max_examples=500, deadline=None)
def test_rotation_matrix_matches_sandwich(q, v):
    assert np.allclose(quat_to_rot(q) @ v, rotate(v, q), atol=1e-9)


def test_quat_from_euler_yaw_only():
    q = quat_from_euler(0.0, 0.0, np.pi / 2)
    assert np.allclose(rotate(np.array([1.0, 0, 0]), q), [0, 1, 0], atol=1e-12)


def test_normalize_canonical_flips_sign():
    q = np.array([-2.0, 0.0, 0.0, 0.0])
    out = quat_normalize(q, canonical=True)
    assert np.allclose(out, IDENT)

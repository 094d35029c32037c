import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flywheel_ocs.so3 import (
    Quaternion,
    attitude_error,
    inertia_tensor,
    integrate_attitude,
    quat_multiply,
    rotate_world_from_body,
    rotation_distance,
    unwrap_rpy,
)

finite = st.floats(-1.0, 1.0, allow_nan=False)
quats = st.tuples(finite, finite, finite, finite).filter(lambda t: sum(c * c for c in t) > 1e-3).map(
    Quaternion.from_array
)
vecs = st.tuples(*(st.floats(-10.0, 10.0, allow_nan=False),) * 3).map(np.array)


def axis_angle_matrix(axis, angle):
    # Rodrigues, independent of the quaternion code
    k = np.asarray(axis, float) / np.linalg.norm(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def matrix_from_quaternion(q):
    w, x, y, z = q.as_array()
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def same_rotation(a, b, tol=1e-12):
    return rotation_distance(a, b) < tol or np.allclose(a.as_array(), -b.as_array(), atol=tol) or np.allclose(
        a.as_array(), b.as_array(), atol=tol
    )


class TestQuaternion:
    def test_construction_normalizes(self):
        q = Quaternion(2.0, 0.0, 0.0, 0.0)
        assert q.as_array().tolist() == [1.0, 0.0, 0.0, 0.0]

    @pytest.mark.parametrize("bad", [(0, 0, 0, 0), (math.nan, 0, 0, 1), (math.inf, 0, 0, 0)])
    def test_rejects_degenerate(self, bad):
        with pytest.raises(ValueError):
            Quaternion(*bad)

    @given(quats)
    def test_unit_norm(self, q):
        assert q.norm_error() <= 1e-9


class TestMultiply:
    @given(quats)
    def test_identity_left(self, q):
        assert np.allclose(quat_multiply(Quaternion.identity(), q).as_array(), q.as_array(), atol=1e-15)

    @given(quats)
    def test_inverse(self, q):
        assert np.allclose(quat_multiply(q, q.conj()).as_array(), [1, 0, 0, 0], atol=1e-12)

    def test_two_quarter_turns_about_z(self):
        qz = Quaternion.from_axis_angle([0, 0, 1], math.pi / 2)
        got = quat_multiply(qz, qz)
        expected = axis_angle_matrix([0, 0, 1], math.pi / 2) @ axis_angle_matrix([0, 0, 1], math.pi / 2)
        assert np.allclose(matrix_from_quaternion(got), expected, atol=1e-12)
        assert same_rotation(got, Quaternion.from_axis_angle([0, 0, 1], math.pi))

    @given(quats, quats)
    def test_composition_matches_matrices(self, a, b):
        got = matrix_from_quaternion(quat_multiply(a, b))
        assert np.allclose(got, matrix_from_quaternion(a) @ matrix_from_quaternion(b), atol=1e-12)


class TestRotate:
    def test_identity(self):
        assert rotate_world_from_body(Quaternion.identity(), [1, 2, 3]).tolist() == [1, 2, 3]

    def test_quarter_turn_about_z(self):
        v = rotate_world_from_body(Quaternion.from_axis_angle([0, 0, 1], math.pi / 2), [1, 0, 0])
        assert np.allclose(v, [0, 1, 0], atol=1e-15)

    @given(quats, vecs)
    def test_matches_matrix_product(self, q, v):
        assert np.allclose(rotate_world_from_body(q, v), matrix_from_quaternion(q) @ v, atol=1e-12)

    @given(quats, vecs)
    def test_isometry(self, q, v):
        assert abs(np.linalg.norm(rotate_world_from_body(q, v)) - np.linalg.norm(v)) <= 1e-12 * max(
            1.0, np.linalg.norm(v)
        )

    def test_body_to_world_convention(self):
        # a 30 deg nose-down pitch (positive about y) sends body x below the horizon
        q = Quaternion.from_rpy(0.0, math.radians(30), 0.0)
        x_world = rotate_world_from_body(q, [1, 0, 0])
        assert x_world[2] == pytest.approx(-0.5, abs=1e-15)


class TestIntegrate:
    def test_zero_rate(self):
        q = Quaternion.from_rpy(0.1, 0.2, 0.3)
        assert integrate_attitude(q, [0, 0, 0], 0.7) == q

    def test_half_turn_pitch(self):
        q = integrate_attitude(Quaternion.identity(), [0, math.pi, 0], 1.0)
        assert same_rotation(q, Quaternion.from_axis_angle([0, 1, 0], math.pi))

    def test_rejects_non_positive_dt(self):
        with pytest.raises(ValueError):
            integrate_attitude(Quaternion.identity(), [1, 0, 0], 0.0)

    @settings(max_examples=25)
    @given(quats, vecs, st.integers(1, 200))
    def test_subdivision_invariant(self, q, omega, n):
        T = 0.5
        one = integrate_attitude(q, omega, T)
        many = q
        for _ in range(n):
            many = integrate_attitude(many, omega, T / n)
        assert rotation_distance(one, many) <= 1e-9

    def test_matches_closed_form(self):
        omega = np.array([0.3, -1.2, 0.7])
        q0 = Quaternion.from_rpy(0.2, -0.4, 1.0)
        T = 2.0
        q = q0
        for _ in range(1000):
            q = integrate_attitude(q, omega, T / 1000)
        R = matrix_from_quaternion(q0) @ axis_angle_matrix(omega, np.linalg.norm(omega) * T)
        assert np.allclose(matrix_from_quaternion(q), R, atol=1e-9)

    def test_norm_after_million_operations(self):
        rng = np.random.default_rng(3)
        q = Quaternion.from_rpy(*rng.uniform(-3, 3, 3))
        dq = Quaternion.from_rpy(*rng.uniform(-0.1, 0.1, 3))
        omega = rng.normal(size=3)
        for k in range(500_000):
            q = quat_multiply(q, dq)
            q = integrate_attitude(q, omega, 1e-3)
        assert q.norm_error() <= 1e-9


class TestAttitudeError:
    @given(quats)
    def test_zero_for_same_attitude(self, q):
        assert np.allclose(attitude_error(q, q), 0.0, atol=1e-12)

    def test_single_axis_pitch(self):
        e = attitude_error(Quaternion.from_rpy(0, math.radians(30), 0), Quaternion.identity())
        assert np.allclose(e, [0, 0.5235987755982988, 0], atol=1e-15)

    @given(quats, quats)
    def test_double_cover(self, q_des, q):
        assert np.allclose(attitude_error(q_des, -q), attitude_error(q_des, q), atol=1e-12)
        assert np.allclose(attitude_error(-q_des, q), attitude_error(q_des, q), atol=1e-12)

    @given(quats, quats)
    def test_rotates_onto_target(self, q_des, q):
        e = attitude_error(q_des, q)
        assert np.linalg.norm(e) <= math.pi + 1e-12
        assert rotation_distance(integrate_attitude(q, e, 1.0), q_des) < 1e-7 if np.any(e) else True
        assert np.linalg.norm(e) == pytest.approx(rotation_distance(q_des, q), abs=1e-7)

    def test_zero_iff_same_rotation(self):
        q = Quaternion.from_rpy(0.3, 0.2, -0.1)
        assert np.linalg.norm(attitude_error(q, -q)) <= 1e-15
        assert rotation_distance(q, -q) <= 1e-15
        near = Quaternion.from_rpy(0.3, 0.2, -0.1 + 1e-6)
        assert np.linalg.norm(attitude_error(q, near)) == pytest.approx(rotation_distance(q, near), rel=1e-6)

    def test_half_turn_tie_break(self):
        e = attitude_error(Quaternion.from_axis_angle([0, -1, 0], math.pi), Quaternion.identity())
        assert np.allclose(e, [0, math.pi, 0], atol=1e-12)


class TestUnwrap:
    def test_full_pitch_flip_is_continuous(self):
        angles = np.linspace(0, 2 * math.pi, 721)
        qs = np.array([Quaternion.from_axis_angle([0, 1, 0], a).as_array() for a in angles])
        rpy = unwrap_rpy(qs)
        assert np.allclose(rpy[:, 1], angles, atol=1e-9)
        assert np.allclose(rpy[:, [0, 2]], 0.0, atol=1e-9)

    def test_roundtrip_rpy(self):
        q = Quaternion.from_rpy(0.1, -0.2, 0.3)
        assert np.allclose(q.to_rpy(), [0.1, -0.2, 0.3], atol=1e-15)


class TestInertiaTensor:
    def test_principal_values(self):
        assert np.array_equal(inertia_tensor([1, 2, 3]), np.diag([1.0, 2.0, 3.0]))

    @pytest.mark.parametrize(
        "bad",
        [[1, 2, -3], [[1, 0.1, 0], [0, 1, 0], [0, 0, 1]], [1, 2], [1, math.nan, 1], [[1, 2, 0], [2, 1, 0], [0, 0, 1]]],
    )
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            inertia_tensor(bad)

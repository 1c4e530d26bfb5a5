import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from posecast import (
    InvalidInputError,
    canonicalize_expmap,
    euler_to_rotmat,
    expmap_frames_to_euler,
    expmap_to_quat,
    quat_conjugate,
    quat_multiply,
    quat_rotate_vector,
    quat_to_expmap,
    quat_to_rotmat,
    rotmat_to_euler,
    rotmat_to_quat,
)

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


class TestExpMap:
    def test_zero_vector_is_identity(self):
        assert np.array_equal(expmap_to_quat([0.0, 0.0, 0.0]), IDENTITY)

    def test_half_turn_about_x(self):
        q = expmap_to_quat([np.pi, 0.0, 0.0])
        assert np.allclose(q, [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_quarter_turn_about_y(self):
        q = expmap_to_quat([0.0, np.pi / 2.0, 0.0])
        assert np.allclose(q, [0.0, np.sqrt(2) / 2, 0.0, np.sqrt(2) / 2], atol=1e-12)

    def test_unit_norm_output(self, rng):
        v = rng.normal(scale=2.0, size=(500, 3))
        q = expmap_to_quat(v)
        assert np.allclose(np.linalg.norm(q, axis=-1), 1.0, atol=1e-12)
        assert np.all(q[:, 3] >= 0.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            expmap_to_quat([np.nan, 0.0, 0.0])

    def test_matches_scipy_rotvec(self, rng):
        v = rng.normal(size=(200, 3))
        R_mine = quat_to_rotmat(expmap_to_quat(v))
        R_scipy = Rotation.from_rotvec(v).as_matrix()
        assert np.allclose(R_mine, R_scipy, atol=1e-12)


class TestQuatToExpMap:
    def test_identity(self):
        assert np.allclose(quat_to_expmap(IDENTITY), 0.0)

    def test_half_turn(self):
        assert np.allclose(quat_to_expmap([1.0, 0.0, 0.0, 0.0]), [np.pi, 0.0, 0.0])

    def test_antipodal_identity(self):
        assert np.allclose(quat_to_expmap([0.0, 0.0, 0.0, -1.0]), 0.0)

    def test_zero_norm_rejected(self):
        with pytest.raises(InvalidInputError):
            quat_to_expmap([0.0, 0.0, 0.0, 0.0])

    def test_non_unit_rejected(self):
        with pytest.raises(InvalidInputError):
            quat_to_expmap([0.0, 0.0, 0.0, 1.01])

    def test_round_trip_1000_random_quats(self, random_unit_quat):
        gen = np.random.default_rng(7)
        for _ in range(1000):
            q = random_unit_quat(gen)
            back = expmap_to_quat(quat_to_expmap(q))
            assert min(
                np.abs(back - q).max(), np.abs(back + q).max()
            ) < 1e-9

    def test_canonical_magnitude(self, random_unit_quat):
        gen = np.random.default_rng(8)
        for _ in range(200):
            v = quat_to_expmap(random_unit_quat(gen))
            assert 0.0 <= np.linalg.norm(v) <= np.pi + 1e-12


class TestCanonicalizeExpmap:
    def test_within_range_unchanged(self):
        v = np.array([0.1, -0.2, 0.3])
        assert np.allclose(canonicalize_expmap(v), v)

    def test_large_angle_reduced(self):
        v = np.array([3.0 * np.pi / 2.0, 0.0, 0.0])
        out = canonicalize_expmap(v)
        assert np.allclose(out, [-np.pi / 2.0, 0.0, 0.0])
        # same rotation
        assert np.allclose(quat_to_rotmat(expmap_to_quat(v)), quat_to_rotmat(expmap_to_quat(out)))


class TestQuatMultiply:
    def test_identity_element(self, random_unit_quat):
        gen = np.random.default_rng(9)
        q = random_unit_quat(gen)
        assert np.allclose(quat_multiply(q, IDENTITY), q)
        assert np.allclose(quat_multiply(IDENTITY, q), q)

    def test_i_squared_is_minus_one(self):
        q = quat_multiply([1.0, 0, 0, 0], [1.0, 0, 0, 0])
        assert np.allclose(q, [0.0, 0.0, 0.0, -1.0])

    def test_agrees_with_rotation_matrix_product(self, random_unit_quat):
        gen = np.random.default_rng(10)
        for _ in range(300):
            q1, q2 = random_unit_quat(gen), random_unit_quat(gen)
            left = quat_to_rotmat(quat_multiply(q1, q2))
            right = quat_to_rotmat(q1) @ quat_to_rotmat(q2)
            assert np.abs(left - right).max() < 1e-9

    def test_associative(self, random_unit_quat):
        gen = np.random.default_rng(11)
        for _ in range(100):
            a, b, c = (random_unit_quat(gen) for _ in range(3))
            lhs = quat_multiply(quat_multiply(a, b), c)
            rhs = quat_multiply(a, quat_multiply(b, c))
            assert np.allclose(lhs, rhs, atol=1e-12)


class TestConjugate:
    def test_identity(self):
        assert np.array_equal(quat_conjugate(IDENTITY), IDENTITY)

    def test_negates_vector_part(self):
        assert np.array_equal(quat_conjugate([1.0, 0, 0, 0]), [-1.0, 0, 0, 0])

    def test_q_times_conjugate_is_identity(self, random_unit_quat):
        gen = np.random.default_rng(12)
        for _ in range(100):
            q = random_unit_quat(gen)
            assert np.allclose(quat_multiply(q, quat_conjugate(q)), IDENTITY, atol=1e-12)


class TestRotateVector:
    def test_identity_rotation(self, rng):
        x = rng.normal(size=3)
        assert np.array_equal(quat_rotate_vector(IDENTITY, x), x)

    def test_half_turn_about_z(self):
        out = quat_rotate_vector([0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0])
        assert np.allclose(out, [-1.0, 0.0, 0.0], atol=1e-12)

    def test_matches_rotation_matrix(self, random_unit_quat, rng):
        gen = np.random.default_rng(13)
        for _ in range(200):
            q = random_unit_quat(gen)
            x = gen.normal(size=3)
            assert np.allclose(quat_rotate_vector(q, x), quat_to_rotmat(q) @ x, atol=1e-12)

    def test_preserves_norms_and_angles(self, random_unit_quat):
        gen = np.random.default_rng(14)
        q = random_unit_quat(gen)
        x, y = gen.normal(size=3), gen.normal(size=3)
        rx, ry = quat_rotate_vector(q, x), quat_rotate_vector(q, y)
        assert abs(np.linalg.norm(rx) - np.linalg.norm(x)) < 1e-9
        assert abs(rx @ ry - x @ y) < 1e-9

    def test_requires_unit_quaternion(self):
        with pytest.raises(InvalidInputError):
            quat_rotate_vector([0.0, 0.0, 0.0, 2.0], [1.0, 0.0, 0.0])


class TestRotmatEuler:
    def test_identity_matrix(self):
        assert np.allclose(rotmat_to_euler(np.eye(3)), 0.0)

    def test_single_axis_round_trip(self):
        e = np.array([np.pi / 2.0, 0.0, 0.0])
        assert np.allclose(rotmat_to_euler(euler_to_rotmat(e)), e, atol=1e-12)

    def test_random_round_trip(self, random_unit_quat):
        gen = np.random.default_rng(15)
        for _ in range(300):
            R = quat_to_rotmat(random_unit_quat(gen))
            e = rotmat_to_euler(R)
            assert np.abs(euler_to_rotmat(e) - R).max() < 1e-9

    def test_euler_round_trip_away_from_lock(self, rng):
        for _ in range(300):
            e = np.array(
                [
                    rng.uniform(-np.pi, np.pi),
                    rng.uniform(-1.4, 1.4),
                    rng.uniform(-np.pi, np.pi),
                ]
            )
            assert np.abs(rotmat_to_euler(euler_to_rotmat(e)) - e).max() < 1e-9

    def test_gimbal_lock_branch(self):
        e = np.array([0.7, np.pi / 2.0, -0.4])
        R = euler_to_rotmat(e)
        out = rotmat_to_euler(R)
        assert out[2] == 0.0
        assert np.isclose(abs(out[1]), np.pi / 2.0)
        # freedom folded into the first angle: same rotation reproduced
        assert np.abs(euler_to_rotmat(out) - R).max() < 1e-9

    def test_angles_in_range(self, random_unit_quat):
        gen = np.random.default_rng(16)
        for _ in range(200):
            e = rotmat_to_euler(quat_to_rotmat(random_unit_quat(gen)))
            assert np.all(e > -np.pi) and np.all(e <= np.pi)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(InvalidInputError):
            rotmat_to_euler(np.eye(3) * 1.1)

    def test_reflection_rejected(self):
        R = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(InvalidInputError):
            rotmat_to_euler(R)


class TestRotmatQuat:
    def test_against_scipy(self, random_unit_quat):
        gen = np.random.default_rng(17)
        for _ in range(200):
            q = random_unit_quat(gen)
            q = q if q[3] >= 0 else -q
            R = Rotation.from_quat(q).as_matrix()
            assert np.abs(rotmat_to_quat(R) - q).max() < 1e-9

    def test_round_trip(self, random_unit_quat):
        gen = np.random.default_rng(18)
        for _ in range(200):
            q = random_unit_quat(gen)
            q = q if q[3] >= 0 else -q
            assert np.abs(rotmat_to_quat(quat_to_rotmat(q)) - q).max() < 1e-9


class TestBatchedFrames:
    def test_expmap_frames_to_euler_shape(self, rng):
        frames = rng.normal(scale=0.5, size=(20, 9))
        euler = expmap_frames_to_euler(frames)
        assert euler.shape == frames.shape
        one = rotmat_to_euler(quat_to_rotmat(expmap_to_quat(frames[3, 3:6])))
        assert np.allclose(euler[3, 3:6], one)

    def test_rejects_non_triple_dims(self, rng):
        with pytest.raises(InvalidInputError):
            expmap_frames_to_euler(rng.normal(size=(5, 4)))


@settings(max_examples=150, deadline=None)
@given(st.tuples(*[st.floats(-1e3, 1e3) for _ in range(4)]))
def test_expmap_quat_double_cover_property(parts):
    q = np.asarray(parts)
    n = np.linalg.norm(q)
    if n < 1e-3:
        return
    q = q / n
    back = expmap_to_quat(quat_to_expmap(q))
    assert min(np.abs(back - q).max(), np.abs(back + q).max()) < 1e-9

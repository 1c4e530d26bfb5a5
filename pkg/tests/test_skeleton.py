import numpy as np
import pytest

from posecast import (
    DegenerateInputError,
    InvalidInputError,
    PoseSequence,
    Skeleton,
    center_and_normalize,
    expmap_to_quat,
    forward_kinematics,
)

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


def identity_rotations(skel):
    return np.tile(IDENTITY, (skel.n_joints, 1))


class TestSkeletonValidation:
    def test_valid(self, simple_skeleton):
        assert simple_skeleton.n_joints == 5
        assert np.allclose(simple_skeleton.limb_lengths[1], 10.0)

    def test_second_root_rejected(self):
        with pytest.raises(InvalidInputError):
            Skeleton(names=["a", "b"], parents=[-1, -1], offsets=[[0, 0, 0], [1, 0, 0]])

    def test_forward_parent_rejected(self):
        with pytest.raises(InvalidInputError):
            Skeleton(names=["a", "b"], parents=[-1, 1], offsets=[[0, 0, 0], [1, 0, 0]])

    def test_zero_offset_rejected(self):
        with pytest.raises(InvalidInputError):
            Skeleton(names=["a", "b"], parents=[-1, 0], offsets=[[0, 0, 0], [0, 0, 0]])

    def test_non_finite_offset_rejected(self):
        with pytest.raises(InvalidInputError):
            Skeleton(names=["a", "b"], parents=[-1, 0], offsets=[[0, 0, 0], [np.inf, 0, 0]])

    def test_json_round_trip(self, simple_skeleton, tmp_path):
        path = tmp_path / "skel.json"
        simple_skeleton.save(path)
        loaded = Skeleton.load(path)
        assert loaded.names == simple_skeleton.names
        assert np.array_equal(loaded.parents, simple_skeleton.parents)
        assert np.array_equal(loaded.offsets, simple_skeleton.offsets)


class TestForwardKinematics:
    def test_identity_reproduces_rest_offsets_exactly(self, simple_skeleton):
        pos = forward_kinematics(simple_skeleton, identity_rotations(simple_skeleton))
        assert np.array_equal(pos, simple_skeleton.rest_positions())

    def test_two_joint_chain_half_turn(self):
        skel = Skeleton(names=["root", "tip"], parents=[-1, 0], offsets=[[0, 0, 0], [0, 10.0, 0]])
        rot = np.stack([expmap_to_quat([0, 0, np.pi]), IDENTITY])
        pos = forward_kinematics(skel, rot)
        assert np.allclose(pos[1], [0.0, -10.0, 0.0], atol=1e-9)

    def test_root_rotation_ignored_when_fixed(self):
        skel = Skeleton(names=["root", "tip"], parents=[-1, 0], offsets=[[0, 0, 0], [0, 10.0, 0]])
        rot = np.stack([expmap_to_quat([0, 0, np.pi]), IDENTITY])
        pos = forward_kinematics(skel, rot, root_fixed=True)
        assert np.array_equal(pos, skel.rest_positions())

    def test_mid_chain_rotation_moves_descendants(self, simple_skeleton):
        # quarter turn about z at the thigh swings the shin offset (0,-12,0) to (12,0,0)
        rot = identity_rotations(simple_skeleton)
        rot[3] = expmap_to_quat([0, 0, np.pi / 2.0])
        pos = forward_kinematics(simple_skeleton, rot)
        thigh = simple_skeleton.rest_positions()[3]
        assert np.allclose(pos[3], thigh, atol=1e-12)
        assert np.allclose(pos[4], thigh + np.array([12.0, 0.0, 0.0]), atol=1e-9)

    def test_rotation_count_mismatch(self, simple_skeleton):
        with pytest.raises(InvalidInputError):
            forward_kinematics(simple_skeleton, np.tile(IDENTITY, (3, 1)))


def rest_pose_sequence(skel, frames=4):
    flat = skel.rest_positions().reshape(-1)
    return PoseSequence(
        frames=np.tile(flat, (frames, 1)),
        representation="positions_cm",
        fps=25.0,
        subject_id="s1",
    )


class TestCenterAndNormalize:
    def test_standard_sequence_unchanged(self, simple_skeleton):
        seq = rest_pose_sequence(simple_skeleton)
        out = center_and_normalize(seq, simple_skeleton)
        assert np.array_equal(out.frames, seq.frames)

    def test_translation_removed(self, simple_skeleton):
        seq = rest_pose_sequence(simple_skeleton)
        shifted = seq.with_frames(seq.frames + np.tile([5.0, 5.0, 5.0], simple_skeleton.n_joints))
        out = center_and_normalize(shifted, simple_skeleton)
        base = center_and_normalize(seq, simple_skeleton)
        assert np.allclose(out.frames, base.frames, atol=1e-12)

    def test_root_exactly_zero(self, simple_skeleton, rng):
        frames = rng.normal(scale=20.0, size=(6, simple_skeleton.n_joints * 3))
        seq = PoseSequence(frames, "positions_cm", 25.0)
        out = center_and_normalize(seq, simple_skeleton)
        assert np.array_equal(out.joint_blocks()[:, 0, :], np.zeros((6, 3)))

    def test_scaled_limbs_restandardized(self, simple_skeleton):
        seq = rest_pose_sequence(simple_skeleton)
        doubled = seq.with_frames(seq.frames * 2.0)
        out = center_and_normalize(doubled, simple_skeleton)
        blocks = out.joint_blocks()
        for j in range(1, simple_skeleton.n_joints):
            p = simple_skeleton.parents[j]
            lengths = np.linalg.norm(blocks[:, j] - blocks[:, p], axis=1)
            assert np.allclose(lengths, simple_skeleton.limb_lengths[j], atol=1e-6)

    def test_idempotent(self, simple_skeleton, rng):
        frames = rng.normal(scale=20.0, size=(5, simple_skeleton.n_joints * 3))
        seq = PoseSequence(frames, "positions_cm", 25.0)
        once = center_and_normalize(seq, simple_skeleton)
        twice = center_and_normalize(once, simple_skeleton)
        assert np.abs(twice.frames - once.frames).max() < 1e-9

    def test_zero_length_limb_rejected(self, simple_skeleton):
        frames = np.zeros((3, simple_skeleton.n_joints * 3))
        seq = PoseSequence(frames, "positions_cm", 25.0)
        with pytest.raises(DegenerateInputError):
            center_and_normalize(seq, simple_skeleton)

    def test_requires_positions(self, simple_skeleton, rng):
        seq = PoseSequence(rng.normal(size=(3, 15)), "expmap", 25.0)
        with pytest.raises(InvalidInputError):
            center_and_normalize(seq, simple_skeleton)

    def test_dim_mismatch_rejected(self, simple_skeleton, rng):
        seq = PoseSequence(rng.normal(size=(3, 9)), "positions_cm", 25.0)
        with pytest.raises(InvalidInputError):
            center_and_normalize(seq, simple_skeleton)

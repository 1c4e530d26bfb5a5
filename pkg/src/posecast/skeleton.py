"""Skeleton tree, forward kinematics, and pose standardization."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidInputError, SchemaError
from .rotations import quat_identity, quat_multiply, quat_rotate_vector
from .sequence import REPR_POSITIONS, PoseSequence

ROOT = -1


@dataclass
class Skeleton:
    """Joint tree: per-joint name, parent index (-1 = root), rest offset in cm.

    Joints are topologically ordered (parent index of joint j is < j), so
    joint 0 is the single root.
    """

    names: list[str]
    parents: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.parents = np.asarray(self.parents, dtype=int)
        self.offsets = np.asarray(self.offsets, dtype=float)
        n = len(self.names)
        if self.parents.shape != (n,) or self.offsets.shape != (n, 3):
            raise InvalidInputError("names, parents and offsets must agree in length")
        if n == 0:
            raise InvalidInputError("skeleton has no joints")
        if self.parents[0] != ROOT:
            raise InvalidInputError("joint 0 must be the root (parent -1)")
        for j in range(1, n):
            if not 0 <= self.parents[j] < j:
                raise InvalidInputError(
                    f"joint {j} ({self.names[j]!r}) has parent {self.parents[j]}; "
                    "joints must be topologically ordered with exactly one root"
                )
        if not np.all(np.isfinite(self.offsets)):
            raise InvalidInputError("offsets contain non-finite values")
        lengths = np.linalg.norm(self.offsets[1:], axis=1)
        if np.any(lengths == 0.0):
            bad = self.names[1 + int(np.argmin(lengths))]
            raise InvalidInputError(f"non-root joint {bad!r} has a zero offset")

    @property
    def n_joints(self) -> int:
        return len(self.names)

    @property
    def limb_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.offsets, axis=1)

    def rest_positions(self) -> np.ndarray:
        """Joint positions with all local rotations at identity."""
        pos = np.zeros((self.n_joints, 3))
        for j in range(1, self.n_joints):
            pos[j] = pos[self.parents[j]] + self.offsets[j]
        return pos

    def to_dict(self) -> dict:
        return {
            "joints": [
                {
                    "name": self.names[j],
                    "parent": int(self.parents[j]),
                    "offset": [float(c) for c in self.offsets[j]],
                }
                for j in range(self.n_joints)
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Skeleton":
        try:
            joints = data["joints"]
            names = [j["name"] for j in joints]
            parents = [j["parent"] for j in joints]
            offsets = [j["offset"] for j in joints]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed skeleton description: {exc}") from exc
        return cls(names=names, parents=parents, offsets=offsets)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Skeleton":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def forward_kinematics(skel: Skeleton, local_rotations, root_fixed: bool = False) -> np.ndarray:
    """Joint positions (cm) from per-joint local rotation quaternions.

    The root sits at the origin; each joint's offset is rotated by the
    accumulated rotation of its parent chain.  With ``root_fixed`` the
    root's local rotation is pinned to identity, matching the benchmark
    convention of a hip-centered global frame.
    """
    rot = np.asarray(local_rotations, dtype=float)
    if rot.shape != (skel.n_joints, 4):
        raise InvalidInputError(
            f"expected {skel.n_joints} quaternions, got array of shape {rot.shape}"
        )
    acc = np.empty((skel.n_joints, 4))
    pos = np.zeros((skel.n_joints, 3))
    acc[0] = quat_identity() if root_fixed else rot[0]
    for j in range(1, skel.n_joints):
        p = skel.parents[j]
        pos[j] = pos[p] + quat_rotate_vector(acc[p], skel.offsets[j])
        acc[j] = quat_multiply(acc[p], rot[j])
    return pos


def center_and_normalize(seq: PoseSequence, skel: Skeleton) -> PoseSequence:
    """Zero the root joint in every frame and rescale limbs to the
    standardized skeleton's lengths, preserving limb directions."""
    if seq.representation != REPR_POSITIONS:
        raise InvalidInputError("center_and_normalize requires positional data")
    if seq.n_dims != 3 * skel.n_joints:
        raise InvalidInputError(
            f"sequence has {seq.n_dims} dims but skeleton implies {3 * skel.n_joints}"
        )
    P = seq.joint_blocks().copy()
    P -= P[:, [0], :]
    std = skel.limb_lengths
    out = np.zeros_like(P)
    for j in range(1, skel.n_joints):
        p = skel.parents[j]
        u = P[:, j] - P[:, p]
        lengths = np.linalg.norm(u, axis=1)
        if np.any(lengths < 1e-12):
            frame = int(np.argmin(lengths))
            raise DegenerateInputError(
                f"zero-length limb to joint {skel.names[j]!r} at frame {frame}"
            )
        out[:, j] = out[:, p] + u * (std[j] / lengths)[:, None]
    return seq.with_frames(out.reshape(seq.n_frames, seq.n_dims))

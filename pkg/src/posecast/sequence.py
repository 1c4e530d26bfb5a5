"""Pose time series.

A sequence is a ``T x D`` float matrix plus metadata.  For positional data
``D = 3K`` (x, y, z per joint, in cm, joint-major, skeleton order); for
angle data ``D = 3L`` concatenated exponential-map triples in radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError

REPR_POSITIONS = "positions_cm"
REPR_EXPMAP = "expmap"
REPRESENTATIONS = (REPR_POSITIONS, REPR_EXPMAP)

EULER_ORDER = "ZXY"  # intrinsic; recorded in sidecar metadata


@dataclass
class PoseSequence:
    frames: np.ndarray
    representation: str
    fps: float
    subject_id: str = ""
    action: str = ""
    dim_labels: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise InvalidInputError(
                f"frames must be a T x D matrix with T >= 1, got shape {self.frames.shape}"
            )
        if not np.all(np.isfinite(self.frames)):
            raise InvalidInputError("frames contain non-finite values")
        if self.representation not in REPRESENTATIONS:
            raise InvalidInputError(
                f"unknown representation {self.representation!r}; expected one of {REPRESENTATIONS}"
            )
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise InvalidInputError(f"fps must be positive, got {self.fps}")
        if not self.dim_labels:
            self.dim_labels = [f"d{i}" for i in range(self.frames.shape[1])]
        elif len(self.dim_labels) != self.frames.shape[1]:
            raise InvalidInputError(
                f"{len(self.dim_labels)} dim labels for {self.frames.shape[1]} dims"
            )

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_dims(self) -> int:
        return self.frames.shape[1]

    def joint_blocks(self) -> np.ndarray:
        """View frames as ``(T, D/3, 3)`` triples (joints or angle triples)."""
        if self.n_dims % 3 != 0:
            raise InvalidInputError(f"D={self.n_dims} is not a multiple of 3")
        return self.frames.reshape(self.n_frames, self.n_dims // 3, 3)

    def with_frames(self, frames) -> "PoseSequence":
        return replace(self, frames=np.asarray(frames, dtype=float))

    def is_angular(self) -> bool:
        return self.representation == REPR_EXPMAP


def unwrap_angles(series: np.ndarray) -> np.ndarray:
    """Make angle series continuous across the +-pi seam (columnwise)."""
    series = np.asarray(series, dtype=float)
    return np.unwrap(series, axis=0)


def fitting_view(seq: PoseSequence) -> np.ndarray:
    """Frames prepared for AR fitting: angle data unwrapped, positions as-is."""
    if seq.is_angular():
        return unwrap_angles(seq.frames)
    return seq.frames

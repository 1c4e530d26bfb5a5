"""Rotation algebra for articulated poses.

Conventions used throughout the package:

* Quaternions are ndarrays ``[x, y, z, w]`` (vector part first, scalar
  last), Hamilton product, acting on column vectors as ``y = q x q*``.
  The identity rotation is ``(0, 0, 0, 1)``.
* Exponential-map vectors are 3-vectors in radians: rotation axis scaled
  by the rotation angle.  The canonical representative has magnitude in
  ``[0, pi]``.
* Rotation matrices are 3x3, orthonormal, determinant +1.
* Euler triples ``(a, b, c)`` use the intrinsic Z-X-Y order, i.e.
  ``R = Rz(a) @ Rx(b) @ Ry(c)``, each angle in ``(-pi, pi]``.

All functions broadcast over leading axes, so ``(T, L, 3)`` stacks of
exponential maps convert in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

UNIT_TOL = 1e-6
ORTHO_TOL = 1e-6
_LOCK_EPS = 1e-10


def quat_identity() -> np.ndarray:
    return np.array([0.0, 0.0, 0.0, 1.0])


def _as_float(a, name: str, last_dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-1:] != (last_dim,):
        raise InvalidInputError(f"{name} must have {last_dim} components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return a


def _require_unit(q: np.ndarray, tol: float = UNIT_TOL) -> None:
    norms = np.linalg.norm(q, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        raise InvalidInputError("quaternion is not unit norm (within %g)" % tol)


def expmap_to_quat(v) -> np.ndarray:
    """Exponential map R^3 -> S^3.

    Returns ``[sin(|v|/2) * v/|v|, cos(|v|/2)]`` for nonzero v and the
    identity quaternion for v = 0, sign-canonicalized to w >= 0.
    """
    v = _as_float(v, "exp-map vector", 3)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    safe_n = np.where(n > 0.0, n, 1.0)
    k = np.where(n > 0.0, np.sin(n / 2.0) / safe_n, 0.5)
    q = np.concatenate([k * v, np.cos(n / 2.0)], axis=-1)
    # double-cover canonicalization: q and -q are the same rotation
    return np.where(q[..., 3:4] < 0.0, -q, q)


def quat_to_expmap(q) -> np.ndarray:
    """Inverse exponential map: rotation angle 2*acos(w) about the vector part.

    The result is the canonical representative (magnitude in [0, pi]).
    """
    q = _as_float(q, "quaternion", 4)
    if np.any(np.linalg.norm(q, axis=-1) < 0.5):
        raise InvalidInputError("zero-norm quaternion has no rotation")
    _require_unit(q)
    q = np.where(q[..., 3:4] < 0.0, -q, q)
    vec, w = q[..., :3], q[..., 3:4]
    nv = np.linalg.norm(vec, axis=-1, keepdims=True)
    theta = 2.0 * np.arctan2(nv, w)
    # theta/nv -> 2/w as nv -> 0; w ~ 1 whenever the small-nv branch is taken
    safe_w = np.where(nv > 1e-12, 1.0, w)
    scale = np.where(nv > 1e-12, theta / np.where(nv > 0.0, nv, 1.0), 2.0 / safe_w)
    return scale * vec


def canonicalize_expmap(v) -> np.ndarray:
    """Reduce an exp-map vector to magnitude in [0, pi] (axis flipped if needed)."""
    v = _as_float(v, "exp-map vector", 3)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = np.mod(n, 2.0 * np.pi)
    flip = theta > np.pi
    theta = np.where(flip, 2.0 * np.pi - theta, theta)
    axis = v / np.where(n > 0.0, n, 1.0)
    axis = np.where(flip, -axis, axis)
    return axis * theta


def quat_multiply(q1, q2) -> np.ndarray:
    """Hamilton product ``[r1 v2 + r2 v1 + v1 x v2, r1 r2 - v1 . v2]``."""
    q1 = _as_float(q1, "q1", 4)
    q2 = _as_float(q2, "q2", 4)
    v1, r1 = q1[..., :3], q1[..., 3:4]
    v2, r2 = q2[..., :3], q2[..., 3:4]
    vec = r1 * v2 + r2 * v1 + np.cross(v1, v2)
    scalar = r1 * r2 - np.sum(v1 * v2, axis=-1, keepdims=True)
    return np.concatenate([vec, scalar], axis=-1)


def quat_conjugate(q) -> np.ndarray:
    """Negate the vector part."""
    q = _as_float(q, "quaternion", 4)
    return np.concatenate([-q[..., :3], q[..., 3:4]], axis=-1)


def quat_rotate_vector(q, x) -> np.ndarray:
    """Rotate a 3-vector: the vector part of ``q [x, 0] q*``."""
    q = _as_float(q, "quaternion", 4)
    _require_unit(q)
    x = _as_float(x, "vector", 3)
    pure = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
    return quat_multiply(quat_multiply(q, pure), quat_conjugate(q))[..., :3]


def quat_to_rotmat(q) -> np.ndarray:
    """Rotation matrix R with ``R x == quat_rotate_vector(q, x)``."""
    q = _as_float(q, "quaternion", 4)
    _require_unit(q)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    x, y, z, w = (q[..., i] for i in range(4))
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    R[..., 0, 1] = 2.0 * (x * y - w * z)
    R[..., 0, 2] = 2.0 * (x * z + w * y)
    R[..., 1, 0] = 2.0 * (x * y + w * z)
    R[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    R[..., 1, 2] = 2.0 * (y * z - w * x)
    R[..., 2, 0] = 2.0 * (x * z - w * y)
    R[..., 2, 1] = 2.0 * (y * z + w * x)
    R[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return R


def _check_rotmat(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        raise InvalidInputError(f"rotation matrix must be 3x3, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidInputError("rotation matrix contains non-finite values")
    should_be_eye = R @ np.swapaxes(R, -1, -2)
    eye = np.eye(3)
    if not np.all(np.abs(should_be_eye - eye) <= ORTHO_TOL):
        raise InvalidInputError("matrix is not orthonormal (within %g)" % ORTHO_TOL)
    if not np.all(np.abs(np.linalg.det(R) - 1.0) <= ORTHO_TOL):
        raise InvalidInputError("matrix determinant is not +1 (improper rotation)")
    return R


def rotmat_to_quat(R) -> np.ndarray:
    """Rotation matrix to quaternion (Shepperd's method), w >= 0."""
    R = _check_rotmat(R)
    t = np.trace(R, axis1=-2, axis2=-1)
    m = np.stack(
        [
            1.0 + t,
            1.0 + R[..., 0, 0] - R[..., 1, 1] - R[..., 2, 2],
            1.0 + R[..., 1, 1] - R[..., 0, 0] - R[..., 2, 2],
            1.0 + R[..., 2, 2] - R[..., 0, 0] - R[..., 1, 1],
        ],
        axis=-1,
    )
    branch = np.argmax(m, axis=-1)
    s = 2.0 * np.sqrt(np.maximum(np.take_along_axis(m, branch[..., None], axis=-1), 0.0))[..., 0]

    q = np.empty(R.shape[:-2] + (4,))
    a = R[..., 2, 1] - R[..., 1, 2]
    b = R[..., 0, 2] - R[..., 2, 0]
    c = R[..., 1, 0] - R[..., 0, 1]
    d = R[..., 0, 1] + R[..., 1, 0]
    e = R[..., 0, 2] + R[..., 2, 0]
    f = R[..., 1, 2] + R[..., 2, 1]

    q[..., 0] = np.select([branch == 0, branch == 1, branch == 2], [a / s, s / 4.0, d / s], e / s)
    q[..., 1] = np.select([branch == 0, branch == 1, branch == 2], [b / s, d / s, s / 4.0], f / s)
    q[..., 2] = np.select([branch == 0, branch == 1, branch == 2], [c / s, e / s, f / s], s / 4.0)
    q[..., 3] = np.select([branch == 0, branch == 1, branch == 2], [s / 4.0, a / s, b / s], c / s)

    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(q[..., 3:4] < 0.0, -q, q)


def euler_to_rotmat(e) -> np.ndarray:
    """Intrinsic Z-X-Y Euler triple to rotation matrix."""
    e = _as_float(e, "euler triple", 3)
    sa, ca = np.sin(e[..., 0]), np.cos(e[..., 0])
    sb, cb = np.sin(e[..., 1]), np.cos(e[..., 1])
    sc, cc = np.sin(e[..., 2]), np.cos(e[..., 2])
    R = np.empty(e.shape[:-1] + (3, 3))
    R[..., 0, 0] = ca * cc - sa * sb * sc
    R[..., 0, 1] = -sa * cb
    R[..., 0, 2] = ca * sc + sa * sb * cc
    R[..., 1, 0] = sa * cc + ca * sb * sc
    R[..., 1, 1] = ca * cb
    R[..., 1, 2] = sa * sc - ca * sb * cc
    R[..., 2, 0] = -cb * sc
    R[..., 2, 1] = sb
    R[..., 2, 2] = cb * cc
    return R


def rotmat_to_euler(R) -> np.ndarray:
    """Rotation matrix to intrinsic Z-X-Y Euler triple.

    At gimbal lock (middle angle +-pi/2) the third angle is set to 0 and
    the remaining freedom folds into the first angle.
    """
    R = _check_rotmat(R)
    sb = np.clip(R[..., 2, 1], -1.0, 1.0)
    locked = np.abs(sb) >= 1.0 - _LOCK_EPS

    b = np.arcsin(sb)
    a = np.arctan2(-R[..., 0, 1], R[..., 1, 1])
    c = np.arctan2(-R[..., 2, 0], R[..., 2, 2])

    a_lock = np.arctan2(R[..., 1, 0], R[..., 0, 0])
    b_lock = np.copysign(np.pi / 2.0, sb)

    e = np.stack(
        [
            np.where(locked, a_lock, a),
            np.where(locked, b_lock, b),
            np.where(locked, 0.0, c),
        ],
        axis=-1,
    )
    # keep angles in (-pi, pi]
    return np.where(e == -np.pi, np.pi, e)


def expmap_frames_to_euler(frames) -> np.ndarray:
    """Convert rows of concatenated exp-map triples to Euler-angle rows.

    Accepts ``(..., 3L)`` and converts each 3-wide block independently;
    evaluation metrics on angle data operate on the result.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.shape[-1] % 3 != 0:
        raise InvalidInputError(
            f"angle frames must have a multiple of 3 dims, got {frames.shape[-1]}"
        )
    triples = frames.reshape(frames.shape[:-1] + (frames.shape[-1] // 3, 3))
    euler = rotmat_to_euler(quat_to_rotmat(expmap_to_quat(triples)))
    return euler.reshape(frames.shape)

"""Unit quaternions on S^3, their tangent space, and rigid transforms.

Quaternions are numpy arrays in (w, x, y, z) order, Hamilton convention,
acting on vectors by ``p' = q p q^-1``. Every function accepts a single
quaternion of shape (4,) or a stack of shape (..., 4) and broadcasts.
Tangent vectors are axis-angle 3-vectors ``theta * n`` in radians.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMean, NearZeroNorm

NORM_EPS = 1e-12
MEAN_EPS = 1e-9
# below this angle exp/log switch to their Taylor expansions
SMALL_ANGLE = 1e-8

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def identity():
    return IDENTITY.copy()


def normalize(v):
    """Scale a 4-vector (or a stack of them) to unit length.

    Raises:
        NearZeroNorm: if any input has norm <= 1e-12.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n <= NORM_EPS):
        raise NearZeroNorm("cannot normalize a quaternion with norm <= 1e-12")
    return v / n


def _mul(a, b):
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def compose(q1, q2):
    """Hamilton product ``q1 ⊗ q2``, renormalized.

    The result rotates by ``q2`` first and then by ``q1``, i.e. its matrix is
    ``R(q1) @ R(q2)``.
    """
    return normalize(_mul(np.asarray(q1, dtype=float), np.asarray(q2, dtype=float)))


def inverse(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def hemisphere_align(q, ref):
    """Return ``q`` or ``-q``, whichever has a non-negative dot with ``ref``.

    A dot of exactly zero keeps ``q`` unchanged.
    """
    q = np.asarray(q, dtype=float)
    dot = np.sum(q * np.asarray(ref, dtype=float), axis=-1, keepdims=True)
    return np.where(dot < 0.0, -q, q)


def canonical_sign(q):
    """Representative with w > 0; ties broken by the first non-zero component."""
    q = np.asarray(q, dtype=float)
    nz = q != 0.0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)
    return np.where(lead < 0.0, -q, q)


def log_map(q):
    """Map a rotation to its principal axis-angle vector.

    The representative with ``w >= 0`` is used, so the returned angle lies in
    [0, pi] and ``log_map(identity()) == 0``.
    """
    q = np.asarray(q, dtype=float)
    w = q[..., :1]
    v = q[..., 1:]
    sign = np.where(w < 0.0, -1.0, 1.0)
    w = w * sign
    v = v * sign
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = 2.0 * np.arctan2(s, w)
    small = s < SMALL_ANGLE
    safe_s = np.where(small, 1.0, s)
    # theta / s -> 2 / w * (1 - s^2 / (3 w^2)) as s -> 0
    # near the identity w is close to 1, so the series is safe wherever it is selected
    w_safe = np.where(small, w, 1.0)
    scale = np.where(small, 2.0 / w_safe * (1.0 - s * s / (3.0 * w_safe * w_safe)), theta / safe_s)
    return v * scale


def exp_map(delta):
    """Map an axis-angle vector to the unit quaternion ``(cos θ/2, sin θ/2 · n)``."""
    delta = np.asarray(delta, dtype=float)
    theta = np.linalg.norm(delta, axis=-1, keepdims=True)
    half = 0.5 * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    # sin(θ/2)/θ -> 1/2 - θ^2/48
    k = np.where(small, 0.5 - theta * theta / 48.0, np.sin(half) / safe)
    return normalize(np.concatenate([np.cos(half), delta * k], axis=-1))


def from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    return exp_map(np.asarray(angle, dtype=float)[..., None] * axis)


def angular_distance(q1, q2):
    """Rotation angle between two quaternions, ``2 arccos |<q1, q2>|`` in [0, pi].

    Evaluated through the chord ``min(|q1 - q2|, |q1 + q2|)``, which is exact
    for unit inputs and keeps full precision near zero.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    chord = np.minimum(np.linalg.norm(q1 - q2, axis=-1), np.linalg.norm(q1 + q2, axis=-1))
    return np.minimum(4.0 * np.arcsin(np.clip(0.5 * chord, 0.0, np.sqrt(0.5))), np.pi)


def pairwise_distance(A, B):
    """Table of angular distances, shape (len(A), len(B))."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return angular_distance(A[:, None, :], B[None, :, :])


def mean_quaternion(Q, weights=None):
    """Sign-aligned (optionally weighted) mean of a set of quaternions.

    The naive mean is taken over sign-canonicalized inputs, every element is
    flipped into its hemisphere, and the aligned average is renormalized.

    Raises:
        DegenerateMean: if the naive mean has norm <= 1e-9.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[0] == 0:
        raise ValueError("mean of an empty quaternion set")
    if weights is None:
        weights = np.full(Q.shape[0], 1.0 / Q.shape[0])
    weights = np.asarray(weights, dtype=float)
    naive = weights @ canonical_sign(Q)
    if np.linalg.norm(naive) <= MEAN_EPS:
        raise DegenerateMean("naive quaternion mean is (numerically) zero")
    aligned = hemisphere_align(Q, naive)
    mean = weights @ aligned
    if np.linalg.norm(mean) <= MEAN_EPS:
        raise DegenerateMean("aligned quaternion mean is (numerically) zero")
    return normalize(mean)


def rotate(q, points):
    """Apply the rotation ``q`` to points of shape (..., 3).

    Leading dimensions broadcast; rotate K clouds by K quaternions with
    ``rotate(Q[:, None], P[None])``.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(points, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    uv = np.cross(u, p)
    return p + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def random_quaternions(rng, n=None):
    """Haar-uniform rotations via normalized 4-D Gaussians."""
    shape = (4,) if n is None else (n, 4)
    return normalize(rng.standard_normal(shape))


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray = field(default_factory=identity)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", normalize(self.rotation))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    def apply(self, points):
        return rotate(self.rotation, points) + self.translation


PoseEstimate = RigidTransform


def se3_compose(a, b):
    """``a · b``: apply ``b`` first, then ``a``."""
    return RigidTransform(compose(a.rotation, b.rotation), rotate(a.rotation, b.translation) + a.translation)


def se3_inverse(T):
    r_inv = inverse(T.rotation)
    return RigidTransform(r_inv, -rotate(r_inv, T.translation))

"""Symmetry descriptions, equivalent-pose sets and Chamfer-based plane scoring."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import quat
from .errors import DegenerateAxis, NoPlaneRetained, ParallelInput

ROTATIONAL = "rotational"
MIRROR = "mirror"
ASYMMETRIC = "asymmetric"
KINDS = (ROTATIONAL, MIRROR, ASYMMETRIC)

SCORE_EPS = 1e-8
BRUTE_FORCE_MAX = 256
AXES = np.eye(3)


@dataclass(frozen=True)
class SymmetrySpec:
    """Symmetry kind plus its axis distribution and/or mirror-plane normals.

    ``axis_distribution`` holds the (pi_x, pi_y, pi_z) weights over the
    canonical axes; ``plane_normals`` is an (Omega, 3) array.
    """

    kind: str
    axis_distribution: Optional[np.ndarray] = None
    plane_normals: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if self.axis_distribution is not None:
            pi = np.asarray(self.axis_distribution, dtype=float).reshape(3)
            if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
                raise ValueError(f"axis distribution must be non-negative and sum to 1, got {pi}")
            object.__setattr__(self, "axis_distribution", pi)
        if self.plane_normals is not None:
            n = np.asarray(self.plane_normals, dtype=float).reshape(-1, 3)
            if n.shape[0] > 3:
                raise ValueError("at most three plane normals")
            n = n / np.linalg.norm(n, axis=1, keepdims=True)
            gram = n @ n.T
            if n.shape[0] >= 2 and np.abs(gram - np.eye(len(n))).max() > 1e-6:
                raise ValueError("plane normals must be mutually orthogonal")
            object.__setattr__(self, "plane_normals", n)
        if self.kind == ROTATIONAL and self.axis_distribution is None:
            raise ValueError("rotational symmetry needs an axis distribution")

    @classmethod
    def rotational(cls, axis_index=2):
        pi = np.zeros(3)
        pi[axis_index] = 1.0
        return cls(ROTATIONAL, axis_distribution=pi)

    @classmethod
    def mirror(cls, normals):
        return cls(MIRROR, plane_normals=normals)

    @classmethod
    def asymmetric(cls):
        return cls(ASYMMETRIC)

    @property
    def axis(self):
        return synth_axis(self.axis_distribution)

    @property
    def omega(self):
        return 0 if self.plane_normals is None else len(self.plane_normals)


@dataclass(frozen=True)
class EquivalentSet:
    quaternions: np.ndarray  # (N_eq, 4); row 0 is the ground truth
    q_gt: np.ndarray
    spec: Optional[SymmetrySpec] = None

    def __len__(self):
        return len(self.quaternions)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.quaternions, dtype=dtype)


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if n < 1e-9:
        raise DegenerateAxis(f"{name} has (near) zero norm")
    return v / n


def synth_axis(pi):
    """Normalized ``pi_x x + pi_y y + pi_z z``."""
    pi = np.asarray(pi, dtype=float).reshape(3)
    if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-6:
        raise ValueError(f"axis probabilities must be non-negative and sum to 1, got {pi}")
    return _unit(pi, "weighted axis")


def orthonormal_triple(n, n_raw):
    """Complete a principal normal to a right-handed orthonormal triple.

    ``n_raw`` has its component along ``n`` removed; the third direction is
    the cross product of the first two.
    """
    n = _unit(n, "principal normal")
    n_raw = np.asarray(n_raw, dtype=float).reshape(3)
    raw_norm = np.linalg.norm(n_raw)
    if raw_norm < 1e-12:
        raise ParallelInput("secondary normal is zero")
    sin_angle = np.linalg.norm(np.cross(n, n_raw)) / raw_norm
    if sin_angle <= np.sin(1e-4):
        raise ParallelInput("secondary normal is parallel to the principal normal")
    n1 = n_raw - (n_raw @ n) * n
    n1 /= np.linalg.norm(n1)
    return n, n1, np.cross(n, n1)


def equivalent_set_rotational(q_gt, axis, n_eq):
    """``q_gt ⊗ exp(θ_i axis)`` for θ_i = 2πi/n_eq, i = 0..n_eq-1.

    ``axis`` lives in the part's canonical frame, so the rotation is applied
    on the right.
    """
    if n_eq < 1:
        raise ValueError("n_eq must be >= 1")
    q_gt = quat.normalize(q_gt)
    axis = _unit(axis, "symmetry axis")
    theta = 2.0 * np.pi * np.arange(n_eq) / n_eq
    Q = quat.compose(q_gt, quat.exp_map(theta[:, None] * axis))
    Q[0] = q_gt
    return EquivalentSet(Q, q_gt)


def _half_turn(u):
    return np.concatenate([[0.0], _unit(u, "plane normal")])


def equivalent_set_mirror(q_gt, planes):
    """Ground truth plus the half-turn representatives of each plane reflection.

    A reflection across the plane with normal ``u`` is represented by the
    proper rotation of 180 degrees about ``u``. Pairwise products of the
    generators are included; duplicates are dropped.
    """
    q_gt = quat.normalize(q_gt)
    planes = np.asarray(planes, dtype=float).reshape(-1, 3)
    if len(planes) > 3:
        raise ValueError("at most three mirror planes")
    gens = [_half_turn(u) for u in planes]
    elems = [quat.IDENTITY.copy()] + gens
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            elems.append(quat.compose(gens[i], gens[j]))
    unique = []
    for e in elems:
        if all(quat.angular_distance(e, u) > 1e-9 for u in unique):
            unique.append(e)
    Q = quat.compose(q_gt, np.stack(unique))
    Q[0] = q_gt
    return EquivalentSet(Q, q_gt)


def equivalent_set(spec, q_gt, n_eq=36):
    """Equivalent poses of ``q_gt`` under ``spec``."""
    if spec.kind == ROTATIONAL:
        eq = equivalent_set_rotational(q_gt, spec.axis, n_eq)
    elif spec.kind == MIRROR:
        planes = spec.plane_normals if spec.plane_normals is not None else np.zeros((0, 3))
        eq = equivalent_set_mirror(q_gt, planes)
    else:
        q = quat.normalize(q_gt)
        eq = EquivalentSet(q[None, :].copy(), q)
    return EquivalentSet(eq.quaternions, eq.q_gt, spec)


def reflect_cloud(P, u):
    """Mirror every point across the plane through the centroid with normal ``u``."""
    P = np.asarray(P, dtype=float)
    u = np.asarray(u, dtype=float).reshape(3)
    alpha = (P - P.mean(axis=0)) @ u
    return P - 2.0 * alpha[:, None] * u


def _nn_dist(A, B):
    if len(B) < BRUTE_FORCE_MAX:
        d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=-1)
        return d.min(axis=1)
    dist, _ = cKDTree(B).query(A, k=1)
    return dist


def chamfer_one_sided(A, B):
    """Mean distance from each point of ``A`` to its exact nearest neighbour in ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Chamfer distance needs non-empty clouds")
    return float(_nn_dist(A, B).mean())


def chamfer(A, B):
    """Bidirectional Chamfer, the mean of both one-sided distances."""
    return 0.5 * (chamfer_one_sided(A, B) + chamfer_one_sided(B, A))


def mirror_consistency(P, u):
    return chamfer(P, reflect_cloud(P, u))


def plane_scores(P, planes, eps=SCORE_EPS):
    """Normalized inverse mirror-consistency of each candidate plane."""
    inv = np.array([1.0 / (mirror_consistency(P, u) + eps) for u in np.asarray(planes, dtype=float)])
    return inv / (inv.sum() + eps)


def rotational_inconsistency(P, axis, n_probe_angles=8):
    """Mean bidirectional Chamfer between the centred cloud and its copies
    rotated about ``axis`` by ``n_probe_angles`` angles spread over (0, 2π)."""
    P = np.asarray(P, dtype=float)
    P = P - P.mean(axis=0)
    tree = cKDTree(P)
    axis = _unit(axis, "probe axis")
    thetas = 2.0 * np.pi * np.arange(1, n_probe_angles + 1) / (n_probe_angles + 1)
    total = 0.0
    for th in thetas:
        q = quat.from_axis_angle(axis, th)
        # both directions against the same tree: |R p - p'| = |p - R^T p'|
        fwd = tree.query(quat.rotate(q, P))[0].mean()
        bwd = tree.query(quat.rotate(quat.inverse(q), P))[0].mean()
        total += 0.5 * (fwd + bwd)
    return total / n_probe_angles


def sampling_floor(P):
    """Mean distance from each point to its nearest other point.

    A sampled surface compared with a rotated copy of itself shows roughly
    this Chamfer distance even about a true symmetry axis.
    """
    P = np.asarray(P, dtype=float)
    dist, _ = cKDTree(P).query(P, k=2)
    return float(dist[:, 1].mean())


def estimate_rotational_axis(P, n_probe_angles=8, eps=SCORE_EPS):
    """Annotation-free axis distribution over the canonical x, y, z axes.

    Returns (axis, pi) with ``pi_k ∝ 1 / (max(c_k - f, 0) + eps)``, where
    ``c_k`` is the rotational inconsistency about axis k and ``f`` the
    cloud's sampling floor.
    """
    P = np.asarray(P, dtype=float)
    if len(P) < 16:
        raise ValueError("need at least 16 points")
    if n_probe_angles < 4:
        raise ValueError("need at least 4 probe angles")
    c = np.array([rotational_inconsistency(P, e, n_probe_angles) for e in AXES])
    excess = np.maximum(c - sampling_floor(P), 0.0)
    inv = 1.0 / (excess + eps)
    pi = inv / inv.sum()
    return synth_axis(pi), pi


def estimate_mirror_planes(P, keep_threshold=0.25, n_probe_angles=8, return_scores=False):
    """Mirror planes of a cloud in its canonical frame.

    The candidate triple starts from the dominant canonical axis of the
    rotational axis distribution, completed by the runner-up axis. Planes
    whose score reaches ``keep_threshold`` are retained.

    Raises:
        NoPlaneRetained: if every score is below ``keep_threshold``.
    """
    _, pi = estimate_rotational_axis(P, n_probe_angles)
    order = np.argsort(-pi, kind="stable")
    triple = np.stack(orthonormal_triple(AXES[order[0]], AXES[order[1]]))
    scores = plane_scores(P, triple)
    keep = scores >= keep_threshold
    if not keep.any():
        raise NoPlaneRetained(f"no plane score reaches {keep_threshold}: {scores}")
    spec = SymmetrySpec(MIRROR, axis_distribution=pi, plane_normals=triple[keep])
    if return_scores:
        return spec, triple, scores
    return spec

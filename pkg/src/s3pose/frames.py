"""Per-point local reference frames from neighbourhood covariance.

For every point: spatial KNN, covariance of the neighbour offsets, a
power-iteration estimate of its principal direction, completion to a
right-handed frame with a fixed reference vector, and the trace/anisotropy
pair of the covariance.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateCovariance

V0 = np.full(3, 1.0 / np.sqrt(3.0))
REF_PRIMARY = np.array([1.0, 0.0, 0.0])
REF_FALLBACK = np.array([0.0, 1.0, 0.0])
COLLINEAR = 0.99


@dataclass(frozen=True)
class Neighborhood:
    center_index: int
    neighbor_indices: np.ndarray
    directions: np.ndarray  # (M, 3), p_j - p_i


@dataclass(frozen=True)
class LocalFrame:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    @property
    def matrix(self):
        """E = [e1 e2 e3] with the axes as columns."""
        return np.stack([self.e1, self.e2, self.e3], axis=1)


@dataclass(frozen=True)
class PointFrame:
    frame: Optional[LocalFrame]  # None when the covariance is degenerate
    trace: float
    anisotropy: float

    @property
    def ok(self):
        return self.frame is not None


def _neighbor_order(dist, i):
    d = dist.copy()
    d[i] = np.inf
    # stable sort: equal distances keep the lower index first
    return np.argsort(d, kind="stable")


def knn(P, i, m=8):
    """The ``m`` nearest other points of point ``i`` (ties to the lower index)."""
    P = np.asarray(P, dtype=float)
    if len(P) < 2:
        raise ValueError("KNN needs at least two points")
    if m < 1:
        raise ValueError("m must be >= 1")
    m = min(m, len(P) - 1)
    dist = np.linalg.norm(P - P[i], axis=1)
    idx = _neighbor_order(dist, i)[:m]
    return Neighborhood(int(i), idx, P[idx] - P[i])


def covariance(nb):
    R = np.asarray(nb.directions if isinstance(nb, Neighborhood) else nb, dtype=float)
    if len(R) == 0:
        raise ValueError("empty neighbourhood")
    return R.T @ R / len(R)


def _canonical_sign(v):
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def principal_direction(S, v0=V0, iters=1):
    """``iters`` power-iteration steps ``v <- S v / |S v|`` from ``v0``.

    The result has its largest-magnitude component positive.

    Raises:
        DegenerateCovariance: if an iterate collapses (norm <= 1e-12).
    """
    S = np.asarray(S, dtype=float)
    v = np.asarray(v0, dtype=float)
    for _ in range(iters):
        w = S @ v
        n = np.linalg.norm(w)
        if n <= 1e-12:
            raise DegenerateCovariance("power iteration collapsed to zero")
        v = w / n
    return _canonical_sign(v)


def build_frame(e1):
    """Right-handed frame from a principal direction and a fixed reference.

    The reference is x, or y when ``|e1 · x| > 0.99``.
    """
    e1 = np.asarray(e1, dtype=float)
    t = REF_FALLBACK if abs(e1 @ REF_PRIMARY) > COLLINEAR else REF_PRIMARY
    e2 = np.cross(e1, t)
    e2 /= np.linalg.norm(e2)
    return LocalFrame(e1, e2, np.cross(e1, e2))


def project_local(frame, directions):
    """Express direction vectors in the local frame, ``E^T d`` row by row."""
    return np.asarray(directions, dtype=float) @ frame.matrix


def frame_features(S):
    """(trace, squared Frobenius norm of the deviatoric part)."""
    S = np.asarray(S, dtype=float)
    tr = float(np.trace(S))
    dev = S - tr / 3.0 * np.eye(3)
    return tr, float(np.sum(dev * dev))


def cloud_frames(P, m=8, iters=1, v0=V0):
    """Local frame and covariance features for every point of ``P``.

    Points whose covariance is degenerate get ``frame=None`` instead of
    aborting the whole cloud.
    """
    P = np.asarray(P, dtype=float)
    if len(P) < m + 1:
        raise ValueError(f"need at least m + 1 = {m + 1} points")
    out = []
    for i in range(len(P)):
        S = covariance(knn(P, i, m))
        tr, a = frame_features(S)
        try:
            frame = build_frame(principal_direction(S, v0, iters))
        except DegenerateCovariance:
            frame = None
        out.append(PointFrame(frame, tr, a))
    return out

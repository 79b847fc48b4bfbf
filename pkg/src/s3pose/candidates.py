"""Statistics of a set of candidate rotations.

A candidate set of K quaternions is summarised around its sign-aligned mean
by the mean tangent offset, the averaged squared cosine to the mean, and the
eigenstructure of the second moment of the offsets. Flattened, these give a
fixed 16-dimensional descriptor.
"""

from dataclasses import dataclass

import numpy as np

from . import quat

EIG_TIE = 1e-10
_AXES = np.eye(3)


@dataclass(frozen=True)
class CandidateFeature:
    mean_offset: np.ndarray  # (3,) radians
    concentration: float
    eigenvalues: np.ndarray  # (3,) descending, radians^2
    eigenvectors: np.ndarray  # (3, 3), row j is v_j

    def flatten(self):
        return np.concatenate(
            [self.mean_offset, [self.concentration], self.eigenvalues, self.eigenvectors.ravel()]
        )

    def __len__(self):
        return 16


def as_candidates(Q):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.ndim != 2 or Q.shape[1] != 4 or Q.shape[0] < 1:
        raise ValueError(f"expected a (K, 4) candidate array with K >= 1, got shape {Q.shape}")
    return quat.normalize(Q)


def residuals(Q, q_mean):
    """``r_i = q_mean^-1 ⊗ q_i``, each flipped to the identity's hemisphere."""
    r = quat.compose(quat.inverse(q_mean), as_candidates(Q))
    return quat.hemisphere_align(r, quat.IDENTITY)


def tangent_offsets(res):
    return quat.log_map(res)


def mean_offset(offsets):
    offsets = np.atleast_2d(offsets)
    if offsets.shape[0] == 0:
        raise ValueError("mean offset of an empty set")
    return offsets.mean(axis=0)


def concentration(Q, q_mean):
    dots = as_candidates(Q) @ np.asarray(q_mean, dtype=float)
    return float(np.clip(np.mean(dots * dots), 0.0, 1.0))


def second_moment(offsets):
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    if offsets.shape[0] == 0:
        raise ValueError("second moment of an empty set")
    return offsets.T @ offsets / offsets.shape[0]


def _canonical_sign(v):
    # largest-magnitude component positive; argmax picks the first on ties
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def _tie_basis(basis):
    """Deterministic basis of span(basis) from projected canonical axes."""
    m = basis.shape[1]
    proj = basis @ basis.T
    out = []
    for e in _AXES:
        v = proj @ e
        for u in out:
            v = v - (v @ u) * u
        n = np.linalg.norm(v)
        if n > 1e-6:
            out.append(v / n)
        if len(out) == m:
            break
    return np.stack(out, axis=1)


def second_moment_eig(offsets):
    """Eigenpairs of ``M = 1/K sum δ δ^T``, sorted by decreasing eigenvalue.

    Returns (eigenvalues (3,), eigenvectors (3, 3)) with eigenvector j in row j.
    Vectors of (numerically) repeated eigenvalues are taken from the canonical
    axes in x, y, z order, and every vector has its largest component positive.
    """
    M = second_moment(offsets)
    w, V = np.linalg.eigh(M)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    i = 0
    while i < 3:
        j = i + 1
        while j < 3 and abs(w[j - 1] - w[j]) < EIG_TIE:
            j += 1
        if j - i > 1:
            V[:, i:j] = _tie_basis(V[:, i:j])
        i = j
    vecs = np.stack([_canonical_sign(V[:, k]) for k in range(3)])
    return w, vecs


def encode(Q):
    """Full descriptor of a candidate set.

    Raises:
        DegenerateMean: if the candidate mean collapses.
    """
    Q = as_candidates(Q)
    q_mean = quat.mean_quaternion(Q)
    offsets = tangent_offsets(residuals(Q, q_mean))
    lam, vecs = second_moment_eig(offsets)
    return CandidateFeature(
        mean_offset=mean_offset(offsets),
        concentration=concentration(Q, q_mean),
        eigenvalues=lam,
        eigenvectors=vecs,
    )

"""Candidates -> tangent-space refinement -> aggregation pose fitting.

``fit_pose`` runs two phases. The warm-up phase refines perturbed
candidates against canonical-axis (or canonical-plane) hypotheses; the
symmetry of the model is then estimated and the main phase refines against
equivalent poses generated from that estimate. Refined candidates are
combined by an objective-weighted quaternion mean, which gets one last
refinement.

Objectives are vectorized: they map an (n, 4) array of quaternions to (n,)
values, so all candidates and their finite-difference probes are evaluated
in one call.
"""

from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree

from . import quat
from .errors import DegenerateMean, NonFiniteObjective, NumericalError
from .losses import WARMUP, MAIN, mirror_geom_loss, soft_set_distance, softmin_weights
from .symmetry import (
    ASYMMETRIC,
    AXES,
    MIRROR,
    ROTATIONAL,
    SymmetrySpec,
    equivalent_set,
    equivalent_set_mirror,
    equivalent_set_rotational,
    estimate_mirror_planes,
    estimate_rotational_axis,
)

SUPERVISED = "supervised"
BLIND = "blind"
MIN_ETA = 1e-6


@dataclass(frozen=True)
class FitConfig:
    k: int = 64
    sigma: float = 0.3
    steps: int = 100
    eta: float = 0.5
    n_eq: int = 36
    beta: float = 10.0
    warmup_steps: int = 30
    seed: int = 0
    h: float = 1e-4
    keep_threshold: float = 0.25
    n_probe_angles: int = 8
    blind_points: int = 256

    def __post_init__(self):
        for name in ("k", "steps", "n_eq", "warmup_steps", "n_probe_angles", "blind_points"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not self.eta > 0 or not self.beta > 0:
            raise ValueError("eta and beta must be positive")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class TraceEntry:
    phase: str
    iteration: int
    values: np.ndarray  # one objective value per candidate


@dataclass
class FitReport:
    estimate: quat.PoseEstimate
    per_candidate_final_objectives: np.ndarray
    aggregate_weights: np.ndarray
    estimated_symmetry: SymmetrySpec
    objective_trace: List[TraceEntry] = field(default_factory=list)
    candidates: Optional[np.ndarray] = None
    failed: Optional[np.ndarray] = None
    final_objective: float = float("nan")
    mode: str = SUPERVISED


def generate_candidates(q_init, k, sigma, seed=0):
    """``exp(sigma z_i) ⊗ q_init`` with isotropic standard-normal ``z_i``.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((k, 3))
    return quat.compose(quat.exp_map(sigma * z), np.asarray(q_init, dtype=float))


def tangent_gradient(objective, Q, h=1e-4):
    """Central differences of a vectorized objective along the left tangent basis.

    Returns (gradients (n, 3), finite mask (n,)).
    """
    Q = np.atleast_2d(Q)
    n = len(Q)
    steps = quat.exp_map(np.concatenate([h * AXES, -h * AXES]))  # (6, 4)
    probes = quat.compose(steps[None, :, :], Q[:, None, :]).reshape(-1, 4)
    vals = np.asarray(objective(probes), dtype=float).reshape(n, 6)
    ok = np.all(np.isfinite(vals), axis=1)
    grad = (vals[:, :3] - vals[:, 3:]) / (2.0 * h)
    return np.where(ok[:, None], grad, 0.0), ok


def refine_batch(Q, objective, steps, eta, h=1e-4, phase="", trace=None):
    """Finite-difference descent on S^3 for every row of ``Q`` independently.

    Each candidate takes ``q <- exp(-eta g) ⊗ q``; a step that does not lower
    its objective is rejected and its ``eta`` halved. A candidate stops after
    ``steps`` iterations or once its ``eta`` drops below 1e-6.

    Returns (refined Q, final values, failed mask). Candidates whose
    objective turns non-finite are frozen and flagged.
    """
    Q = np.array(np.atleast_2d(Q), dtype=float)
    vals = np.asarray(objective(Q), dtype=float).copy()
    failed = ~np.isfinite(vals)
    etas = np.full(len(Q), float(eta))
    if trace is not None:
        trace.append(TraceEntry(phase, 0, vals.copy()))
    for it in range(1, steps + 1):
        active = np.flatnonzero((etas >= MIN_ETA) & ~failed)
        if active.size == 0:
            break
        g, ok = tangent_gradient(objective, Q[active], h)
        failed[active[~ok]] = True
        active, g = active[ok], g[ok]
        trial = quat.compose(quat.exp_map(-etas[active, None] * g), Q[active])
        tv = np.asarray(objective(trial), dtype=float)
        better = np.isfinite(tv) & (tv < vals[active])
        acc = active[better]
        Q[acc] = trial[better]
        vals[acc] = tv[better]
        etas[active[~better]] *= 0.5
        if trace is not None:
            trace.append(TraceEntry(phase, it, vals.copy()))
    return Q, vals, failed


def refine_candidate(q, objective, steps=100, eta=0.5, h=1e-4):
    """Refine one quaternion against a scalar objective ``objective(q)``.

    Returns (refined q, list of objective values per iteration).

    Raises:
        NonFiniteObjective: if the objective turns NaN or inf.
    """

    def batched(Qs):
        return np.array([objective(qq) for qq in Qs], dtype=float)

    trace = []
    Q, _, failed = refine_batch(np.asarray(q, dtype=float)[None, :], batched, steps, eta, h, trace=trace)
    if failed[0]:
        raise NonFiniteObjective("objective is not finite along the descent")
    return Q[0], [float(e.values[0]) for e in trace]


def aggregate(candidates, objectives, beta=10.0):
    """Boltzmann-weighted mean of the candidates, aligned to the best one.

    Returns (q_final, weights).

    Raises:
        DegenerateMean: if the weighted sum vanishes.
    """
    Q = np.atleast_2d(np.asarray(candidates, dtype=float))
    obj = np.asarray(objectives, dtype=float)
    w = softmin_weights(obj, beta)
    best = Q[np.argmin(obj)]
    s = w @ quat.hemisphere_align(Q, best)
    if np.linalg.norm(s) <= quat.MEAN_EPS:
        raise DegenerateMean("weighted candidate sum vanishes")
    return quat.normalize(s), w


def estimate_translation(P_obs, model, q):
    return np.mean(P_obs, axis=0) - quat.rotate(q, np.mean(model, axis=0))


# --- objectives ---------------------------------------------------------------


def _soft_objective(eq, beta, offset=0.0):
    eq = np.asarray(eq, dtype=float)

    def f(Q):
        return soft_set_distance(Q, eq, beta) + offset

    return f


def _angle_objective(q_gt):
    def f(Q):
        return quat.angular_distance(Q, q_gt)

    return f


class ChamferObjective:
    """Bidirectional Chamfer between the posed model and the observation.

    The translation follows from the rotation by centroid matching. Both
    one-sided terms query trees built once on the full clouds.
    """

    def __init__(self, P_obs, model, n_points=256, seed=0):
        rng = np.random.default_rng(seed)
        self.obs = np.asarray(P_obs, dtype=float)
        self.model = np.asarray(model, dtype=float)
        self.c_obs = self.obs.mean(axis=0)
        self.c_model = self.model.mean(axis=0)
        self.obs_tree = cKDTree(self.obs)
        self.model_tree = cKDTree(self.model)
        self.obs_sub = self._subset(self.obs, n_points, rng)
        self.model_sub = self._subset(self.model, n_points, rng)

    @staticmethod
    def _subset(P, n, rng):
        if len(P) <= n:
            return P
        return P[np.sort(rng.choice(len(P), n, replace=False))]

    def __call__(self, Q):
        Q = np.atleast_2d(Q)
        t = self.c_obs - quat.rotate(Q, self.c_model)  # (n, 3)
        posed = quat.rotate(Q[:, None, :], self.model_sub[None]) + t[:, None, :]
        d_fwd = self.obs_tree.query(posed.reshape(-1, 3))[0].reshape(len(Q), -1).mean(axis=1)
        back = quat.rotate(quat.inverse(Q)[:, None, :], self.obs_sub[None] - t[:, None, :])
        d_bwd = self.model_tree.query(back.reshape(-1, 3))[0].reshape(len(Q), -1).mean(axis=1)
        return 0.5 * (d_fwd + d_bwd)


def octahedral_rotations():
    """The 24 proper rotations mapping the coordinate axes onto themselves."""
    out = []
    for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)):
        for signs in np.ndindex(2, 2, 2):
            M = np.zeros((3, 3))
            for row, col in enumerate(perm):
                M[row, col] = -1.0 if signs[row] else 1.0
            if np.linalg.det(M) > 0:
                out.append(_matrix_to_quat(M))
    return np.stack(out)


def _matrix_to_quat(M):
    # Shepperd's method; only used on exact signed permutation matrices here
    tr = np.trace(M)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = [0.25 * s, (M[2, 1] - M[1, 2]) / s, (M[0, 2] - M[2, 0]) / s, (M[1, 0] - M[0, 1]) / s]
    else:
        i = int(np.argmax(np.diag(M)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(1.0 + M[i, i] - M[j, j] - M[k, k])
        q = np.zeros(4)
        q[0] = (M[k, j] - M[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (M[j, i] + M[i, j]) / s
        q[1 + k] = (M[k, i] + M[i, k]) / s
    return quat.canonical_sign(quat.normalize(np.asarray(q, dtype=float)))


# --- the two-phase fit ----------------------------------------------------------


def estimate_symmetry(model, sym_kind, cfg):
    if sym_kind == ROTATIONAL:
        _, pi = estimate_rotational_axis(model, cfg.n_probe_angles)
        return SymmetrySpec(ROTATIONAL, axis_distribution=pi)
    if sym_kind == MIRROR:
        return estimate_mirror_planes(model, cfg.keep_threshold, cfg.n_probe_angles)
    if sym_kind == ASYMMETRIC:
        return SymmetrySpec.asymmetric()
    raise ValueError(f"unknown symmetry kind {sym_kind!r}")


def _warmup_objective(C, q_gt, model, sym_kind, cfg):
    if sym_kind == ROTATIONAL:
        sets = [equivalent_set_rotational(q_gt, e, cfg.n_eq) for e in AXES]
        offset = 0.0
    elif sym_kind == MIRROR:
        sets = [equivalent_set_mirror(q_gt, [e]) for e in AXES]
        offset = mirror_geom_loss(model, AXES)
    else:
        return _angle_objective(q_gt)
    # the hypothesis is chosen once, on the initial candidates
    losses = [soft_set_distance(C, s, cfg.beta).mean() for s in sets]
    return _soft_objective(sets[int(np.argmin(losses))], cfg.beta, offset)


def _main_objective(q_gt, model, spec, cfg):
    if spec.kind == ASYMMETRIC:
        return _angle_objective(q_gt)
    offset = mirror_geom_loss(model, spec.plane_normals) if spec.kind == MIRROR else 0.0
    return _soft_objective(equivalent_set(spec, q_gt, cfg.n_eq), cfg.beta, offset)


def fit_pose(P_obs, model, sym_kind, cfg=None, q_gt=None, mode=None):
    """Fit a rotation and translation of ``model`` to the observed cloud.

    Args:
        P_obs: observed points (N, 3).
        model: model points in the canonical part frame (M, 3).
        sym_kind: "rotational", "mirror" or "asymmetric".
        cfg: FitConfig.
        q_gt: ground-truth rotation, required in supervised mode.
        mode: "supervised" or "blind"; defaults to supervised iff ``q_gt`` is given.

    Returns:
        FitReport

    Raises:
        NonFiniteObjective: for non-finite input coordinates.
        NumericalError: if fewer than half the candidates survive refinement.
    """
    cfg = cfg or FitConfig()
    mode = mode or (SUPERVISED if q_gt is not None else BLIND)
    P_obs = np.asarray(P_obs, dtype=float)
    model = np.asarray(model, dtype=float)
    if len(P_obs) == 0 or len(model) == 0:
        raise ValueError("clouds must be non-empty")
    if not (np.all(np.isfinite(P_obs)) and np.all(np.isfinite(model))):
        raise NonFiniteObjective("point clouds contain non-finite coordinates")
    rng = np.random.default_rng(cfg.seed)
    trace = []

    if mode == SUPERVISED:
        if q_gt is None:
            raise ValueError("supervised mode needs q_gt")
        q_gt = quat.normalize(q_gt)
        q_init = quat.compose(quat.exp_map(cfg.sigma * rng.standard_normal(3)), q_gt)
        C = generate_candidates(q_init, cfg.k, cfg.sigma, rng)
        warm = _warmup_objective(C, q_gt, model, sym_kind, cfg)
    elif mode == BLIND:
        chamfer = ChamferObjective(P_obs, model, cfg.blind_points, rng)
        hyp = octahedral_rotations()
        q_init = hyp[int(np.argmin(chamfer(hyp)))]
        C = generate_candidates(q_init, cfg.k, cfg.sigma, rng)
        warm = chamfer
    else:
        raise ValueError(f"unknown mode {mode!r}")

    C, _, failed = refine_batch(C, warm, cfg.warmup_steps, cfg.eta, cfg.h, WARMUP, trace)
    spec = estimate_symmetry(model, sym_kind, cfg)
    main = _main_objective(q_gt, model, spec, cfg) if mode == SUPERVISED else chamfer
    C, vals, failed_main = refine_batch(C, main, cfg.steps, cfg.eta, cfg.h, MAIN, trace)
    failed |= failed_main
    if (~failed).sum() < cfg.k / 2:
        raise NumericalError(f"only {(~failed).sum()} of {cfg.k} candidates survived refinement")

    weights = np.zeros(len(C))
    q_agg, w = aggregate(C[~failed], vals[~failed], cfg.beta)
    weights[~failed] = w
    q_final, final_vals, final_failed = refine_batch(q_agg[None, :], main, cfg.steps, cfg.eta, cfg.h)
    if final_failed[0]:
        raise NonFiniteObjective("objective is not finite at the aggregated rotation")
    q_final = q_final[0]
    t = estimate_translation(P_obs, model, q_final)
    return FitReport(
        estimate=quat.PoseEstimate(q_final, t),
        per_candidate_final_objectives=vals,
        aggregate_weights=weights,
        estimated_symmetry=spec,
        objective_trace=trace,
        candidates=C,
        failed=failed,
        final_objective=float(final_vals[0]),
        mode=mode,
    )

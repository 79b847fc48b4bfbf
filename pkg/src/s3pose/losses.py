"""Symmetry-aware rotation objectives with a temperature-controlled soft minimum.

All angular terms use ``2 arccos |<q, q_eq>|``. The inner minimum over an
equivalent set is relaxed to a Boltzmann-weighted average; the outer choice
between axis hypotheses in the warm-up loss stays a hard minimum.
"""

from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import EmptyPlaneSet, NonFiniteObjective
from .symmetry import AXES, equivalent_set_mirror, equivalent_set_rotational, mirror_consistency

WARMUP = "warmup"
MAIN = "main"


@dataclass(frozen=True)
class SoftMinConfig:
    beta: float = 10.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def _beta(cfg):
    if cfg is None:
        return SoftMinConfig().beta
    if isinstance(cfg, SoftMinConfig):
        return cfg.beta
    return float(cfg)


def softmin_weights(values, cfg=None, axis=-1):
    x = np.asarray(values, dtype=float)
    z = np.exp(-_beta(cfg) * (x - x.min(axis=axis, keepdims=True)))
    return z / z.sum(axis=axis, keepdims=True)


def softmin(values, cfg=None, axis=-1):
    """Boltzmann-weighted average ``sum w_i x_i`` with ``w ∝ exp(-beta x)``.

    Lies between ``min(x)`` and ``min(x) + log(N) / beta``.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("softmin of an empty set")
    return np.sum(softmin_weights(x, cfg, axis) * x, axis=axis)


def _eq(eq):
    Q = np.atleast_2d(np.asarray(eq, dtype=float))
    if Q.shape[0] == 0:
        raise ValueError("empty equivalent set")
    return Q


def soft_set_distance(Q, eq, cfg=None):
    """Per-quaternion soft-min angular distance to an equivalent set."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    return softmin(quat.pairwise_distance(Q, _eq(eq)), cfg, axis=1)


def warmup_axis_losses(candidates, q_gt, n_eq=36, cfg=None):
    """Mean soft-min distance of the candidates to each canonical axis' equivalent set."""
    return np.array(
        [soft_set_distance(candidates, equivalent_set_rotational(q_gt, e, n_eq), cfg).mean() for e in AXES]
    )


def warmup_rot_loss(candidates, q_gt, n_eq=36, cfg=None):
    """Warm-up loss: hard minimum over the x, y, z hypotheses of the mean soft
    distance of the candidates to that hypothesis' equivalent poses."""
    return float(warmup_axis_losses(candidates, q_gt, n_eq, cfg).min())


def cand_rot_loss(candidates, eq, cfg=None):
    return float(soft_set_distance(candidates, eq, cfg).mean())


def final_rot_loss(q_final, eq, cfg=None):
    return float(soft_set_distance(q_final, eq, cfg)[0])


def warmup_plane_losses(candidates, q_gt, cfg=None):
    """Mirror analogue of :func:`warmup_axis_losses`, one canonical plane per hypothesis."""
    return np.array(
        [soft_set_distance(candidates, equivalent_set_mirror(q_gt, [e]), cfg).mean() for e in AXES]
    )


def mirror_geom_loss(P, planes):
    planes = np.asarray(planes, dtype=float).reshape(-1, 3)
    if len(planes) == 0:
        raise EmptyPlaneSet("mirror loss needs at least one plane")
    return float(np.mean([mirror_consistency(P, u) for u in planes]))


def mirror_loss(q_final, candidates, q_gt, P, spec, stage, cfg=None):
    """Angle term plus mean mirror consistency of ``P`` over the planes.

    Warm-up: canonical planes, candidates only (``q_final`` may be None),
    hard minimum over single-plane hypotheses. Main: the planes of ``spec``,
    candidate and final terms. ``P`` and the plane normals are both expressed
    in the part's canonical frame.

    Raises:
        EmptyPlaneSet: in the main stage when ``spec`` has no plane.
    """
    if stage == WARMUP:
        angle = float(warmup_plane_losses(candidates, q_gt, cfg).min())
        return angle + mirror_geom_loss(P, AXES)
    if stage != MAIN:
        raise ValueError(f"unknown stage {stage!r}")
    planes = spec.plane_normals
    if planes is None or len(planes) == 0:
        raise EmptyPlaneSet("main-stage mirror loss needs predicted planes")
    eq = equivalent_set_mirror(q_gt, planes)
    angle = cand_rot_loss(candidates, eq, cfg) + final_rot_loss(q_final, eq, cfg)
    return angle + mirror_geom_loss(P, planes)


def asym_loss(q, q_gt):
    return float(quat.angular_distance(q, q_gt))


def loss_gradient(objective, at, h=1e-4, wrt_translation=True):
    """Central finite-difference gradient of ``objective(q, t)`` at a pose.

    The rotation is perturbed on the left, ``exp(±h e_k) ⊗ q``; the
    translation along the coordinate axes.

    Returns:
        (tangent gradient (3,), translation gradient (3,))

    Raises:
        NonFiniteObjective: if any probe evaluates to NaN or inf.
    """
    if not 1e-7 < h < 1e-2:
        raise ValueError("finite-difference step must lie in (1e-7, 1e-2)")
    q = quat.normalize(at.rotation)
    t = np.asarray(at.translation, dtype=float)

    def probe(qq, tt):
        v = float(objective(qq, tt))
        if not np.isfinite(v):
            raise NonFiniteObjective(f"objective returned {v}")
        return v

    g_rot = np.zeros(3)
    g_trans = np.zeros(3)
    for k in range(3):
        step = quat.exp_map(h * AXES[k])
        plus = probe(quat.compose(step, q), t)
        minus = probe(quat.compose(quat.inverse(step), q), t)
        g_rot[k] = (plus - minus) / (2.0 * h)
        if wrt_translation:
            g_trans[k] = (probe(q, t + h * AXES[k]) - probe(q, t - h * AXES[k])) / (2.0 * h)
    return g_rot, g_trans

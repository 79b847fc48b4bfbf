import math

import numpy as np
import pytest
from hypothesis import given, settings

from oracles import (
    boltzmann_average,
    brute_equivalents_mirror,
    brute_equivalents_rotational,
    grid_cube,
    hard_set_loss,
    hard_warmup_loss,
    quat_angle_loop,
)
from s3pose import quat
from s3pose.errors import EmptyPlaneSet, NonFiniteObjective
from s3pose.losses import (
    MAIN,
    WARMUP,
    SoftMinConfig,
    asym_loss,
    cand_rot_loss,
    final_rot_loss,
    loss_gradient,
    mirror_geom_loss,
    mirror_loss,
    soft_set_distance,
    softmin,
    warmup_axis_losses,
    warmup_rot_loss,
)
from s3pose.shapes import ShapeSpec, gen_shape
from s3pose.symmetry import MIRROR, SymmetrySpec, equivalent_set_rotational, mirror_consistency
from strategies import seeds

BIAS_36 = math.log(36) / 10.0


def rng(seed=0):
    return np.random.default_rng(seed)


def test_softmin_examples():
    assert softmin([0.7]) == 0.7
    assert softmin([0.3] * 5) == pytest.approx(0.3, abs=1e-15)
    assert softmin([0.0, 1.0], SoftMinConfig(10.0)) == pytest.approx(math.exp(-10) / (1 + math.exp(-10)), rel=1e-12)
    with pytest.raises(ValueError):
        SoftMinConfig(0.0)
    with pytest.raises(ValueError):
        softmin([])


@settings(max_examples=200)
@given(seeds)
def test_softmin_bounds(seed):
    r = rng(seed)
    x = r.uniform(0, math.pi, int(r.integers(1, 50)))
    s = softmin(x, 10.0)
    assert x.min() - 1e-12 <= s <= min(x.mean(), x.min() + math.log(len(x)) / 10.0) + 1e-12
    assert s == pytest.approx(boltzmann_average(list(x), 10.0), abs=1e-12)


def test_softmin_handles_large_beta():
    x = np.array([3.0, 1.0, 2.0])
    assert softmin(x, 1e4) == pytest.approx(1.0, abs=1e-12)


def test_warmup_loss_at_ground_truth_is_bias():
    q = quat.random_quaternions(rng(1))
    loss = warmup_rot_loss(q[None, :], q)
    # frozen oracle: Boltzmann average of the 36 sampled angles 10i degrees, folded into [0, pi]
    angles = [min(a, 2 * math.pi - a) for a in (2 * math.pi * i / 36 for i in range(36))]
    assert loss == pytest.approx(boltzmann_average(angles, 10.0), abs=1e-9)
    assert loss == pytest.approx(0.0628585101254184, abs=1e-9)
    assert 0.0 <= loss <= BIAS_36


def test_warmup_loss_prefers_true_axis():
    r = rng(2)
    for _ in range(100):
        q = quat.random_quaternions(r)
        eq = equivalent_set_rotational(q, [0, 0, 1], 36).quaternions
        C = eq[r.choice(36, size=8, replace=False)]
        per_axis = warmup_axis_losses(C, q)
        assert per_axis[2] <= per_axis[0] and per_axis[2] <= per_axis[1]


def test_hard_min_limit_matches_brute_force():
    r = rng(3)
    for _ in range(100):
        k, n_eq = int(r.integers(1, 9)), int(r.integers(1, 13))
        q = quat.random_quaternions(r)
        C = quat.random_quaternions(r, k)
        got = warmup_rot_loss(C, q, n_eq, SoftMinConfig(1e4))
        assert got == pytest.approx(hard_warmup_loss(C, q, n_eq), abs=1e-3)


def test_cand_and_final_losses():
    r = rng(4)
    q = quat.random_quaternions(r)
    eq = equivalent_set_rotational(q, [0, 1, 0], 36).quaternions
    assert cand_rot_loss(eq[:5], eq) <= BIAS_36
    assert final_rot_loss(eq[7], eq) <= BIAS_36
    single = q[None, :]
    c = quat.compose(quat.from_axis_angle([1, 0, 0], 0.4), q)
    assert cand_rot_loss(c[None, :], single) == pytest.approx(0.4, abs=1e-12)
    # scalar oracle: brute distances and a hand-rolled Boltzmann average
    C = quat.random_quaternions(r, 6)
    want = np.mean([boltzmann_average([quat_angle_loop(c, e) for e in eq], 10.0) for c in C])
    assert cand_rot_loss(C, eq) == pytest.approx(want, abs=1e-9)
    # dense sampling about z, offset about x: distance is the offset
    psi = math.radians(7)
    dense = equivalent_set_rotational(q, [0, 0, 1], 3600).quaternions
    qf = quat.compose(q, quat.from_axis_angle([1, 0, 0], psi))
    assert final_rot_loss(qf, dense, SoftMinConfig(1e4)) == pytest.approx(psi, abs=1e-3)
    assert final_rot_loss(qf, dense, 1e4) == pytest.approx(hard_set_loss([qf], dense), abs=1e-3)


def test_mirror_loss_on_symmetric_box():
    G = grid_cube(6) * np.array([1.0, 2.0, 3.0])
    q = quat.random_quaternions(rng(5))
    spec = SymmetrySpec.mirror([[1, 0, 0]])
    eq = brute_equivalents_mirror(q, spec.plane_normals)
    total = mirror_loss(q, np.array(eq), q, G, spec, MAIN)
    assert total <= 2 * math.log(2) / 10.0 + 1e-9
    assert mirror_geom_loss(G, spec.plane_normals) <= 1e-9


def test_mirror_loss_warmup_geom_term():
    P = gen_shape(ShapeSpec("box"), seed=6)
    q = quat.random_quaternions(rng(6))
    C = q[None, :]
    per_plane = [mirror_consistency(P, u) for u in np.eye(3)]
    angle = min(
        boltzmann_average([quat_angle_loop(q, e) for e in brute_equivalents_mirror(q, [u])], 10.0) for u in np.eye(3)
    )
    got = mirror_loss(None, C, q, P, SymmetrySpec.mirror(np.eye(3)), WARMUP)
    # the arccos oracle is only good to ~1e-8 at zero angle
    assert got == pytest.approx(angle + sum(per_plane) / 3, abs=1e-7)
    assert got - angle == pytest.approx(sum(per_plane) / 3, abs=1e-7)


def test_mirror_loss_wrong_plane_and_errors():
    P = gen_shape(ShapeSpec("l_bracket"), seed=7)
    assert mirror_geom_loss(P, [[1, 0, 0]]) > 0
    with pytest.raises(EmptyPlaneSet):
        mirror_loss(quat.IDENTITY, quat.IDENTITY[None], quat.IDENTITY, P, SymmetrySpec(MIRROR), MAIN)
    with pytest.raises(ValueError):
        mirror_loss(quat.IDENTITY, quat.IDENTITY[None], quat.IDENTITY, P, SymmetrySpec.mirror(np.eye(3)), "late")


def test_asym_loss():
    q = quat.random_quaternions(rng(8))
    assert asym_loss(q, q) == 0.0
    assert asym_loss(-q, q) == 0.0
    q30 = quat.compose(quat.from_axis_angle([0, 1, 0], math.radians(30)), q)
    assert asym_loss(q30, q) == pytest.approx(math.pi / 6, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_losses_sign_and_order_invariant(seed):
    r = rng(seed)
    q = quat.random_quaternions(r)
    C = quat.random_quaternions(r, 5)
    eq = equivalent_set_rotational(q, [0, 0, 1], 12).quaternions
    base = cand_rot_loss(C, eq)
    assert base >= 0
    flips = np.where(r.random((5, 1)) < 0.5, -1.0, 1.0)
    assert cand_rot_loss(C * flips, eq) == pytest.approx(base, abs=1e-12)
    assert cand_rot_loss(C, -eq[r.permutation(12)]) == pytest.approx(base, abs=1e-12)
    assert warmup_rot_loss(C, -q) == pytest.approx(warmup_rot_loss(C, q), abs=1e-12)


def _sq_angle_to(target):
    def f(q, t):
        return quat.angular_distance(q, target) ** 2

    return f


def test_loss_gradient_stationary_at_minimum():
    q = quat.random_quaternions(rng(9))
    g, gt = loss_gradient(lambda qq, t: asym_loss(qq, q), quat.PoseEstimate(q, np.zeros(3)))
    assert np.linalg.norm(g) <= 1e-4
    np.testing.assert_array_equal(gt, 0)


def test_loss_gradient_matches_quadratic_model():
    r = rng(10)
    target = quat.random_quaternions(r)
    for _ in range(20):
        delta = r.normal(size=3) * 0.05
        q = quat.compose(quat.exp_map(delta), target)
        g, _ = loss_gradient(_sq_angle_to(target), quat.PoseEstimate(q, np.zeros(3)))
        np.testing.assert_allclose(g, 2 * delta, atol=1e-5)


def test_loss_gradient_step_halving_consistency():
    r = rng(11)
    target = quat.random_quaternions(r)
    q = quat.compose(quat.exp_map([0.3, -0.2, 0.1]), target)
    at = quat.PoseEstimate(q, [0.1, 0.0, -0.2])

    def f(qq, t):
        return quat.angular_distance(qq, target) ** 2 + float(np.sum(np.sin(3 * t)))

    h = 1e-3
    g1, t1 = loss_gradient(f, at, h)
    g2, t2 = loss_gradient(f, at, h / 2)
    assert np.abs(g1 - g2).max() <= 10 * h * h
    assert np.abs(t1 - t2).max() <= 10 * h * h
    np.testing.assert_allclose(t2, 3 * np.cos(3 * at.translation), atol=1e-5)


def test_loss_gradient_errors():
    at = quat.PoseEstimate()
    with pytest.raises(ValueError):
        loss_gradient(lambda q, t: 0.0, at, h=0.1)
    with pytest.raises(NonFiniteObjective):
        loss_gradient(lambda q, t: float("nan"), at)


def test_soft_set_distance_shape():
    q = quat.random_quaternions(rng(12))
    eq = brute_equivalents_rotational(q, [0, 0, 1], 6)
    d = soft_set_distance(quat.random_quaternions(rng(13), 4), np.array(eq))
    assert d.shape == (4,)

"""Independent reference implementations used as test oracles.

Nothing here imports the package: every routine is written from the
underlying math with loops or closed forms, so agreement with the library
is evidence rather than tautology.
"""

import math

import numpy as np


def quat_to_matrix(q):
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_angle_of_matrix(R):
    c = (np.trace(R) - 1.0) / 2.0
    return math.acos(max(-1.0, min(1.0, c)))


def matrix_angle_between(q1, q2):
    """Angle of R(q1)^T R(q2), computed on matrices only."""
    return rotation_angle_of_matrix(quat_to_matrix(q1).T @ quat_to_matrix(q2))


def axis_angle_matrix(axis, angle):
    """Rodrigues' formula."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def homogeneous(q, t):
    T = np.eye(4)
    T[:3, :3] = quat_to_matrix(q)
    T[:3, 3] = t
    return T


def quat_angle_loop(a, b):
    dot = abs(sum(float(x) * float(y) for x, y in zip(a, b)))
    return 2.0 * math.acos(min(1.0, dot))


def hamilton(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def axis_angle_quat(axis, angle):
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    return np.concatenate([[math.cos(angle / 2)], math.sin(angle / 2) * k])


def brute_equivalents_rotational(q_gt, axis, n_eq):
    return [hamilton(q_gt, axis_angle_quat(axis, 2 * math.pi * i / n_eq)) for i in range(n_eq)]


def brute_equivalents_mirror(q_gt, planes):
    gens = [np.concatenate([[0.0], np.asarray(u, dtype=float) / np.linalg.norm(u)]) for u in planes]
    elems = [np.array([1.0, 0, 0, 0])] + gens
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            elems.append(hamilton(gens[i], gens[j]))
    uniq = []
    for e in elems:
        if all(quat_angle_loop(e, u) > 1e-9 for u in uniq):
            uniq.append(e)
    return [hamilton(q_gt, e) for e in uniq]


def hard_set_loss(candidates, eq):
    """(1/K) sum_j min_i angle(q_j, eq_i) by explicit double loop."""
    total = 0.0
    for c in candidates:
        best = math.inf
        for e in eq:
            best = min(best, quat_angle_loop(c, e))
        total += best
    return total / len(candidates)


def hard_warmup_loss(candidates, q_gt, n_eq):
    return min(hard_set_loss(candidates, brute_equivalents_rotational(q_gt, ax, n_eq)) for ax in np.eye(3))


def boltzmann_average(values, beta):
    m = min(values)
    ws = [math.exp(-beta * (v - m)) for v in values]
    s = sum(ws)
    return sum(w * v for w, v in zip(ws, values)) / s


def brute_chamfer_one_sided(A, B):
    total = 0.0
    for a in A:
        best = math.inf
        for b in B:
            best = min(best, math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(a, b))))
        total += best
    return total / len(A)


def brute_knn(P, i, m):
    d = [(float(np.sum((P[j] - P[i]) ** 2)), j) for j in range(len(P)) if j != i]
    d.sort()
    return [j for _, j in d[:m]]


def sym3_eigvals(M):
    """Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method), descending."""
    M = np.asarray(M, dtype=float)
    p1 = M[0, 1] ** 2 + M[0, 2] ** 2 + M[1, 2] ** 2
    q = np.trace(M) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(M))[::-1]
    p2 = (M[0, 0] - q) ** 2 + (M[1, 1] - q) ** 2 + (M[2, 2] - q) ** 2 + 2 * p1
    p = math.sqrt(p2 / 6.0)
    B = (M - q * np.eye(3)) / p
    r = np.linalg.det(B) / 2.0
    r = max(-1.0, min(1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    e2 = 3 * q - e1 - e3
    return np.array([_polish_root(M, e) for e in (e1, e2, e3)])


def _polish_root(M, lam, iters=80):
    # Newton on det(M - x I) = -x^3 + c2 x^2 - c1 x + c0; the trigonometric
    # formula alone loses ~1e-8 near repeated roots
    c2 = np.trace(M)
    c1 = 0.5 * (c2 * c2 - np.trace(M @ M))
    c0 = np.linalg.det(M)
    x = lam
    for _ in range(iters):
        f = -x**3 + c2 * x * x - c1 * x + c0
        df = -3 * x * x + 2 * c2 * x - c1
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) < 1e-18:
            break
    return x


def sym3_eigvec(M, lam):
    """Unit eigenvector for a simple eigenvalue via the largest cross product of rows of M - lam I."""
    A = np.asarray(M, dtype=float) - lam * np.eye(3)
    cands = [np.cross(A[0], A[1]), np.cross(A[0], A[2]), np.cross(A[1], A[2])]
    v = max(cands, key=np.linalg.norm)
    return v / np.linalg.norm(v)


def chi3_mean():
    """E||z|| for z ~ N(0, I_3): sqrt(2) Gamma(2) / Gamma(3/2) = 2 sqrt(2/pi)."""
    return math.sqrt(2.0) * math.gamma(2.0) / math.gamma(1.5)


def grid_geodesic_mean_angle(angles, lo, hi, n=2001):
    """Angle about a fixed axis minimizing the sum of squared angular distances."""
    for _ in range(3):  # zoom in around the best grid point
        grid = np.linspace(lo, hi, n)
        cost = sum((grid - a) ** 2 for a in angles)
        best = grid[np.argmin(cost)]
        step = (hi - lo) / (n - 1)
        lo, hi = best - 2 * step, best + 2 * step
    return float(best)


def grid_cube(n=5, half=0.5):
    g = np.linspace(-half, half, n)
    pts = []
    for x in g:
        for y in g:
            for z in g:
                if max(abs(x), abs(y), abs(z)) == half:
                    pts.append((x, y, z))
    return np.array(pts)

"""Synthetic part models sampled uniformly over their surfaces.

Every shape is a union of cylinders, cones and cuboids. Points are drawn
area-weighted from the primitive surfaces and rejected when they fall
strictly inside another primitive, which leaves the outer surface of the
union uniformly covered. Models are centred on their bounding box.
"""

from dataclasses import dataclass, field

import numpy as np

from .symmetry import SymmetrySpec

SHAPE_KINDS = ("cylinder", "cone", "box", "cube", "l_bracket", "knob")

DEFAULT_DIMENSIONS = {
    "cylinder": {"radius": 0.05, "height": 0.2},
    "cone": {"radius": 0.05, "height": 0.15},
    "box": {"x": 0.1, "y": 0.2, "z": 0.3},
    "cube": {"side": 0.1},
    "l_bracket": {"length": 0.12, "height": 0.09, "width": 0.06, "thickness": 0.015},
    "knob": {"radius": 0.04, "cap_height": 0.02, "stem_radius": 0.012, "stem_height": 0.04},
}

_INSIDE_TOL = 1e-9


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    dimensions: dict = field(default_factory=dict)
    sample_count: int = 1024

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; choose from {SHAPE_KINDS}")
        dims = dict(DEFAULT_DIMENSIONS[self.kind])
        unknown = set(self.dimensions) - set(dims)
        if unknown:
            raise ValueError(f"unknown dimensions for {self.kind}: {sorted(unknown)}")
        dims.update(self.dimensions)
        if any(v <= 0 for v in dims.values()):
            raise ValueError(f"dimensions must be positive: {dims}")
        if self.sample_count < 16:
            raise ValueError("sample_count must be >= 16")
        object.__setattr__(self, "dimensions", dims)

    @property
    def true_symmetry(self):
        if self.kind in ("cylinder", "cone", "knob"):
            return SymmetrySpec.rotational(2)
        if self.kind in ("box", "cube"):
            return SymmetrySpec.mirror(np.eye(3))
        return SymmetrySpec.asymmetric()


# --- primitives -------------------------------------------------------------


class _Cuboid:
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        ext = self.hi - self.lo
        # faces: (normal axis, side) -> area
        self.faces = [(ax, side) for ax in range(3) for side in (0, 1)]
        self.face_area = np.array([np.prod(np.delete(ext, ax)) for ax, _ in self.faces])
        self.area = self.face_area.sum()

    def sample(self, rng, n):
        idx = rng.choice(len(self.faces), size=n, p=self.face_area / self.area)
        pts = self.lo + rng.random((n, 3)) * (self.hi - self.lo)
        for f, (ax, side) in enumerate(self.faces):
            sel = idx == f
            pts[sel, ax] = self.hi[ax] if side else self.lo[ax]
        return pts

    def bounds(self):
        return self.lo, self.hi

    def inside(self, p):
        return np.all((p > self.lo + _INSIDE_TOL) & (p < self.hi - _INSIDE_TOL), axis=1)


class _Frustum:
    """Solid of revolution about z between z0 and z1 with radii r0 and r1."""

    def __init__(self, r0, r1, z0, z1):
        self.r0, self.r1, self.z0, self.z1 = float(r0), float(r1), float(z0), float(z1)
        h = z1 - z0
        slant = np.hypot(h, r1 - r0)
        self.parts = np.array([np.pi * (r0 + r1) * slant, np.pi * r0**2, np.pi * r1**2])
        self.area = self.parts.sum()

    def sample(self, rng, n):
        idx = rng.choice(3, size=n, p=self.parts / self.area)
        phi = rng.random(n) * 2.0 * np.pi
        u = rng.random(n)
        pts = np.empty((n, 3))
        lat = idx == 0
        if self.r0 == self.r1:
            t = u[lat]
        else:
            # radius linear in t, density proportional to radius
            a, b = self.r0, self.r1
            t = (np.sqrt(a * a + u[lat] * (b * b - a * a)) - a) / (b - a)
        r = self.r0 + t * (self.r1 - self.r0)
        pts[lat] = np.stack([r * np.cos(phi[lat]), r * np.sin(phi[lat]), self.z0 + t * (self.z1 - self.z0)], 1)
        for k, (rad, z) in enumerate(((self.r0, self.z0), (self.r1, self.z1)), start=1):
            sel = idx == k
            rr = rad * np.sqrt(u[sel])
            pts[sel] = np.stack([rr * np.cos(phi[sel]), rr * np.sin(phi[sel]), np.full(sel.sum(), z)], 1)
        return pts

    def bounds(self):
        r = max(self.r0, self.r1)
        return np.array([-r, -r, self.z0]), np.array([r, r, self.z1])

    def inside(self, p):
        z = p[:, 2]
        t = (z - self.z0) / (self.z1 - self.z0)
        r = self.r0 + t * (self.r1 - self.r0)
        rho = np.hypot(p[:, 0], p[:, 1])
        return (z > self.z0 + _INSIDE_TOL) & (z < self.z1 - _INSIDE_TOL) & (rho < r - _INSIDE_TOL)


def _primitives(spec):
    d = spec.dimensions
    k = spec.kind
    if k == "cylinder":
        h = d["height"]
        return [_Frustum(d["radius"], d["radius"], -h / 2, h / 2)]
    if k == "cone":
        h = d["height"]
        # apex radius of zero drops the top disc from the sampling weights
        return [_Frustum(d["radius"], 0.0, -h / 2, h / 2)]
    if k == "box":
        half = np.array([d["x"], d["y"], d["z"]]) / 2
        return [_Cuboid(-half, half)]
    if k == "cube":
        half = np.full(3, d["side"] / 2)
        return [_Cuboid(-half, half)]
    if k == "l_bracket":
        L, H, W, T = d["length"], d["height"], d["width"], d["thickness"]
        # narrower, off-centre upright keeps every plane asymmetric
        base = _Cuboid([0, 0, 0], [L, T, W])
        upright = _Cuboid([0, T / 2, 0], [T, H, 0.6 * W])
        return [base, upright]
    if k == "knob":
        R, hc, rs, hs = d["radius"], d["cap_height"], d["stem_radius"], d["stem_height"]
        cap = _Frustum(R, R, hs, hs + hc)
        # the stem reaches into the cap so its top disc is interior
        stem = _Frustum(rs, rs, 0.0, hs + 0.5 * hc)
        return [cap, stem]
    raise ValueError(k)


def gen_shape(spec, seed=0):
    """Sample ``spec.sample_count`` surface points, deterministic under ``seed``."""
    rng = np.random.default_rng(seed)
    prims = _primitives(spec)
    areas = np.array([p.area for p in prims])
    n = spec.sample_count
    chunks = []
    have = 0
    while have < n:
        m = max(2 * (n - have), 64)
        which = rng.choice(len(prims), size=m, p=areas / areas.sum())
        pts = np.empty((m, 3))
        for i, prim in enumerate(prims):
            sel = which == i
            pts[sel] = prim.sample(rng, int(sel.sum()))
        keep = np.ones(m, dtype=bool)
        for i, prim in enumerate(prims):
            keep &= ~((which != i) & prim.inside(pts))
        pts = pts[keep]
        chunks.append(pts)
        have += len(pts)
    P = np.concatenate(chunks)[:n]
    lo = np.min([p.bounds()[0] for p in prims], axis=0)
    hi = np.max([p.bounds()[1] for p in prims], axis=0)
    return P - 0.5 * (lo + hi)

"""Axis and mirror-plane recovery rates per shape over many samplings.

For rotational shapes, reports how often the estimated axis lies within
``--tol`` degrees of z. For mirror shapes, reports how often all three
canonical planes are retained.
"""

import argparse
import math
import sys

import numpy as np

from s3pose.errors import NoPlaneRetained
from s3pose.shapes import ShapeSpec, gen_shape
from s3pose.symmetry import MIRROR, ROTATIONAL, estimate_mirror_planes, estimate_rotational_axis


def sweep(kind, n, tol, probe_angles):
    spec = ShapeSpec(kind)
    hits = 0
    errs = []
    for seed in range(n):
        P = gen_shape(spec, seed=seed)
        if spec.true_symmetry.kind == ROTATIONAL:
            axis, _ = estimate_rotational_axis(P, probe_angles)
            err = math.degrees(math.acos(min(1.0, abs(axis[2]))))
            errs.append(err)
            hits += err <= tol
        else:
            try:
                est = estimate_mirror_planes(P, n_probe_angles=probe_angles)
            except NoPlaneRetained:
                continue
            hits += est.omega == 3
    return hits, errs


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--shapes", nargs="+", default=["cylinder", "cone", "knob", "box", "cube"])
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--tol", type=float, default=5.0, help="axis tolerance in degrees")
    p.add_argument("--probe-angles", type=int, default=8)
    args = p.parse_args(argv)

    for kind in args.shapes:
        sym = ShapeSpec(kind).true_symmetry.kind
        if sym not in (ROTATIONAL, MIRROR):
            print(f"{kind:10s} skipped (asymmetric)")
            continue
        hits, errs = sweep(kind, args.n, args.tol, args.probe_angles)
        extra = f"  median axis err {np.median(errs):.2f} deg, max {np.max(errs):.2f}" if errs else ""
        print(f"{kind:10s} {sym:10s} {hits}/{args.n}{extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

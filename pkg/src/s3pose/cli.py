"""Command-line front end: gen, scene, fit, sym, bench.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, io
from .errors import ConfigError, NumericalError, S3PoseError
from .fitter import BLIND, SUPERVISED, FitConfig, fit_pose
from .shapes import SHAPE_KINDS, ShapeSpec, gen_shape
from .symmetry import KINDS, MIRROR, ROTATIONAL, estimate_mirror_planes, estimate_rotational_axis

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _fmt(v):
    if isinstance(v, np.ndarray):
        return "[" + ", ".join(f"{x:.10g}" for x in v.ravel()) + "]"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _fit_config(args):
    cfg = bench.load_config(args.config) if args.config else bench.BenchConfig()
    fit = cfg.fit
    if args.seed is not None:
        fit = replace(fit, seed=args.seed)
    return replace(cfg, fit=fit)


def cmd_gen(args):
    spec = ShapeSpec(args.shape, sample_count=args.n_points)
    P = gen_shape(spec, seed=args.seed or 0)
    io.write_xyz(args.out, P, header=f"shape={args.shape} seed={args.seed or 0} n={len(P)}")
    print(f"wrote {len(P)} points to {args.out}")
    return EXIT_OK


def cmd_scene(args):
    spec = ShapeSpec(args.shape, sample_count=args.n_points)
    seed = args.seed or 0
    sc = bench.make_scene(spec, seed, args.noise, args.crop)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_xyz(out / "model.xyz", sc.model, header=f"model shape={args.shape}")
    io.write_xyz(out / "observed.xyz", sc.observed, header=f"observed shape={args.shape}")
    io.write_pose(
        out / "gt.json",
        sc.gt,
        shape=args.shape,
        sym_kind=spec.true_symmetry.kind,
        seed=seed,
        noise_sigma=args.noise,
        crop_fraction=args.crop,
    )
    print(f"wrote scene to {out}")
    return EXIT_OK


def cmd_fit(args):
    cfg = _fit_config(args)
    d = Path(args.scene)
    model = io.read_xyz(d / "model.xyz")
    observed = io.read_xyz(d / "observed.xyz")
    gt, meta = io.read_pose(d / "gt.json")
    shape = meta.get("shape")
    sym = ShapeSpec(shape).true_symmetry if shape in SHAPE_KINDS else None
    sym_kind = args.sym or meta.get("sym_kind") or (sym.kind if sym else None)
    if sym_kind not in KINDS:
        raise ConfigError("symmetry kind unknown; pass --sym", field="sym")
    mode = args.mode or cfg.mode
    rep = fit_pose(observed, model, sym_kind, cfg.fit, q_gt=gt.rotation if mode == SUPERVISED else None, mode=mode)
    lines = [
        ("mode", rep.mode),
        ("sym_kind", sym_kind),
        ("rotation_wxyz", rep.estimate.rotation),
        ("translation_m", rep.estimate.translation),
        ("final_objective", rep.final_objective),
        ("estimated_symmetry", rep.estimated_symmetry.kind),
        ("axis_distribution", rep.estimated_symmetry.axis_distribution),
        ("plane_normals", rep.estimated_symmetry.plane_normals),
        ("failed_candidates", int(rep.failed.sum())),
        ("best_candidate_objective", float(np.min(rep.per_candidate_final_objectives))),
    ]
    if sym is not None:
        lines.append(("rot_err_deg", bench.rot_error_mod_sym(rep.estimate.rotation, gt.rotation, sym)))
    lines.append(("trans_err_cm", bench.trans_error(rep.estimate.translation, gt.translation)))
    for k, v in lines:
        print(f"{k}: {_fmt(v)}")
    return EXIT_OK


def cmd_sym(args):
    P = io.read_xyz(args.cloud)
    if args.kind == ROTATIONAL:
        axis, pi = estimate_rotational_axis(P, args.probe_angles)
        print(f"axis: {_fmt(axis)}")
        print(f"axis_distribution: {_fmt(pi)}")
    else:
        spec, triple, scores = estimate_mirror_planes(P, args.keep_threshold, args.probe_angles, return_scores=True)
        print(f"axis_distribution: {_fmt(spec.axis_distribution)}")
        for n, s in zip(triple, scores):
            print(f"plane: {_fmt(n)} score: {_fmt(float(s))} kept: {bool(s >= args.keep_threshold)}")
        print(f"omega: {spec.omega}")
    return EXIT_OK


def cmd_bench(args):
    cfg = _fit_config(args)
    if args.n_scenes is not None:
        if args.n_scenes < 0:
            raise ConfigError("must be >= 0", field="--n-scenes")
        cfg = replace(cfg, n_scenes=args.n_scenes)
    if args.shape:
        cfg = replace(cfg, kinds=tuple(args.shape))
    if args.mode:
        cfg = replace(cfg, mode=args.mode)
    overall, per_shape, _ = bench.run_benchmark(cfg, args.out)
    print(overall.summary("all"))
    for k, rep in per_shape.items():
        print(rep.summary(k))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="s3pose", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a shape surface to an .xyz file")
    g.add_argument("--shape", choices=SHAPE_KINDS, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--n-points", type=int, default=1024)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("scene", help="write model.xyz, observed.xyz and gt.json into a directory")
    s.add_argument("--shape", choices=SHAPE_KINDS, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--n-points", type=int, default=1024)
    s.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma in meters")
    s.add_argument("--crop", type=float, default=0.0, help="fraction removed by a half-space crop")
    s.set_defaults(func=cmd_scene)

    f = sub.add_parser("fit", help="fit one scene directory and print the report")
    f.add_argument("scene", help="directory written by the scene command")
    f.add_argument("--mode", choices=(SUPERVISED, BLIND))
    f.add_argument("--seed", type=int)
    f.add_argument("--config")
    f.add_argument("--sym", choices=KINDS, help="override the symmetry kind stored with the scene")
    f.set_defaults(func=cmd_fit)

    y = sub.add_parser("sym", help="estimate the symmetry axis or mirror planes of a cloud")
    y.add_argument("cloud")
    y.add_argument("--kind", choices=(ROTATIONAL, MIRROR), default=ROTATIONAL)
    y.add_argument("--keep-threshold", type=float, default=FitConfig.keep_threshold)
    y.add_argument("--probe-angles", type=int, default=FitConfig.n_probe_angles)
    y.set_defaults(func=cmd_sym)

    b = sub.add_parser("bench", help="run the synthetic benchmark and write CSV + summary")
    b.add_argument("--config")
    b.add_argument("--out", default=".", help="directory for the CSV and summary files")
    b.add_argument("--seed", type=int, help="master seed override")
    b.add_argument("--n-scenes", type=int)
    b.add_argument("--shape", action="append", choices=SHAPE_KINDS)
    b.add_argument("--mode", choices=(SUPERVISED, BLIND))
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (S3PoseError, ValueError) as e:
        # malformed point files and invalid arguments surface as ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

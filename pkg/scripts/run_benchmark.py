"""Run the synthetic benchmark from a config file and print the summary.

    python3 scripts/run_benchmark.py configs/example.ini --out runs/example
"""

import argparse
import sys
import time
from dataclasses import replace

from s3pose.bench import load_config, run_benchmark


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("--out", default="runs")
    p.add_argument("--workers", type=int, help="override the worker count from the config")
    args = p.parse_args(argv)

    cfg = load_config(args.config)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    t0 = time.perf_counter()
    overall, per_shape, rows = run_benchmark(cfg, args.out)
    print(overall.summary("all"))
    for kind, rep in per_shape.items():
        print(rep.summary(kind))
    print(f"{len(rows)} scenes in {time.perf_counter() - t0:.1f} s; CSV in {args.out}/{cfg.csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

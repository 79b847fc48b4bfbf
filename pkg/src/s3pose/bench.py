"""Synthetic scenes, pose metrics and the batch benchmark."""

import configparser
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from . import quat
from .errors import ConfigError, S3PoseError
from .fitter import BLIND, SUPERVISED, FitConfig, fit_pose
from .shapes import SHAPE_KINDS, ShapeSpec, gen_shape
from .symmetry import ASYMMETRIC, SymmetrySpec, equivalent_set

AP_THRESHOLDS = ((10.0, 10.0), (5.0, 5.0), (5.0, 2.0), (10.0, 5.0))
EVAL_N_EQ = 360
CSV_COLUMNS = ("scene_id", "shape", "sym_kind", "rot_err_deg", "trans_err_cm", "fit_objective", "seed")


@dataclass(frozen=True)
class Scene:
    model: np.ndarray
    observed: np.ndarray
    gt: quat.PoseEstimate
    noise_sigma: float = 0.0
    crop_fraction: float = 0.0


def make_scene(spec, pose_seed, noise_sigma=0.0, crop_fraction=0.0, model=None):
    """Pose a sampled model, add Gaussian noise, then crop a half-space.

    The crop drops the ``floor(crop_fraction * n)`` points with the largest
    coordinate along a random direction.
    """
    if not 0.0 <= crop_fraction <= 0.5:
        raise ValueError("crop_fraction must lie in [0, 0.5]")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    rng = np.random.default_rng(pose_seed)
    if model is None:
        model = gen_shape(spec, seed=int(rng.integers(2**31)))
    q = quat.random_quaternions(rng)
    t = rng.uniform(-0.5, 0.5, 3)
    gt = quat.PoseEstimate(q, t)
    obs = gt.apply(model)
    if noise_sigma > 0:
        obs = obs + rng.normal(0.0, noise_sigma, obs.shape)
    n_drop = int(math.floor(crop_fraction * len(obs)))
    if n_drop:
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        keep = np.sort(np.argsort(obs @ d, kind="stable")[: len(obs) - n_drop])
        obs = obs[keep]
    return Scene(model, obs, gt, noise_sigma, crop_fraction)


# --- metrics -----------------------------------------------------------------


def rot_error_mod_sym(q_pred, q_gt, sym, n_eq=EVAL_N_EQ):
    """Smallest rotation angle (degrees) from ``q_pred`` to any equivalent of ``q_gt``."""
    eq = equivalent_set(sym, q_gt, n_eq)
    return float(np.degrees(quat.angular_distance(np.asarray(q_pred)[None, :], eq.quaternions).min()))


def trans_error(t_pred, t_gt):
    return float(np.linalg.norm(np.asarray(t_pred, dtype=float) - np.asarray(t_gt, dtype=float)) * 100.0)


def ap_at_thresholds(results, thresholds=AP_THRESHOLDS):
    """Percentage of (deg, cm) results within each (D, C) threshold pair.

    NaN entries (failed scenes) count as misses.
    """
    r = np.asarray(results, dtype=float).reshape(-1, 2)
    if len(r) == 0:
        raise ValueError("no results")
    with np.errstate(invalid="ignore"):
        return {
            (D, C): float(100.0 * np.count_nonzero((r[:, 0] <= D) & (r[:, 1] <= C)) / len(r)) for D, C in thresholds
        }


@dataclass
class MetricsReport:
    per_scene: List[Tuple[float, float]] = field(default_factory=list)
    averages: Dict[str, float] = field(default_factory=dict)
    ap: Dict[Tuple[float, float], float] = field(default_factory=dict)

    @classmethod
    def from_results(cls, results):
        rep = cls(per_scene=list(results))
        if results:
            r = np.asarray(results, dtype=float)
            ok = np.all(np.isfinite(r), axis=1)
            good = r[ok]
            if len(good):
                rep.averages = {
                    "rot_err_deg": float(good[:, 0].mean()),
                    "trans_err_cm": float(good[:, 1].mean()),
                    "median_rot_err_deg": float(np.median(good[:, 0])),
                    "median_trans_err_cm": float(np.median(good[:, 1])),
                }
            rep.averages["failures"] = int((~ok).sum())
            rep.ap = ap_at_thresholds(r)
        return rep

    def summary(self, title="all"):
        lines = [f"[{title}] scenes={len(self.per_scene)} failures={self.averages.get('failures', 0)}"]
        for key in ("rot_err_deg", "median_rot_err_deg", "trans_err_cm", "median_trans_err_cm"):
            if key in self.averages:
                lines.append(f"  {key:<20s} {self.averages[key]:.4f}")
        for (D, C), v in self.ap.items():
            label = f"AP {D:g}deg{C:g}cm"
            lines.append(f"  {label:<20s} {v:.2f}")
        return "\n".join(lines)


# --- benchmark -----------------------------------------------------------------


@dataclass(frozen=True)
class BenchConfig:
    kinds: Tuple[str, ...] = ("cylinder", "box", "l_bracket")
    n_scenes: int = 10
    sample_count: int = 1024
    mode: str = SUPERVISED
    fit: FitConfig = FitConfig()
    noise_sigma: float = 0.0
    crop_fraction: float = 0.0
    csv_path: str = "results.csv"
    summary_path: str = "summary.txt"
    workers: int = 1


def _line_of(text, section, key=None):
    sec = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            sec = line[1:-1].strip()
            if key is None and sec == section:
                return i
        elif sec == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip() == key:
                return i
    return None


_INT_FIELDS = {f for f in FitConfig.field_names() if isinstance(getattr(FitConfig(), f), int)}


def parse_config(text):
    """Parse an INI benchmark configuration.

    Sections: ``[shapes]`` (kinds, n_scenes, sample_count), ``[fit]`` (mode,
    workers and every FitConfig field; ``seed`` is the master seed),
    ``[noise]`` (sigma, crop) and ``[output]`` (csv, summary).

    Raises:
        ConfigError: with the offending field and line.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse config: {e.message if hasattr(e, 'message') else e}", line=getattr(e, "lineno", None)) from e
    allowed = {
        "shapes": {"kinds", "n_scenes", "sample_count"},
        "fit": set(FitConfig.field_names()) | {"mode", "workers"},
        "noise": {"sigma", "crop"},
        "output": {"csv", "summary"},
    }
    for sec in cp.sections():
        if sec not in allowed:
            raise ConfigError(f"unknown section [{sec}]", line=_line_of(text, sec), field=sec)
        for key in cp[sec]:
            if key not in allowed[sec]:
                raise ConfigError("unknown key", line=_line_of(text, sec, key), field=f"{sec}.{key}")

    def get(sec, key, conv, default):
        if not cp.has_option(sec, key):
            return default
        raw = cp.get(sec, key)
        try:
            return conv(raw)
        except ValueError as e:
            raise ConfigError(f"invalid value {raw!r}: {e}", line=_line_of(text, sec, key), field=f"{sec}.{key}") from e

    def kinds_conv(raw):
        kinds = tuple(k.strip() for k in raw.split(",") if k.strip())
        bad = [k for k in kinds if k not in SHAPE_KINDS]
        if bad:
            raise ValueError(f"unknown shapes {bad}; choose from {SHAPE_KINDS}")
        return kinds

    def mode_conv(raw):
        if raw not in (SUPERVISED, BLIND):
            raise ValueError("mode must be 'supervised' or 'blind'")
        return raw

    fit_kwargs = {}
    for name in FitConfig.field_names():
        conv = int if name in _INT_FIELDS else float
        value = get("fit", name, conv, None)
        if value is not None:
            fit_kwargs[name] = value
    try:
        fit_cfg = FitConfig(**fit_kwargs)
    except ValueError as e:
        raise ConfigError(str(e), line=_line_of(text, "fit"), field="fit") from e

    cfg = BenchConfig(
        kinds=get("shapes", "kinds", kinds_conv, BenchConfig.kinds),
        n_scenes=get("shapes", "n_scenes", int, BenchConfig.n_scenes),
        sample_count=get("shapes", "sample_count", int, BenchConfig.sample_count),
        mode=get("fit", "mode", mode_conv, BenchConfig.mode),
        fit=fit_cfg,
        noise_sigma=get("noise", "sigma", float, 0.0),
        crop_fraction=get("noise", "crop", float, 0.0),
        csv_path=get("output", "csv", str, BenchConfig.csv_path),
        summary_path=get("output", "summary", str, BenchConfig.summary_path),
        workers=get("fit", "workers", int, 1),
    )
    checks = [
        (cfg.n_scenes >= 0, "shapes.n_scenes", "must be >= 0"),
        (cfg.sample_count >= 16, "shapes.sample_count", "must be >= 16"),
        (cfg.noise_sigma >= 0, "noise.sigma", "must be >= 0"),
        (0.0 <= cfg.crop_fraction <= 0.5, "noise.crop", "must lie in [0, 0.5]"),
        (cfg.workers >= 1, "fit.workers", "must be >= 1"),
    ]
    for ok, fld, msg in checks:
        if not ok:
            sec, key = fld.split(".")
            raise ConfigError(msg, line=_line_of(text, sec, key), field=fld)
    return cfg


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    return parse_config(text)


def scene_seed(master_seed, scene_id):
    return int(np.random.SeedSequence([int(master_seed), int(scene_id)]).generate_state(1)[0])


def run_scene(kind, scene_id, cfg):
    """Generate and fit one scene; returns a CSV row dict. Failures become misses."""
    seed = scene_seed(cfg.fit.seed, scene_id)
    spec = ShapeSpec(kind, sample_count=cfg.sample_count)
    sym = spec.true_symmetry
    scene = make_scene(spec, seed, cfg.noise_sigma, cfg.crop_fraction)
    row = {"scene_id": scene_id, "shape": kind, "sym_kind": sym.kind, "seed": seed}
    try:
        fit_cfg = replace(cfg.fit, seed=seed)
        q_gt = scene.gt.rotation if cfg.mode == SUPERVISED else None
        rep = fit_pose(scene.observed, scene.model, sym.kind, fit_cfg, q_gt=q_gt, mode=cfg.mode)
    except (S3PoseError, ArithmeticError):
        row.update(rot_err_deg=float("nan"), trans_err_cm=float("nan"), fit_objective=float("nan"))
        return row
    row.update(
        rot_err_deg=rot_error_mod_sym(rep.estimate.rotation, scene.gt.rotation, sym),
        trans_err_cm=trans_error(rep.estimate.translation, scene.gt.translation),
        fit_objective=rep.final_objective,
    )
    return row


def _run_scene_args(args):
    return run_scene(*args)


def format_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r[c] if not isinstance(r[c], float) else repr(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def run_benchmark(cfg, out_dir=None):
    """Run every configured scene and write the CSV and summary files.

    Returns (overall MetricsReport, per-shape reports, rows).
    """
    jobs = []
    sid = 0
    for kind in cfg.kinds:
        for _ in range(cfg.n_scenes):
            jobs.append((kind, sid, cfg))
            sid += 1
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(_run_scene_args, jobs))
    else:
        rows = [run_scene(*j) for j in jobs]

    overall = MetricsReport.from_results([(r["rot_err_deg"], r["trans_err_cm"]) for r in rows])
    per_shape = {
        k: MetricsReport.from_results([(r["rot_err_deg"], r["trans_err_cm"]) for r in rows if r["shape"] == k])
        for k in cfg.kinds
    }
    out_dir = Path(out_dir) if out_dir is not None else Path(".")
    csv_path = out_dir / cfg.csv_path
    summary_path = out_dir / cfg.summary_path
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(format_csv(rows), encoding="utf-8")
    parts = [overall.summary("all")] + [rep.summary(k) for k, rep in per_shape.items()]
    summary_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return overall, per_shape, rows

"""Plain-text point clouds and JSON ground-truth poses."""

import json
from pathlib import Path

import numpy as np

from . import quat


def write_xyz(path, points, header=None):
    """One ``x y z`` line per point, full double precision, LF newlines."""
    P = np.asarray(points, dtype=float).reshape(-1, 3)
    lines = []
    if header:
        lines += [f"# {h}" for h in str(header).splitlines()]
    lines += ["%.17g %.17g %.17g" % tuple(p) for p in P]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_xyz(path):
    """Read a point cloud; blank lines and ``#`` comments are skipped.

    Raises:
        ValueError: on a line that is not three floats.
    """
    pts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 values, got {len(parts)}")
            try:
                pts.append([float(x) for x in parts])
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from e
    return np.asarray(pts, dtype=float).reshape(-1, 3)


def pose_to_dict(pose):
    return {"rotation_wxyz": [float(x) for x in pose.rotation], "translation_m": [float(x) for x in pose.translation]}


def pose_from_dict(d):
    try:
        return quat.PoseEstimate(np.asarray(d["rotation_wxyz"], dtype=float), np.asarray(d["translation_m"], dtype=float))
    except KeyError as e:
        raise ValueError(f"pose is missing field {e}") from e


def write_pose(path, pose, **extra):
    payload = dict(extra)
    payload.update(pose_to_dict(pose))
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_pose(path):
    """Returns (PoseEstimate, the full JSON dict)."""
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return pose_from_dict(d), d

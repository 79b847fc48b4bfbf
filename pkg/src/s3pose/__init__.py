"""Symmetry-aware rigid pose fitting on the unit-quaternion manifold."""

from . import quat
from .errors import (
    ConfigError,
    DegenerateAxis,
    DegenerateCovariance,
    DegenerateMean,
    EmptyPlaneSet,
    NearZeroNorm,
    NoPlaneRetained,
    NonFiniteObjective,
    NumericalError,
    ParallelInput,
    S3PoseError,
)
from .fitter import FitConfig, FitReport, fit_pose
from .quat import PoseEstimate, RigidTransform
from .shapes import ShapeSpec, gen_shape
from .symmetry import SymmetrySpec, equivalent_set

__all__ = [
    "ConfigError",
    "DegenerateAxis",
    "DegenerateCovariance",
    "DegenerateMean",
    "EmptyPlaneSet",
    "FitConfig",
    "FitReport",
    "NearZeroNorm",
    "NoPlaneRetained",
    "NonFiniteObjective",
    "NumericalError",
    "ParallelInput",
    "PoseEstimate",
    "RigidTransform",
    "S3PoseError",
    "ShapeSpec",
    "SymmetrySpec",
    "equivalent_set",
    "fit_pose",
    "gen_shape",
    "quat",
]

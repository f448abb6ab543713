"""Elastic shape analysis of framed space curves.

Framed curves are lifted to quaternionic paths; open curves then live on a
Hilbert sphere and closed curves on a Grassmannian of 2-planes, where
geodesics, distances, means and clusterings have closed-form or simple
iterative solutions.
"""

from .curvecore import (
    Closure,
    ClosureClass,
    FramedCurve,
    GrassmannPoint,
    GridSpec,
    Parity,
    QuaternionPath,
    Sign,
    StiefelPoint,
    hopf_map,
    lift,
    linking_parity,
    normalize_length,
    resample,
    to_stiefel,
)
from .frames import add_full_twist, frenet_frame, rmf_frame, rotate_frame
from .geodesic import GeodesicPath, Mode, geodesic, shape_distance
from .metric import ElasticParams, TangentField, elastic_metric, gS, grassmann_distance, sphere_distance
from .planar import planar_srt, planar_srt_inverse
from .registration import DPConfig, RegistrationResult, Warp, dp_reparam, optimal_rotation, optimal_twist
from .stats import distance_matrix, flag_mean, k_medoids, mean_closed_curves

__version__ = "0.1.0"

__all__ = [
    "Closure",
    "ClosureClass",
    "DPConfig",
    "ElasticParams",
    "FramedCurve",
    "GeodesicPath",
    "GrassmannPoint",
    "GridSpec",
    "Mode",
    "Parity",
    "QuaternionPath",
    "RegistrationResult",
    "Sign",
    "StiefelPoint",
    "TangentField",
    "Warp",
    "add_full_twist",
    "distance_matrix",
    "dp_reparam",
    "elastic_metric",
    "flag_mean",
    "frenet_frame",
    "gS",
    "geodesic",
    "grassmann_distance",
    "hopf_map",
    "k_medoids",
    "lift",
    "linking_parity",
    "mean_closed_curves",
    "normalize_length",
    "optimal_rotation",
    "optimal_twist",
    "planar_srt",
    "planar_srt_inverse",
    "resample",
    "rmf_frame",
    "rotate_frame",
    "shape_distance",
    "sphere_distance",
    "to_stiefel",
]

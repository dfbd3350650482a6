"""Monocular 3D shuttlecock trajectory reconstruction."""

from ._shuttle3d import (
    CameraModel,
    Error,
    InitialConditions,
    InvalidInput,
    NumericalError,
    calibrate_dlt,
    court_reference_points,
    detect_court,
    detection_iou,
    hit_metrics,
    integrate,
    landing,
    look_at_camera,
    naive_postprocess,
    optimize_hits,
    out_of_court_distance,
    reconstruct_shot,
    render_court,
)

__all__ = [
    "CameraModel",
    "Error",
    "InitialConditions",
    "InvalidInput",
    "NumericalError",
    "calibrate_dlt",
    "court_reference_points",
    "detect_court",
    "detection_iou",
    "hit_metrics",
    "integrate",
    "landing",
    "look_at_camera",
    "naive_postprocess",
    "optimize_hits",
    "out_of_court_distance",
    "reconstruct_shot",
    "render_court",
]

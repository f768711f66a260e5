"""Learning-free 3D multi-object tracking on detection boxes.

The pipeline per frame: predict every live trajectory with its category's
motion model, filter and deduplicate the incoming detections, assign
detections to trajectories in two gated rounds, update matched filters,
start tentative trajectories from the leftovers, and age out the misses.
"""

from .association import (
    AssociationParams,
    AssociationResult,
    CostMatrix,
    INVALID_COST,
    associate,
    build_cost_matrix,
    hungarian,
)
from .clearmetrics import CategoryCounts, ClearReport, evaluate_clear
from .config import (
    CategoryConfig,
    ConfigError,
    TrackerConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
)
from .dataio import (
    ResultRecord,
    SchemaError,
    load_detections,
    load_results,
    quaternion_to_yaw,
    records_by_scene,
    write_detections,
    write_results,
)
from .geometry import (
    BoxState,
    MetricKind,
    d_eucl,
    giou_3d,
    giou_bev,
    iou_3d,
    iou_bev,
    metric_matrix,
    wrap_angle,
)
from .lifecycle import Tracker, TrackStatus, Trajectory, track_scene, track_scenes
from .motion import (
    BicState,
    CtraState,
    ModelKind,
    MotionParams,
    TrackState,
    bicycle_transition,
    ctra_transition,
    init_track,
    make_motion_params,
    measure,
    predict,
    update,
)
from .preprocessing import DetectionFrame, nms, nms_keep_indices, preprocess, score_filter
from .sim import (
    NoiseSpec,
    SceneSpec,
    SyntheticScene,
    TrajectoryTemplate,
    crossing_scene_spec,
    default_scene_spec,
    generate_scene,
    min_gt_separation,
    scene_detections,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationParams",
    "AssociationResult",
    "BicState",
    "BoxState",
    "CategoryConfig",
    "CategoryCounts",
    "ClearReport",
    "ConfigError",
    "CostMatrix",
    "CtraState",
    "DetectionFrame",
    "INVALID_COST",
    "MetricKind",
    "ModelKind",
    "MotionParams",
    "NoiseSpec",
    "ResultRecord",
    "SceneSpec",
    "SchemaError",
    "SyntheticScene",
    "TrackState",
    "TrackStatus",
    "Tracker",
    "TrackerConfig",
    "Trajectory",
    "TrajectoryTemplate",
    "associate",
    "bicycle_transition",
    "build_cost_matrix",
    "config_from_dict",
    "config_to_dict",
    "crossing_scene_spec",
    "ctra_transition",
    "d_eucl",
    "default_scene_spec",
    "evaluate_clear",
    "generate_scene",
    "min_gt_separation",
    "giou_3d",
    "giou_bev",
    "hungarian",
    "init_track",
    "iou_3d",
    "iou_bev",
    "load_config",
    "load_detections",
    "load_results",
    "make_motion_params",
    "measure",
    "metric_matrix",
    "nms",
    "nms_keep_indices",
    "predict",
    "preprocess",
    "quaternion_to_yaw",
    "records_by_scene",
    "save_config",
    "scene_detections",
    "score_filter",
    "track_scene",
    "track_scenes",
    "update",
    "wrap_angle",
    "write_detections",
    "write_results",
]

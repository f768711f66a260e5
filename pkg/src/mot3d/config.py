"""Tracker configuration: defaults, YAML I/O, validation, derived params.

A config is a set of global scalars plus a per-category table. The built-in
table covers the seven categories the default tuning was chosen for; YAML
entries override or extend it key by key, and categories never seen before
fall back to the default row at runtime (with a one-time warning).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional

import yaml

from .association import AssociationParams
from .geometry import MetricKind
from .motion import ModelKind, MotionParams, make_motion_params

logger = logging.getLogger("mot3d.config")

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for unknown keys, bad types, or out-of-range values."""


@dataclass(frozen=True)
class CategoryConfig:
    """Per-category tuning: motion model, match metric, gate, patience."""

    model: ModelKind = ModelKind.CTRA
    metric: MetricKind = MetricKind.GIOU_3D
    match_max_cost: float = 1.3
    max_age: int = 10

    def validate(self, name: str) -> None:
        if not isinstance(self.model, ModelKind):
            raise ConfigError(f"categories.{name}.model: unknown model {self.model!r}")
        if not isinstance(self.metric, MetricKind):
            raise ConfigError(f"categories.{name}.metric: unknown metric {self.metric!r}")
        if not self.match_max_cost > 0.0:
            raise ConfigError(f"categories.{name}.match_max_cost must be > 0")
        if not (isinstance(self.max_age, int) and self.max_age >= 0):
            raise ConfigError(f"categories.{name}.max_age must be an int >= 0")


# Tuning that works well on urban driving data: two-wheelers get the
# steering model, buses match best on footprint overlap, and the gates /
# patience windows differ per category.
DEFAULT_CATEGORIES: Dict[str, CategoryConfig] = {
    "bicycle": CategoryConfig(ModelKind.BICYCLE, MetricKind.GIOU_3D, 1.6, 10),
    "motorcycle": CategoryConfig(ModelKind.BICYCLE, MetricKind.GIOU_3D, 1.4, 20),
    "bus": CategoryConfig(ModelKind.CTRA, MetricKind.GIOU_BEV, 1.3, 10),
    "car": CategoryConfig(ModelKind.CTRA, MetricKind.GIOU_3D, 1.3, 15),
    "trailer": CategoryConfig(ModelKind.CTRA, MetricKind.GIOU_3D, 1.3, 10),
    "truck": CategoryConfig(ModelKind.CTRA, MetricKind.GIOU_3D, 1.2, 20),
    "pedestrian": CategoryConfig(ModelKind.CTRA, MetricKind.GIOU_3D, 1.7, 10),
}

DEFAULT_CATEGORY = CategoryConfig()

DEFAULT_PROCESS_STD: Dict[str, float] = {
    "pos": 0.5,
    "z": 0.1,
    "vel": 1.0,
    "vel_z": 0.5,
    "acc": 1.0,
    "yaw": 0.1,
    "turn": 0.3,
    "steer": 0.15,
    "size": 0.01,
}

DEFAULT_MEASUREMENT_STD: Dict[str, float] = {
    "pos": 0.3,
    "z": 0.3,
    "size": 0.1,
    "yaw": 0.1,
    "vel": 0.5,
}

DEFAULT_INITIAL_STD: Dict[str, float] = {
    "pos": 1.0,
    "z": 1.0,
    "vel": 2.0,
    "vel_z": 1.0,
    "acc": 3.0,
    "yaw": 0.5,
    "turn": 1.0,
    "steer": 0.5,
    "size": 0.1,
    "vel_no_obs": 10.0,
}


@dataclass
class TrackerConfig:
    """Everything the tracker needs, with working defaults throughout."""

    frame_interval_s: float = 0.5
    score_filter_min: float = 0.0
    nms_iou_max: float = 0.08
    cross_category_nms: bool = True
    output_nms_iou_max: float = 0.08
    second_stage_max_cost: float = 1.0
    hit_min: int = 0
    score_decay_rate: float = 0.05
    penalized_output_frames: int = 1
    use_velocity: bool = True
    pre_mask_thresholds: bool = False
    wheelbase_ratio: float = 0.8
    rear_axle_fraction: float = 0.5
    size_weight: float = 1.0
    distance_weight: float = 1.0
    process_std: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PROCESS_STD))
    measurement_std: Dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_MEASUREMENT_STD)
    )
    initial_std: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_INITIAL_STD))
    categories: Dict[str, CategoryConfig] = field(
        default_factory=lambda: dict(DEFAULT_CATEGORIES)
    )
    default_category: CategoryConfig = field(default_factory=lambda: DEFAULT_CATEGORY)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not self.frame_interval_s > 0.0:
            raise ConfigError("frame_interval_s must be > 0")
        if not 0.0 <= self.score_filter_min <= 1.0:
            raise ConfigError("score_filter_min must be in [0, 1]")
        for key in ("nms_iou_max", "output_nms_iou_max"):
            v = getattr(self, key)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{key} must be in [0, 1]")
        if not self.second_stage_max_cost > 0.0:
            raise ConfigError("second_stage_max_cost must be > 0")
        if not (isinstance(self.hit_min, int) and self.hit_min >= 0):
            raise ConfigError("hit_min must be an int >= 0")
        if self.score_decay_rate < 0.0:
            raise ConfigError("score_decay_rate must be >= 0")
        for key in ("cross_category_nms", "use_velocity", "pre_mask_thresholds"):
            if not isinstance(getattr(self, key), bool):
                raise ConfigError(f"{key} must be a boolean")
        if not (isinstance(self.penalized_output_frames, int) and self.penalized_output_frames >= 0):
            raise ConfigError("penalized_output_frames must be an int >= 0")
        if not 0.0 < self.wheelbase_ratio <= 1.0:
            raise ConfigError("wheelbase_ratio must be in (0, 1]")
        if not 0.4 <= self.rear_axle_fraction <= 0.5:
            raise ConfigError("rear_axle_fraction must be in [0.4, 0.5]")
        if self.size_weight < 0.0 or self.distance_weight < 0.0:
            raise ConfigError("size_weight and distance_weight must be >= 0")
        for name, table, allowed in (
            ("process_std", self.process_std, set(DEFAULT_PROCESS_STD)),
            ("measurement_std", self.measurement_std, set(DEFAULT_MEASUREMENT_STD)),
            ("initial_std", self.initial_std, set(DEFAULT_INITIAL_STD)),
        ):
            extra = set(table) - allowed
            if extra:
                raise ConfigError(f"{name}: unknown keys {sorted(extra)}")
            for key, value in table.items():
                if not (isinstance(value, (int, float)) and value > 0.0):
                    raise ConfigError(f"{name}.{key} must be > 0")
        for cat, row in self.categories.items():
            row.validate(cat)
        self.default_category.validate("default")

    # -- derived parameter objects -------------------------------------

    def category_profile(self, category: str) -> CategoryConfig:
        row = self.categories.get(category)
        if row is not None:
            return row
        if category not in self._warned_categories:
            self._warned_categories.add(category)
            logger.warning("category %r not configured; using default profile", category)
        return self.default_category

    _warned_categories: set = field(default_factory=set, init=False, repr=False, compare=False)

    def motion_params(self, category: str) -> MotionParams:
        profile = self.category_profile(category)
        key = (profile.model, self.frame_interval_s)
        cached = self._motion_cache.get(key)
        if cached is None:
            cached = make_motion_params(
                profile.model,
                self.frame_interval_s,
                process_std=self.process_std,
                measurement_std=self.measurement_std,
                initial_std=self.initial_std,
                wheelbase_ratio=self.wheelbase_ratio,
                rear_axle_fraction=self.rear_axle_fraction,
                use_velocity=self.use_velocity,
            )
            self._motion_cache[key] = cached
        return cached

    _motion_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def association_params(self) -> AssociationParams:
        return AssociationParams(
            stage1_kind={c: r.metric for c, r in self.categories.items()},
            stage1_max_cost={c: r.match_max_cost for c, r in self.categories.items()},
            default_kind=self.default_category.metric,
            default_max_cost=self.default_category.match_max_cost,
            second_stage_max_cost=self.second_stage_max_cost,
            size_weight=self.size_weight,
            distance_weight=self.distance_weight,
            pre_mask=self.pre_mask_thresholds,
        )

    def max_age(self, category: str) -> int:
        return self.category_profile(category).max_age

    def with_frame_interval(self, sigma_s: float) -> "TrackerConfig":
        return replace(self, frame_interval_s=sigma_s)


_GLOBAL_KEYS = {
    "frame_interval_s",
    "score_filter_min",
    "nms_iou_max",
    "cross_category_nms",
    "output_nms_iou_max",
    "second_stage_max_cost",
    "hit_min",
    "score_decay_rate",
    "penalized_output_frames",
    "use_velocity",
    "pre_mask_thresholds",
    "wheelbase_ratio",
    "rear_axle_fraction",
    "size_weight",
    "distance_weight",
    "process_std",
    "measurement_std",
    "initial_std",
}

_CATEGORY_KEYS = {"model", "metric", "match_max_cost", "max_age"}


def _parse_category_row(name: str, raw: Mapping[str, Any], base: CategoryConfig) -> CategoryConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"categories.{name} must be a mapping")
    extra = set(raw) - _CATEGORY_KEYS
    if extra:
        raise ConfigError(f"categories.{name}: unknown keys {sorted(extra)}")
    kwargs: Dict[str, Any] = {}
    if "model" in raw:
        try:
            kwargs["model"] = ModelKind(raw["model"])
        except ValueError:
            raise ConfigError(f"categories.{name}.model: unknown model {raw['model']!r}") from None
    if "metric" in raw:
        try:
            kwargs["metric"] = MetricKind(raw["metric"])
        except ValueError:
            raise ConfigError(
                f"categories.{name}.metric: unknown metric {raw['metric']!r}"
            ) from None
    if "match_max_cost" in raw:
        kwargs["match_max_cost"] = float(raw["match_max_cost"])
    if "max_age" in raw:
        if not isinstance(raw["max_age"], int) or isinstance(raw["max_age"], bool):
            raise ConfigError(f"categories.{name}.max_age must be an int")
        kwargs["max_age"] = raw["max_age"]
    return replace(base, **kwargs)


def config_from_dict(data: Optional[Mapping[str, Any]]) -> TrackerConfig:
    """Build a config from a parsed mapping; None or {} gives full defaults."""
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a mapping")
    known_top = {"schema_version", "global", "categories", "default_category"}
    extra = set(data) - known_top
    if extra:
        raise ConfigError(f"unknown top-level keys {sorted(extra)}")
    version = data.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")

    kwargs: Dict[str, Any] = {}
    raw_global = data.get("global", {}) or {}
    if not isinstance(raw_global, Mapping):
        raise ConfigError("global must be a mapping")
    extra = set(raw_global) - _GLOBAL_KEYS
    if extra:
        raise ConfigError(f"global: unknown keys {sorted(extra)}")
    for key, value in raw_global.items():
        if key in ("process_std", "measurement_std", "initial_std"):
            if not isinstance(value, Mapping):
                raise ConfigError(f"global.{key} must be a mapping")
            merged = dict(
                {
                    "process_std": DEFAULT_PROCESS_STD,
                    "measurement_std": DEFAULT_MEASUREMENT_STD,
                    "initial_std": DEFAULT_INITIAL_STD,
                }[key]
            )
            merged.update({k: float(v) for k, v in value.items()})
            kwargs[key] = merged
        else:
            kwargs[key] = value

    default_row = DEFAULT_CATEGORY
    if "default_category" in data and data["default_category"] is not None:
        default_row = _parse_category_row("default", data["default_category"], DEFAULT_CATEGORY)
    kwargs["default_category"] = default_row

    categories = dict(DEFAULT_CATEGORIES)
    raw_cats = data.get("categories", {}) or {}
    if not isinstance(raw_cats, Mapping):
        raise ConfigError("categories must be a mapping")
    for name, raw in raw_cats.items():
        base = categories.get(name, default_row)
        categories[name] = _parse_category_row(str(name), raw, base)
    kwargs["categories"] = categories

    try:
        return TrackerConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_to_dict(cfg: TrackerConfig) -> Dict[str, Any]:
    """Full explicit dict form; feeding it back reproduces the config."""
    return {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "global": {
            "frame_interval_s": cfg.frame_interval_s,
            "score_filter_min": cfg.score_filter_min,
            "nms_iou_max": cfg.nms_iou_max,
            "cross_category_nms": cfg.cross_category_nms,
            "output_nms_iou_max": cfg.output_nms_iou_max,
            "second_stage_max_cost": cfg.second_stage_max_cost,
            "hit_min": cfg.hit_min,
            "score_decay_rate": cfg.score_decay_rate,
            "penalized_output_frames": cfg.penalized_output_frames,
            "use_velocity": cfg.use_velocity,
            "pre_mask_thresholds": cfg.pre_mask_thresholds,
            "wheelbase_ratio": cfg.wheelbase_ratio,
            "rear_axle_fraction": cfg.rear_axle_fraction,
            "size_weight": cfg.size_weight,
            "distance_weight": cfg.distance_weight,
            "process_std": dict(cfg.process_std),
            "measurement_std": dict(cfg.measurement_std),
            "initial_std": dict(cfg.initial_std),
        },
        "categories": {
            name: {
                "model": row.model.value,
                "metric": row.metric.value,
                "match_max_cost": row.match_max_cost,
                "max_age": row.max_age,
            }
            for name, row in sorted(cfg.categories.items())
        },
        "default_category": {
            "model": cfg.default_category.model.value,
            "metric": cfg.default_category.metric.value,
            "match_max_cost": cfg.default_category.match_max_cost,
            "max_age": cfg.default_category.max_age,
        },
    }


def load_config(path: str) -> TrackerConfig:
    """Load a YAML config file. Empty file means all defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return config_from_dict(data)


def save_config(cfg: TrackerConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)

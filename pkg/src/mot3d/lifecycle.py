"""Trajectory lifecycle and the frame-by-frame tracker loop.

A trajectory is born TENTATIVE from an unmatched detection and becomes
ACTIVE once its consecutive hit count (birth included) reaches the
configured minimum; with the default of zero it is active immediately.
A tentative trajectory dies on its first miss. An active one survives
misses up to its category's patience window, its confidence decaying
each missed frame, and keeps appearing in the output for a limited
number of missed frames so short occlusions do not punch holes in the
track.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .association import associate
from .config import TrackerConfig
from .dataio import ResultRecord
from .geometry import BoxState
from .motion import TrackState, init_track, measure, predict, update
from .preprocessing import DetectionFrame, nms_keep_indices, preprocess

logger = logging.getLogger("mot3d.lifecycle")

# Sizes fed back into association and output come from the filter state and
# could be driven non-positive by pathological updates; clamp to keep the
# geometry well defined.
_MIN_SIZE = 1e-3


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    DEAD = "dead"


@dataclass
class Trajectory:
    """One tracked object and its bookkeeping counters."""

    track_id: int
    category: str
    state: TrackState
    score: float
    status: TrackStatus = TrackStatus.TENTATIVE
    hits: int = 1
    time_since_update: int = 0
    frames_since_penalized_output: int = 0

    def confirm_if_ready(self, hit_min: int) -> None:
        if self.status == TrackStatus.TENTATIVE and self.hits >= hit_min:
            self.status = TrackStatus.ACTIVE

    def register_hit(self, det: BoxState, params, hit_min: int) -> None:
        """Absorb a matched detection and reset the miss counters."""
        self.state = update(self.state, det, params)
        self.score = det.score
        self.hits += 1
        self.time_since_update = 0
        self.frames_since_penalized_output = 0
        self.confirm_if_ready(hit_min)

    def register_miss(self, decay_rate: float, max_age: int) -> None:
        """Decay confidence on a missed frame; kill when out of patience."""
        if self.status == TrackStatus.TENTATIVE:
            self.status = TrackStatus.DEAD
            return
        self.time_since_update += 1
        self.frames_since_penalized_output += 1
        self.score *= math.exp(-decay_rate * self.time_since_update)
        if self.time_since_update > max_age:
            self.status = TrackStatus.DEAD


def _state_box(traj: Trajectory, params, clamp_score: bool = True) -> BoxState:
    """Current state as a measurement-space box (with predicted velocity)."""
    m = measure(traj.state, params)
    score = min(max(traj.score, 0.0), 1.0) if clamp_score else traj.score
    return BoxState(
        x=float(m[0]), y=float(m[1]), z=float(m[2]),
        w=max(float(m[3]), _MIN_SIZE), l=max(float(m[4]), _MIN_SIZE),
        h=max(float(m[5]), _MIN_SIZE), yaw=float(m[6]),
        category=traj.category, score=score,
        vx=float(m[7]), vy=float(m[8]),
    )


class Tracker:
    """Stateful per-scene tracker; feed frames in time order via step()."""

    def __init__(self, config: Optional[TrackerConfig] = None, scene_id: str = "scene-0"):
        self.config = config if config is not None else TrackerConfig()
        self.scene_id = scene_id
        self.trajectories: List[Trajectory] = []
        self._next_id = 1
        self._last_timestamp: Optional[float] = None
        self._assoc_params = self.config.association_params()

    def _new_id(self) -> int:
        tid = self._next_id
        self._next_id += 1
        return tid

    def step(self, frame: DetectionFrame) -> List[ResultRecord]:
        """Run one frame through predict, associate, update, and output."""
        cfg = self.config
        if self._last_timestamp is not None:
            dt = frame.timestamp_s - self._last_timestamp
            if not dt > 0.0:
                raise ValueError(
                    f"frame {frame.frame_id}: timestamp {frame.timestamp_s} is not after "
                    f"previous {self._last_timestamp}"
                )
        else:
            dt = None
        self._last_timestamp = frame.timestamp_s

        if dt is not None:
            for traj in self.trajectories:
                traj.state = predict(traj.state, cfg.motion_params(traj.category), sigma_s=dt)

        pre = preprocess(
            frame, cfg.score_filter_min, cfg.nms_iou_max, cfg.cross_category_nms
        )
        detections = pre.detections
        track_boxes = [
            _state_box(t, cfg.motion_params(t.category)) for t in self.trajectories
        ]

        result = associate(detections, track_boxes, self._assoc_params)

        updated: List[Trajectory] = []
        for det_i, trk_j in result.matches:
            traj = self.trajectories[trk_j]
            traj.register_hit(detections[det_i], cfg.motion_params(traj.category), cfg.hit_min)
            updated.append(traj)

        coasting: List[Trajectory] = []
        for trk_j in result.unmatched_trajectories:
            traj = self.trajectories[trk_j]
            traj.register_miss(cfg.score_decay_rate, cfg.max_age(traj.category))
            if traj.status != TrackStatus.DEAD:
                coasting.append(traj)

        born: List[Trajectory] = []
        for det_i in result.unmatched_detections:
            det = detections[det_i]
            traj = Trajectory(
                track_id=self._new_id(),
                category=det.category,
                state=init_track(det, cfg.motion_params(det.category)),
                score=det.score,
            )
            traj.confirm_if_ready(cfg.hit_min)
            born.append(traj)
            self.trajectories.append(traj)

        records = self._select_output(frame.frame_id, updated + born, coasting)
        self.trajectories = [t for t in self.trajectories if t.status != TrackStatus.DEAD]
        return records

    def _select_output(
        self,
        frame_id: int,
        refreshed: Sequence[Trajectory],
        coasting: Sequence[Trajectory],
    ) -> List[ResultRecord]:
        """Active refreshed tracks plus recently missed ones, deduplicated."""
        cfg = self.config
        candidates = [t for t in refreshed if t.status == TrackStatus.ACTIVE]
        candidates += [
            t
            for t in coasting
            if t.status == TrackStatus.ACTIVE
            and t.frames_since_penalized_output <= cfg.penalized_output_frames
        ]
        candidates.sort(key=lambda t: t.track_id)
        boxes = [_state_box(t, cfg.motion_params(t.category)) for t in candidates]
        keep = nms_keep_indices(boxes, cfg.output_nms_iou_max, cfg.cross_category_nms)
        records = []
        for i in keep:
            t, b = candidates[i], boxes[i]
            records.append(
                ResultRecord(
                    scene_id=self.scene_id,
                    frame_id=frame_id,
                    tracking_id=t.track_id,
                    category=t.category,
                    x=b.x, y=b.y, z=b.z, w=b.w, l=b.l, h=b.h, yaw=b.yaw,
                    vx=b.vx, vy=b.vy,
                    tracking_score=min(max(t.score, 0.0), 1.0),
                )
            )
        return records


def track_scene(
    frames: Sequence[DetectionFrame],
    config: Optional[TrackerConfig] = None,
    scene_id: str = "scene-0",
) -> List[ResultRecord]:
    """Run one scene start to finish and return all records in frame order."""
    tracker = Tracker(config, scene_id=scene_id)
    records: List[ResultRecord] = []
    for frame in frames:
        records.extend(tracker.step(frame))
    return records


def track_scenes(
    scenes: Dict[str, Sequence[DetectionFrame]],
    config: Optional[TrackerConfig] = None,
) -> List[ResultRecord]:
    """Track every scene independently; records ordered scene then frame."""
    records: List[ResultRecord] = []
    for scene_id in sorted(scenes):
        records.extend(track_scene(scenes[scene_id], config, scene_id=scene_id))
    return records

"""Detection preprocessing: confidence gating then greedy overlap suppression.

Score filtering is cheap and runs first, so the quadratic suppression pass
only sees detections worth keeping. Suppression is blended across categories
by default: a confident bus can absorb a phantom car proposal on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Sequence

from .geometry import BoxState, boxes_to_array, iou_bev_matrix


@dataclass
class DetectionFrame:
    """All detections of one frame, in input order.

    Timestamps must be strictly increasing within a scene; the loader and the
    tracker both enforce that.
    """

    frame_id: int
    timestamp_s: float
    detections: List[BoxState] = field(default_factory=list)


def score_filter(frame: DetectionFrame, min_score: float) -> DetectionFrame:
    """Keep detections with score >= min_score, preserving order."""
    kept = [d for d in frame.detections if d.score >= min_score]
    return replace(frame, detections=kept)


def nms_keep_indices(
    boxes: Sequence[BoxState], iou_max: float, cross_category: bool = True
) -> List[int]:
    """Greedy footprint suppression; returns surviving indices in input order.

    Boxes are visited in descending score (ties by input order, so the pass
    is deterministic and duplicates collapse onto the earlier box). A kept
    box suppresses every remaining box overlapping it with IoU strictly
    above iou_max.
    """
    n = len(boxes)
    if n == 0:
        return []
    arr = boxes_to_array(boxes)
    iou = iou_bev_matrix(arr, arr)
    order = sorted(range(n), key=lambda i: (-boxes[i].score, i))
    suppressed = [False] * n
    kept: List[int] = []
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        kept.append(i)
        for j in order[pos + 1 :]:
            if suppressed[j]:
                continue
            if not cross_category and boxes[j].category != boxes[i].category:
                continue
            if iou[i, j] > iou_max:
                suppressed[j] = True
    return sorted(kept)


def nms(frame: DetectionFrame, iou_max: float, cross_category: bool = True) -> DetectionFrame:
    """Greedy score-descending suppression of overlapping detections."""
    kept = nms_keep_indices(frame.detections, iou_max, cross_category)
    return replace(frame, detections=[frame.detections[i] for i in kept])


def preprocess(
    frame: DetectionFrame,
    min_score: float,
    iou_max: float,
    cross_category: bool = True,
) -> DetectionFrame:
    """Score filter first, then suppression on the survivors."""
    return nms(score_filter(frame, min_score), iou_max, cross_category)

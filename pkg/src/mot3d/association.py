"""Two-stage detection-to-trajectory assignment.

Costs are built per category: cross-category pairs are never candidates.
Similarity metrics map to costs as 1 - similarity for the overlap family
(range [0, 2]) and as the raw weighted distance for the euclidean family.
Stage one uses each category's preferred metric and acceptance gate; stage
two retries the leftovers with a complementary overlap metric and a shared
loose gate, recovering pairs the first metric scored poorly (e.g. a tall
box whose volume overlap collapsed while its footprint still matches).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import BoxState, MetricKind, metric_matrix

# Marker stored in cells that must never match. The solver does not see
# this value: it re-sentinels from the valid mask per call, because a huge
# constant would swallow the small real cost differences in float64 and
# steer the assignment (1e18 + 1.2 == 1e18 + 1.9 exactly).
INVALID_COST = 1e8

_OVERLAP_KINDS = (MetricKind.GIOU_3D, MetricKind.GIOU_BEV)


@dataclass
class AssociationParams:
    """Per-category metric and gate table with fallbacks for unseen names."""

    stage1_kind: Dict[str, MetricKind] = field(default_factory=dict)
    stage1_max_cost: Dict[str, float] = field(default_factory=dict)
    default_kind: MetricKind = MetricKind.GIOU_3D
    default_max_cost: float = 1.3
    second_stage_max_cost: float = 1.0
    size_weight: float = 1.0
    distance_weight: float = 1.0
    # When true, gates are applied to the cost matrix before solving, so the
    # solver can reshuffle around a blocked pair. Default applies gates to
    # the solved matches instead.
    pre_mask: bool = False

    def kind_for(self, category: str) -> MetricKind:
        return self.stage1_kind.get(category, self.default_kind)

    def max_cost_for(self, category: str) -> float:
        return self.stage1_max_cost.get(category, self.default_max_cost)

    def second_stage_kind_for(self, category: str) -> MetricKind:
        # Complement of the stage-1 choice within the overlap family.
        if self.kind_for(category) == MetricKind.GIOU_BEV:
            return MetricKind.GIOU_3D
        return MetricKind.GIOU_BEV


@dataclass
class CostMatrix:
    """Dense cost matrix, rows = detections, cols = trajectories."""

    costs: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        self.costs = np.asarray(self.costs, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.costs.shape != self.valid.shape or self.costs.ndim != 2:
            raise ValueError("costs and valid must share a 2-d shape")


@dataclass
class AssociationResult:
    """Disjoint partition of detection and trajectory indices."""

    matches: List[Tuple[int, int]]
    unmatched_detections: List[int]
    unmatched_trajectories: List[int]


def metric_cost(kind: MetricKind, similarity: float) -> float:
    """Map a similarity value to an assignment cost."""
    if kind in _OVERLAP_KINDS:
        return 1.0 - similarity
    return similarity


def build_cost_matrix(
    detections: Sequence[BoxState],
    trajectories: Sequence[BoxState],
    params: AssociationParams,
    stage: int = 1,
) -> CostMatrix:
    """Per-category blocks; cells outside a shared category are invalid."""
    n, m = len(detections), len(trajectories)
    costs = np.full((n, m), INVALID_COST, dtype=np.float64)
    valid = np.zeros((n, m), dtype=bool)
    if n == 0 or m == 0:
        return CostMatrix(costs, valid)

    det_cats = [d.category for d in detections]
    trk_cats = [t.category for t in trajectories]
    for cat in sorted(set(det_cats) & set(trk_cats)):
        rows = [i for i, c in enumerate(det_cats) if c == cat]
        cols = [j for j, c in enumerate(trk_cats) if c == cat]
        kind = params.kind_for(cat) if stage == 1 else params.second_stage_kind_for(cat)
        sim = metric_matrix(
            [detections[i] for i in rows],
            [trajectories[j] for j in cols],
            kind,
            size_weight=params.size_weight,
            distance_weight=params.distance_weight,
        )
        block = 1.0 - sim if kind in _OVERLAP_KINDS else sim
        gate = params.max_cost_for(cat) if stage == 1 else params.second_stage_max_cost
        ok = np.ones_like(block, dtype=bool)
        if params.pre_mask:
            ok = block < gate
        for bi, i in enumerate(rows):
            for bj, j in enumerate(cols):
                if ok[bi, bj]:
                    costs[i, j] = block[bi, bj]
                    valid[i, j] = True
    return CostMatrix(costs, valid)


def hungarian(matrix: CostMatrix) -> List[Tuple[int, int]]:
    """Minimum-cost assignment; pairs landing on invalid cells are dropped.

    Invalid cells are priced just above the total of all valid costs:
    enough that the solver always prefers one more valid pair over any
    reshuffle, yet small enough that valid cost differences keep their
    full float64 precision.
    """
    if matrix.costs.size == 0:
        return []
    costs = np.where(matrix.valid, matrix.costs, 0.0)
    sentinel = float(np.abs(costs).sum()) + 1.0
    costs[~matrix.valid] = sentinel
    rows, cols = linear_sum_assignment(costs)
    return [(int(r), int(c)) for r, c in zip(rows, cols) if matrix.valid[r, c]]


def _solve_stage(
    detections: Sequence[BoxState],
    trajectories: Sequence[BoxState],
    params: AssociationParams,
    stage: int,
) -> AssociationResult:
    matrix = build_cost_matrix(detections, trajectories, params, stage=stage)
    matches: List[Tuple[int, int]] = []
    for i, j in hungarian(matrix):
        if stage == 1:
            gate = params.max_cost_for(detections[i].category)
        else:
            gate = params.second_stage_max_cost
        if matrix.costs[i, j] < gate:
            matches.append((i, j))
    matched_d = {i for i, _ in matches}
    matched_t = {j for _, j in matches}
    return AssociationResult(
        matches=sorted(matches),
        unmatched_detections=[i for i in range(len(detections)) if i not in matched_d],
        unmatched_trajectories=[j for j in range(len(trajectories)) if j not in matched_t],
    )


def associate(
    detections: Sequence[BoxState],
    trajectories: Sequence[BoxState],
    params: AssociationParams,
) -> AssociationResult:
    """Two rounds of gated assignment; the second sees only leftovers."""
    first = _solve_stage(detections, trajectories, params, stage=1)
    if not first.unmatched_detections or not first.unmatched_trajectories:
        return first

    det_idx = first.unmatched_detections
    trk_idx = first.unmatched_trajectories
    second = _solve_stage(
        [detections[i] for i in det_idx],
        [trajectories[j] for j in trk_idx],
        params,
        stage=2,
    )
    matches = first.matches + [(det_idx[i], trk_idx[j]) for i, j in second.matches]
    matched_d = {i for i, _ in matches}
    matched_t = {j for _, j in matches}
    return AssociationResult(
        matches=sorted(matches),
        unmatched_detections=[i for i in range(len(detections)) if i not in matched_d],
        unmatched_trajectories=[j for j in range(len(trajectories)) if j not in matched_t],
    )

"""Tracking quality metrics: per-category counts and the combined score.

Matching is per frame and per category: predicted boxes pair greedily with
ground-truth boxes by ground-plane center distance, nearest first, within a
fixed gate. An identity switch is counted when a ground-truth object that
was previously matched to one track id shows up matched to a different id,
however long ago the previous match was.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

from .dataio import ResultRecord

DEFAULT_MATCH_THRESHOLD_M = 2.0


@dataclass
class CategoryCounts:
    gt: int = 0
    matches: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    id_switches: int = 0

    @property
    def mota(self) -> float:
        """1 - (FP + FN + IDS) / GT; perfect empty categories score 1."""
        errors = self.false_positives + self.false_negatives + self.id_switches
        if self.gt == 0:
            return 1.0 if errors == 0 else float("nan")
        return 1.0 - errors / self.gt

    def add(self, other: "CategoryCounts") -> None:
        self.gt += other.gt
        self.matches += other.matches
        self.false_positives += other.false_positives
        self.false_negatives += other.false_negatives
        self.id_switches += other.id_switches


@dataclass
class ClearReport:
    per_category: Dict[str, CategoryCounts] = field(default_factory=dict)

    @property
    def overall(self) -> CategoryCounts:
        total = CategoryCounts()
        for counts in self.per_category.values():
            total.add(counts)
        return total

    def to_dict(self) -> Dict:
        def row(c: CategoryCounts) -> Dict:
            mota = c.mota
            return {
                "gt": c.gt,
                "matches": c.matches,
                "false_positives": c.false_positives,
                "false_negatives": c.false_negatives,
                "id_switches": c.id_switches,
                "mota": None if math.isnan(mota) else mota,
            }

        return {
            "per_category": {k: row(v) for k, v in sorted(self.per_category.items())},
            "overall": row(self.overall),
        }


def _group(
    records: Iterable[ResultRecord],
) -> Dict[str, Dict[int, Dict[str, List[ResultRecord]]]]:
    out: Dict[str, Dict[int, Dict[str, List[ResultRecord]]]] = {}
    for rec in records:
        out.setdefault(rec.scene_id, {}).setdefault(rec.frame_id, {}).setdefault(
            rec.category, []
        ).append(rec)
    return out


def evaluate_clear(
    results: Iterable[ResultRecord],
    ground_truth: Iterable[ResultRecord],
    match_threshold: float = DEFAULT_MATCH_THRESHOLD_M,
) -> ClearReport:
    """Score tracking results against ground truth in the same format."""
    pred = _group(results)
    gt = _group(ground_truth)
    report = ClearReport()

    def counts_for(category: str) -> CategoryCounts:
        return report.per_category.setdefault(category, CategoryCounts())

    for scene_id in sorted(set(pred) | set(gt)):
        scene_pred = pred.get(scene_id, {})
        scene_gt = gt.get(scene_id, {})
        # gt track id -> track id it was last matched with, per category.
        last_match: Dict[Tuple[str, int], int] = {}
        for frame_id in sorted(set(scene_pred) | set(scene_gt)):
            frame_pred = scene_pred.get(frame_id, {})
            frame_gt = scene_gt.get(frame_id, {})
            for category in set(frame_pred) | set(frame_gt):
                p_boxes = frame_pred.get(category, [])
                g_boxes = frame_gt.get(category, [])
                counts = counts_for(category)
                counts.gt += len(g_boxes)

                candidates = []
                for g in g_boxes:
                    for p in p_boxes:
                        d = math.hypot(g.x - p.x, g.y - p.y)
                        if d <= match_threshold:
                            candidates.append((d, g.tracking_id, p.tracking_id, g, p))
                candidates.sort(key=lambda c: (c[0], c[1], c[2]))
                used_g: set = set()
                used_p: set = set()
                for d, g_id, p_id, g, p in candidates:
                    if id(g) in used_g or id(p) in used_p:
                        continue
                    used_g.add(id(g))
                    used_p.add(id(p))
                    counts.matches += 1
                    key = (category, g_id)
                    if key in last_match and last_match[key] != p_id:
                        counts.id_switches += 1
                    last_match[key] = p_id
                counts.false_negatives += len(g_boxes) - len(used_g)
                counts.false_positives += len(p_boxes) - len(used_p)
    return report

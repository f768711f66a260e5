"""Rotated-box geometry on the ground plane and box similarity scores.

A box is a 3D cuboid described by its center, size, and heading about +z.
Overlap terms come from convex polygon clipping of the rotated footprints,
enclosing-shape terms from a monotone-chain convex hull of the combined
footprint corners. The pairwise kernels are JIT-compiled so that affinity
matrices over a few hundred boxes stay in the low-millisecond range.

Array convention for the batched kernels: one box per row, columns
``[x, y, z, w, l, h, yaw]``. The length ``l`` extends along the heading,
the width ``w`` across it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# Cross products smaller than this are treated as collinear when building hulls.
COLLINEAR_TOL = 1e-12

_MODE_IOU_BEV = 0
_MODE_GIOU_BEV = 1
_MODE_GIOU_3D = 2
_MODE_IOU_3D = 3


def wrap_angle(angle: float) -> float:
    """Normalize an angle in radians to the half-open interval (-pi, pi]."""
    return math.pi - (math.pi - angle) % TWO_PI


class MetricKind(enum.Enum):
    """Similarity metric used to score a detection/track pair."""

    GIOU_3D = "giou_3d"
    GIOU_BEV = "giou_bev"
    D_EUCL = "d_eucl"


@dataclass(frozen=True)
class BoxState:
    """One detected or tracked 3D box.

    Attributes:
        x, y, z: Center coordinates in meters (z at mid-height).
        w, l, h: Width (across heading), length (along heading), height.
        yaw: Heading about +z in radians, normalized to (-pi, pi].
        category: Object class name.
        score: Detection or tracking confidence in [0, 1].
        vx, vy: Optional ground-plane velocity in m/s.
    """

    x: float
    y: float
    z: float
    w: float
    l: float
    h: float
    yaw: float
    category: str
    score: float
    vx: Optional[float] = None
    vy: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.w > 0.0 and self.l > 0.0 and self.h > 0.0):
            raise ValueError(
                f"box sizes must be positive, got w={self.w} l={self.l} h={self.h}"
            )
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    def as_array(self) -> np.ndarray:
        """Return the kernel row [x, y, z, w, l, h, yaw]."""
        return np.array(
            [self.x, self.y, self.z, self.w, self.l, self.h, self.yaw], dtype=np.float64
        )


@dataclass
class BevPolygon:
    """Convex footprint polygon with vertices in counter-clockwise order."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError(f"polygon needs an (n>=3, 2) vertex array, got {verts.shape}")
        self.vertices = verts


def boxes_to_array(boxes: Sequence[BoxState]) -> np.ndarray:
    """Stack boxes into the (n, 7) kernel layout."""
    if not boxes:
        return np.empty((0, 7), dtype=np.float64)
    return np.stack([b.as_array() for b in boxes])


@njit(cache=True)
def _poly_area(pts, n):
    s = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        s += pts[i, 0] * pts[j, 1] - pts[j, 0] * pts[i, 1]
    return 0.5 * abs(s)


@njit(cache=True)
def _corners(x, y, w, l, yaw, out):
    c = math.cos(yaw)
    s = math.sin(yaw)
    dx = 0.5 * l * c
    dy = 0.5 * l * s
    px = -0.5 * w * s
    py = 0.5 * w * c
    out[0, 0] = x + dx + px
    out[0, 1] = y + dy + py
    out[1, 0] = x - dx + px
    out[1, 1] = y - dy + py
    out[2, 0] = x - dx - px
    out[2, 1] = y - dy - py
    out[3, 0] = x + dx - px
    out[3, 1] = y + dy - py


@njit(cache=True)
def _clip_area(subject, ns, clip, nc):
    # Sutherland-Hodgman clipping of one convex CCW polygon by another.
    cap = ns + nc + 4
    buf = np.empty((cap, 2))
    out = np.empty((cap, 2))
    n = ns
    for i in range(ns):
        buf[i, 0] = subject[i, 0]
        buf[i, 1] = subject[i, 1]
    for e in range(nc):
        x1 = clip[e, 0]
        y1 = clip[e, 1]
        k = e + 1
        if k == nc:
            k = 0
        ex = clip[k, 0] - x1
        ey = clip[k, 1] - y1
        m = 0
        for i in range(n):
            cx = buf[i, 0]
            cy = buf[i, 1]
            j = i + 1
            if j == n:
                j = 0
            qx = buf[j, 0]
            qy = buf[j, 1]
            dc = ex * (cy - y1) - ey * (cx - x1)
            dn = ex * (qy - y1) - ey * (qx - x1)
            if dc >= 0.0:
                out[m, 0] = cx
                out[m, 1] = cy
                m += 1
            if (dc >= 0.0) != (dn >= 0.0):
                t = dc / (dc - dn)
                out[m, 0] = cx + t * (qx - cx)
                out[m, 1] = cy + t * (qy - cy)
                m += 1
        n = m
        if n == 0:
            return 0.0
        for i in range(n):
            buf[i, 0] = out[i, 0]
            buf[i, 1] = out[i, 1]
    return _poly_area(buf, n)


@njit(cache=True)
def _hull_area(pts, n):
    # Monotone chain over n points; collinear points are dropped.
    work = np.empty((n, 2))
    for i in range(n):
        work[i, 0] = pts[i, 0]
        work[i, 1] = pts[i, 1]
    for i in range(1, n):
        px = work[i, 0]
        py = work[i, 1]
        j = i - 1
        while j >= 0 and (work[j, 0] > px or (work[j, 0] == px and work[j, 1] > py)):
            work[j + 1, 0] = work[j, 0]
            work[j + 1, 1] = work[j, 1]
            j -= 1
        work[j + 1, 0] = px
        work[j + 1, 1] = py
    hull = np.empty((2 * n + 1, 2))
    m = 0
    for i in range(n):
        px = work[i, 0]
        py = work[i, 1]
        while m >= 2:
            cr = (hull[m - 1, 0] - hull[m - 2, 0]) * (py - hull[m - 2, 1]) - (
                hull[m - 1, 1] - hull[m - 2, 1]
            ) * (px - hull[m - 2, 0])
            if cr <= COLLINEAR_TOL:
                m -= 1
            else:
                break
        hull[m, 0] = px
        hull[m, 1] = py
        m += 1
    lower = m + 1
    for i in range(n - 2, -1, -1):
        px = work[i, 0]
        py = work[i, 1]
        while m >= lower:
            cr = (hull[m - 1, 0] - hull[m - 2, 0]) * (py - hull[m - 2, 1]) - (
                hull[m - 1, 1] - hull[m - 2, 1]
            ) * (px - hull[m - 2, 0])
            if cr <= COLLINEAR_TOL:
                m -= 1
            else:
                break
        hull[m, 0] = px
        hull[m, 1] = py
        m += 1
    if m - 1 < 3:
        return 0.0
    return _poly_area(hull, m - 1)


@njit(cache=True)
def _pair_metric(a, b, mode):
    identical = True
    for k in range(7):
        if a[k] != b[k]:
            identical = False
            break
    if identical:
        # Degenerate fast path keeps self-similarity exact.
        return 1.0
    if mode == _MODE_IOU_BEV or mode == _MODE_IOU_3D:
        dx = a[0] - b[0]
        dy = a[1] - b[1]
        reach = 0.5 * (math.hypot(a[3], a[4]) + math.hypot(b[3], b[4]))
        if dx * dx + dy * dy > reach * reach:
            return 0.0
    ca = np.empty((4, 2))
    cb = np.empty((4, 2))
    _corners(a[0], a[1], a[3], a[4], a[6], ca)
    _corners(b[0], b[1], b[3], b[4], b[6], cb)
    inter = _clip_area(cb, 4, ca, 4)
    area_a = _poly_area(ca, 4)
    area_b = _poly_area(cb, 4)
    union = area_a + area_b - inter
    if mode == _MODE_IOU_BEV:
        return inter / union
    if mode == _MODE_IOU_3D or mode == _MODE_GIOU_3D:
        za0 = a[2] - 0.5 * a[5]
        za1 = a[2] + 0.5 * a[5]
        zb0 = b[2] - 0.5 * b[5]
        zb1 = b[2] + 0.5 * b[5]
        zo = min(za1, zb1) - max(za0, zb0)
        if zo < 0.0:
            zo = 0.0
        vol_i = inter * zo
        vol_u = area_a * a[5] + area_b * b[5] - vol_i
        if mode == _MODE_IOU_3D:
            return vol_i / vol_u
        pts = np.empty((8, 2))
        for i in range(4):
            pts[i, 0] = ca[i, 0]
            pts[i, 1] = ca[i, 1]
            pts[i + 4, 0] = cb[i, 0]
            pts[i + 4, 1] = cb[i, 1]
        hull = _hull_area(pts, 8)
        z_hull = max(za1, zb1) - min(za0, zb0)
        return vol_i / vol_u + vol_u / (hull * z_hull) - 1.0
    pts = np.empty((8, 2))
    for i in range(4):
        pts[i, 0] = ca[i, 0]
        pts[i, 1] = ca[i, 1]
        pts[i + 4, 0] = cb[i, 0]
        pts[i + 4, 1] = cb[i, 1]
    hull = _hull_area(pts, 8)
    return inter / union + union / hull - 1.0


@njit(cache=True)
def _metric_matrix(boxes_a, boxes_b, mode, out):
    for i in range(boxes_a.shape[0]):
        for j in range(boxes_b.shape[0]):
            out[i, j] = _pair_metric(boxes_a[i], boxes_b[j], mode)


def box_to_bev_polygon(box: BoxState) -> BevPolygon:
    """Footprint of a box as a CCW quad, length along heading, width across.

    Args:
        box: Box to project onto the ground plane.

    Returns:
        The four footprint corners in counter-clockwise order.
    """
    out = np.empty((4, 2), dtype=np.float64)
    _corners(box.x, box.y, box.w, box.l, box.yaw, out)
    return BevPolygon(out)


def intersection_area(p: BevPolygon, q: BevPolygon) -> float:
    """Overlap area of two convex footprint polygons.

    Args:
        p: First convex CCW polygon.
        q: Second convex CCW polygon; used as the clip region.

    Returns:
        Area of the intersection, 0.0 when disjoint or touching in a point
        or a line segment.
    """
    return float(_clip_area(p.vertices, p.vertices.shape[0], q.vertices, q.vertices.shape[0]))


def convex_hull_area(p: BevPolygon, q: BevPolygon) -> float:
    """Area of the convex hull enclosing both polygons' vertices."""
    pts = np.ascontiguousarray(np.vstack((p.vertices, q.vertices)))
    return float(_hull_area(pts, pts.shape[0]))


def iou_bev(a: BoxState, b: BoxState) -> float:
    """Footprint intersection over union of two boxes."""
    return float(_pair_metric(a.as_array(), b.as_array(), _MODE_IOU_BEV))


def iou_3d(a: BoxState, b: BoxState) -> float:
    """Volumetric intersection over union, z extent handled as an interval."""
    return float(_pair_metric(a.as_array(), b.as_array(), _MODE_IOU_3D))


def giou_bev(a: BoxState, b: BoxState) -> float:
    """Generalized footprint IoU: IoU + union/hull - 1, in (-1, 1]."""
    return float(_pair_metric(a.as_array(), b.as_array(), _MODE_GIOU_BEV))


def giou_3d(a: BoxState, b: BoxState) -> float:
    """Generalized volumetric IoU against the extruded footprint hull.

    The enclosing volume is the convex hull of the two footprints extruded
    over the combined z interval of both boxes.
    """
    return float(_pair_metric(a.as_array(), b.as_array(), _MODE_GIOU_3D))


def d_eucl_matrix(
    boxes_a: np.ndarray,
    boxes_b: np.ndarray,
    size_weight: float = 1.0,
    distance_weight: float = 1.0,
) -> np.ndarray:
    """Pairwise heading-penalized Euclidean distance, rows a by columns b.

    The base term is a weighted sum of size-vector and center distances; the
    penalty scales it by (2 - cos|dyaw|) with |dyaw| folded into [0, pi], so
    perfectly aligned pairs keep the base distance and opposed headings
    triple it.
    """
    size_d = np.linalg.norm(boxes_a[:, None, 3:6] - boxes_b[None, :, 3:6], axis=2)
    cen_d = np.linalg.norm(boxes_a[:, None, 0:3] - boxes_b[None, :, 0:3], axis=2)
    raw = boxes_a[:, None, 6] - boxes_b[None, :, 6]
    dyaw = np.abs(np.pi - np.mod(np.pi - raw, TWO_PI))
    base = size_weight * size_d + distance_weight * cen_d
    return base * (2.0 - np.cos(dyaw))


def d_eucl(
    a: BoxState, b: BoxState, size_weight: float = 1.0, distance_weight: float = 1.0
) -> float:
    """Heading-penalized Euclidean distance between two boxes (meters-ish)."""
    return float(
        d_eucl_matrix(a.as_array()[None, :], b.as_array()[None, :], size_weight, distance_weight)[
            0, 0
        ]
    )


def _as_box_array(boxes) -> np.ndarray:
    """Accept an (n, 7) array or a sequence of boxes."""
    if isinstance(boxes, np.ndarray):
        return np.ascontiguousarray(boxes, dtype=np.float64)
    return boxes_to_array(boxes)


def iou_bev_matrix(boxes_a, boxes_b) -> np.ndarray:
    """Pairwise footprint IoU for (n, 7) by (m, 7) box arrays."""
    arr_a, arr_b = _as_box_array(boxes_a), _as_box_array(boxes_b)
    out = np.empty((arr_a.shape[0], arr_b.shape[0]), dtype=np.float64)
    _metric_matrix(arr_a, arr_b, _MODE_IOU_BEV, out)
    return out


def metric_matrix(
    boxes_a,
    boxes_b,
    kind: MetricKind,
    size_weight: float = 1.0,
    distance_weight: float = 1.0,
) -> np.ndarray:
    """Pairwise similarity of the requested kind, rows from a, cols from b.

    Inputs are (n, 7) arrays or box sequences. Generalized-IoU kinds return
    similarity (higher is better); the Euclidean kind returns a distance
    (lower is better). Cost conventions are applied by the association layer.
    """
    arr_a, arr_b = _as_box_array(boxes_a), _as_box_array(boxes_b)
    if kind is MetricKind.D_EUCL:
        return d_eucl_matrix(arr_a, arr_b, size_weight, distance_weight)
    mode = _MODE_GIOU_BEV if kind is MetricKind.GIOU_BEV else _MODE_GIOU_3D
    out = np.empty((arr_a.shape[0], arr_b.shape[0]), dtype=np.float64)
    _metric_matrix(arr_a, arr_b, mode, out)
    return out

"""Independent reference computations used to check the production kernels.

Everything here is deliberately written against the definitions rather than
the shipped implementations: box membership uses local-frame coordinate
tests instead of polygon clipping, hull membership uses qhull instead of the
package's monotone chain, displacements come from adaptive quadrature of the
kinematic integrals, and assignment is exhaustive search. Tests freeze values
produced by these oracles; the only shared vocabulary is the box type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.spatial import ConvexHull

from .geometry import BoxState


@dataclass(frozen=True)
class McAreaEstimate:
    """Monte-Carlo footprint area estimates with their standard errors."""

    intersection: float
    hull: float
    intersection_se: float
    hull_se: float
    n_samples: int


def _point_in_box_bev(px: np.ndarray, py: np.ndarray, box: BoxState) -> np.ndarray:
    # Membership via the box local frame: along-heading and across-heading
    # offsets bounded by the half extents.
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    dx = px - box.x
    dy = py - box.y
    along = dx * c + dy * s
    across = -dx * s + dy * c
    return (np.abs(along) <= 0.5 * box.l) & (np.abs(across) <= 0.5 * box.w)


def _footprint_corners(box: BoxState) -> np.ndarray:
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    half = np.array(
        [[0.5 * box.l, 0.5 * box.w], [-0.5 * box.l, 0.5 * box.w],
         [-0.5 * box.l, -0.5 * box.w], [0.5 * box.l, -0.5 * box.w]]
    )
    rot = np.array([[c, -s], [s, c]])
    return half @ rot.T + np.array([box.x, box.y])


def mc_area_oracle(
    a: BoxState,
    b: BoxState,
    n_samples: int = 100_000,
    rng: Optional[np.random.Generator] = None,
) -> McAreaEstimate:
    """Estimate footprint intersection and combined-hull areas by sampling.

    Points are drawn uniformly over the joint bounding rectangle of both
    footprints. Intersection membership is a pair of local-frame rectangle
    tests; hull membership evaluates qhull's facet inequalities for the hull
    of the eight footprint corners.

    Args:
        a, b: Boxes under test.
        n_samples: Uniform samples to draw (>= 1e5 recommended).
        rng: Source of randomness; a fresh default generator when omitted.

    Returns:
        Area estimates and their binomial standard errors.
    """
    if rng is None:
        rng = np.random.default_rng()
    reach_a = 0.5 * math.hypot(a.w, a.l)
    reach_b = 0.5 * math.hypot(b.w, b.l)
    x_lo = min(a.x - reach_a, b.x - reach_b)
    x_hi = max(a.x + reach_a, b.x + reach_b)
    y_lo = min(a.y - reach_a, b.y - reach_b)
    y_hi = max(a.y + reach_a, b.y + reach_b)
    joint_area = (x_hi - x_lo) * (y_hi - y_lo)

    # Intersection points can only live where the per-box bounding
    # rectangles overlap; sampling that tighter window cuts the variance
    # for small boxes by orders of magnitude.
    ix_lo = max(a.x - reach_a, b.x - reach_b)
    ix_hi = min(a.x + reach_a, b.x + reach_b)
    iy_lo = max(a.y - reach_a, b.y - reach_b)
    iy_hi = min(a.y + reach_a, b.y + reach_b)
    if ix_lo >= ix_hi or iy_lo >= iy_hi:
        intersection = 0.0
        intersection_se = 0.0
    else:
        int_area = (ix_hi - ix_lo) * (iy_hi - iy_lo)
        px = rng.uniform(ix_lo, ix_hi, n_samples)
        py = rng.uniform(iy_lo, iy_hi, n_samples)
        in_both = _point_in_box_bev(px, py, a) & _point_in_box_bev(px, py, b)
        p_int = in_both.mean()
        intersection = float(p_int * int_area)
        intersection_se = float(
            int_area * math.sqrt(max(p_int * (1.0 - p_int), 0.0) / n_samples)
        )

    corners = np.vstack((_footprint_corners(a), _footprint_corners(b)))
    eqs = ConvexHull(corners).equations
    px = rng.uniform(x_lo, x_hi, n_samples)
    py = rng.uniform(y_lo, y_hi, n_samples)
    pts = np.column_stack((px, py))
    in_hull = (pts @ eqs[:, :2].T + eqs[:, 2] <= 1e-12).all(axis=1)
    p_hull = in_hull.mean()

    return McAreaEstimate(
        intersection=intersection,
        hull=float(p_hull * joint_area),
        intersection_se=intersection_se,
        hull_se=float(joint_area * math.sqrt(max(p_hull * (1.0 - p_hull), 0.0) / n_samples)),
        n_samples=n_samples,
    )


_QUAD_KW = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


def quad_turn_accel_displacement(
    v: float, a: float, yaw: float, omega: float, sigma: float
) -> Tuple[float, float]:
    """Planar displacement of a turning, accelerating point by quadrature.

    Integrates speed-times-heading with speed v + a*t and heading
    yaw + omega*t over [0, sigma] with adaptive quadrature (1e-12 abs
    tolerance), independent of any closed-form solution.
    """
    dx = quad(lambda t: (v + a * t) * math.cos(yaw + omega * t), 0.0, sigma, **_QUAD_KW)[0]
    dy = quad(lambda t: (v + a * t) * math.sin(yaw + omega * t), 0.0, sigma, **_QUAD_KW)[0]
    return dx, dy


def quad_steer_displacement(
    v: float,
    yaw: float,
    steer: float,
    length: float,
    wheelbase_ratio: float,
    rear_axle_fraction: float,
    sigma: float,
) -> Tuple[float, float]:
    """Gravity-center displacement of a front-steered box by quadrature.

    The slip angle and yaw rate follow from the steer angle, the wheelbase
    (wheelbase_ratio * length), and the rear-axle distance
    (rear_axle_fraction * wheelbase); speed is constant over the step. The
    gravity center moves along heading + slip while the heading turns at the
    constant yaw rate.
    """
    wheelbase = wheelbase_ratio * length
    rear = rear_axle_fraction * wheelbase
    slip = math.atan2(rear * math.tan(steer), wheelbase)
    omega = v * math.sin(slip) / rear
    dx = quad(lambda t: v * math.cos(yaw + slip + omega * t), 0.0, sigma, **_QUAD_KW)[0]
    dy = quad(lambda t: v * math.sin(yaw + slip + omega * t), 0.0, sigma, **_QUAD_KW)[0]
    return dx, dy


def brute_force_assignment(
    costs: np.ndarray, valid: Optional[np.ndarray] = None
) -> Tuple[List[Tuple[int, int]], float]:
    """Exhaustive best assignment over the valid entries of a cost table.

    Maximizes the number of matched (row, column) pairs first, then
    minimizes their total cost, by trying every injective assignment.
    Intended for tables up to about 8x8.

    Returns:
        The optimal matches sorted by row, and their total cost (0.0 for
        the empty assignment).
    """
    n, m = costs.shape
    if valid is None:
        valid = np.ones((n, m), dtype=bool)
    best_count = -1
    best_cost = math.inf
    best_matches: List[Tuple[int, int]] = []

    def recurse(row: int, used: int, matches: List[Tuple[int, int]], cost: float) -> None:
        nonlocal best_count, best_cost, best_matches
        if row == n:
            count = len(matches)
            if count > best_count or (count == best_count and cost < best_cost):
                best_count = count
                best_cost = cost
                best_matches = list(matches)
            return
        # Upper bound prune: even matching every remaining row cannot help.
        if len(matches) + (n - row) < best_count:
            return
        recurse(row + 1, used, matches, cost)
        for col in range(m):
            if valid[row, col] and not (used >> col) & 1:
                matches.append((row, col))
                recurse(row + 1, used | (1 << col), matches, cost + float(costs[row, col]))
                matches.pop()

    recurse(0, 0, [], 0.0)
    return sorted(best_matches), (best_cost if best_count > 0 else 0.0)


def fd_jacobian(
    fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float = 1e-6
) -> np.ndarray:
    """Central-difference Jacobian of fn at x, one column per input dim."""
    x = np.asarray(x, dtype=np.float64)
    f0 = np.asarray(fn(x), dtype=np.float64)
    jac = np.empty((f0.shape[0], x.shape[0]))
    for k in range(x.shape[0]):
        hi = x.copy()
        lo = x.copy()
        hi[k] += step
        lo[k] -= step
        jac[:, k] = (np.asarray(fn(hi)) - np.asarray(fn(lo))) / (2.0 * step)
    return jac

import math

import numpy as np
import pytest

from mot3d import (
    NoiseSpec,
    ResultRecord,
    evaluate_clear,
    generate_scene,
    min_gt_separation,
)
from mot3d.sim import crossing_scene_spec, default_scene_spec
from mot3d.oracles import (
    brute_force_assignment,
    fd_jacobian,
    mc_area_oracle,
    quad_steer_displacement,
    quad_turn_accel_displacement,
)

from conftest import make_box


# ---- synthetic scenes ----

def test_same_seed_reproduces_the_scene_bitwise():
    spec = default_scene_spec(noise=NoiseSpec(pos_std=0.3, drop_prob=0.1, clutter_rate=0.5))
    a = generate_scene(spec, seed=7)
    b = generate_scene(spec, seed=7)
    assert a.ground_truth == b.ground_truth
    assert len(a.frames) == len(b.frames)
    for fa, fb in zip(a.frames, b.frames):
        assert fa.detections == fb.detections


def test_different_seed_changes_detections():
    spec = default_scene_spec(noise=NoiseSpec(pos_std=0.3))
    a = generate_scene(spec, seed=1)
    b = generate_scene(spec, seed=2)
    assert a.ground_truth == b.ground_truth  # noise-free truth is seed-free
    diff = any(
        fa.detections != fb.detections for fa, fb in zip(a.frames, b.frames)
    )
    assert diff


def test_default_layout_keeps_objects_apart():
    scene = generate_scene(default_scene_spec(), seed=0)
    assert min_gt_separation(scene) > 5.0


def test_zero_noise_detections_equal_ground_truth():
    scene = generate_scene(default_scene_spec(n_tracks=4, n_frames=10), seed=3)
    gt_by_frame = {}
    for r in scene.ground_truth:
        gt_by_frame.setdefault(r.frame_id, []).append(r)
    for frame in scene.frames:
        gts = gt_by_frame[frame.frame_id]
        assert len(frame.detections) == len(gts)
        for det in frame.detections:
            d = min(math.hypot(det.x - g.x, det.y - g.y) for g in gts)
            assert d < 1e-9


def test_full_dropout_gives_empty_frames():
    spec = default_scene_spec(n_tracks=3, n_frames=5, noise=NoiseSpec(drop_prob=1.0))
    scene = generate_scene(spec, seed=0)
    assert all(f.detections == [] for f in scene.frames)
    assert scene.ground_truth  # truth is unaffected


def test_clutter_adds_low_score_boxes():
    spec = default_scene_spec(
        n_tracks=2, n_frames=20, noise=NoiseSpec(clutter_rate=3.0)
    )
    scene = generate_scene(spec, seed=5)
    n_clutter = sum(len(f.detections) for f in scene.frames) - len(scene.ground_truth)
    assert n_clutter > 20  # rate 3/frame over 20 frames
    clutter_scores = [
        d.score for f in scene.frames for d in f.detections if d.score <= 0.5
    ]
    assert len(clutter_scores) >= n_clutter


def test_crossing_paths_never_co_located():
    scene = generate_scene(crossing_scene_spec(), seed=0)
    by_frame = {}
    for r in scene.ground_truth:
        by_frame.setdefault(r.frame_id, []).append(r)
    closest = min(
        math.hypot(a.x - b.x, a.y - b.y)
        for recs in by_frame.values()
        if len(recs) == 2
        for a, b in [recs]
    )
    assert closest > 4.0


def test_frames_carry_increasing_timestamps():
    scene = generate_scene(default_scene_spec(n_frames=8), seed=0)
    ts = [f.timestamp_s for f in scene.frames]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    assert [f.frame_id for f in scene.frames] == list(range(8))


# ---- oracles ----

def test_mc_area_oracle_on_disjoint_and_identical_rectangles(rng):
    a = make_box(x=0.0, w=2.0, l=4.0)
    b = make_box(x=20.0, w=2.0, l=4.0)
    est = mc_area_oracle(a, b, rng=np.random.default_rng(0), n_samples=20_000)
    assert est.intersection == 0.0 and est.intersection_se == 0.0

    c = make_box(x=0.0, w=2.0, l=4.0)
    est2 = mc_area_oracle(a, c, rng=np.random.default_rng(0), n_samples=200_000)
    assert est2.intersection == pytest.approx(8.0, rel=0.02)
    assert est2.hull == pytest.approx(8.0, rel=0.02)


def test_mc_area_oracle_on_half_overlap(rng):
    a = make_box(x=0.0, w=1.0, l=1.0)
    b = make_box(x=0.5, w=1.0, l=1.0)
    est = mc_area_oracle(a, b, rng=np.random.default_rng(1), n_samples=400_000)
    assert est.intersection == pytest.approx(0.5, abs=4 * max(est.intersection_se, 1e-4))
    assert est.hull == pytest.approx(1.5, abs=4 * max(est.hull_se, 1e-4))


def test_quadrature_displacement_reduces_to_straight_line():
    dx, dy = quad_turn_accel_displacement(v=3.0, a=0.0, yaw=0.0, omega=0.0, sigma=2.0)
    assert dx == pytest.approx(6.0, abs=1e-10)
    assert dy == pytest.approx(0.0, abs=1e-12)
    dx2, dy2 = quad_steer_displacement(
        v=3.0, yaw=math.pi / 2, steer=0.0, length=2.0,
        wheelbase_ratio=0.8, rear_axle_fraction=0.5, sigma=2.0,
    )
    assert dx2 == pytest.approx(0.0, abs=1e-10)
    assert dy2 == pytest.approx(6.0, abs=1e-10)


def test_brute_force_assignment_prefers_cardinality():
    costs = np.array([[1.0, 100.0], [np.nan, 100.0]])
    valid = np.array([[True, True], [False, True]])
    costs = np.where(valid, costs, 0.0)
    matches, cost = brute_force_assignment(costs, valid)
    assert sorted(matches) == [(0, 0), (1, 1)]
    assert cost == pytest.approx(101.0)


def test_brute_force_assignment_minimizes_cost_at_full_cardinality():
    costs = np.array([[2.0, 1.0], [1.0, 2.0]])
    matches, cost = brute_force_assignment(costs)
    assert sorted(matches) == [(0, 1), (1, 0)]
    assert cost == pytest.approx(2.0)


def test_fd_jacobian_on_polynomial():
    def f(v):
        return np.array([v[0] ** 2, 3.0 * v[0] * v[1], v[1]])

    x = np.array([2.0, -1.5])
    jac = fd_jacobian(f, x)
    want = np.array([[4.0, 0.0], [-4.5, 6.0], [0.0, 1.0]])
    assert np.max(np.abs(jac - want)) < 1e-6


# ---- CLEAR metric unit scenarios ----

def R(frame, tid, x=0.0, y=0.0, category="car", scene="s0"):
    return ResultRecord(
        scene_id=scene, frame_id=frame, tracking_id=tid, category=category,
        x=x, y=y, z=0.0, w=1.0, l=1.0, h=1.0, yaw=0.0, vx=0.0, vy=0.0,
        tracking_score=0.9,
    )


def test_clear_perfect_tracking():
    gt = [R(0, 1), R(1, 1, x=1.0)]
    report = evaluate_clear(gt, gt)
    overall = report.overall
    assert overall.mota == 1.0
    assert overall.false_positives == overall.false_negatives == overall.id_switches == 0
    assert overall.matches == 2


def test_clear_counts_false_positive():
    gt = [R(0, 1)]
    pred = [R(0, 1), R(0, 2, x=50.0)]
    c = evaluate_clear(pred, gt).overall
    assert c.false_positives == 1 and c.false_negatives == 0
    assert c.mota == 0.0


def test_clear_counts_false_negative():
    gt = [R(0, 1), R(0, 2, x=50.0)]
    pred = [R(0, 1)]
    c = evaluate_clear(pred, gt).overall
    assert c.false_negatives == 1 and c.false_positives == 0
    assert c.mota == 0.5


def test_clear_counts_identity_switch():
    gt = [R(0, 1), R(1, 1, x=1.0), R(2, 1, x=2.0)]
    pred = [R(0, 7), R(1, 7, x=1.0), R(2, 8, x=2.0)]
    c = evaluate_clear(pred, gt).overall
    assert c.id_switches == 1
    assert c.mota == pytest.approx(2.0 / 3.0)


def test_clear_identity_survives_a_gap():
    # the predicted id changes while the object is unseen: still a switch
    gt = [R(0, 1), R(2, 1, x=2.0)]
    pred = [R(0, 7), R(2, 9, x=2.0)]
    c = evaluate_clear(pred, gt).overall
    assert c.id_switches == 1


def test_clear_matches_within_threshold_only():
    gt = [R(0, 1)]
    inside = evaluate_clear([R(0, 5, x=2.0)], gt, match_threshold=2.0).overall
    assert inside.matches == 1  # boundary distance counts
    outside = evaluate_clear([R(0, 5, x=2.0001)], gt, match_threshold=2.0).overall
    assert outside.matches == 0
    assert outside.false_positives == 1 and outside.false_negatives == 1


def test_clear_categories_do_not_cross_match():
    gt = [R(0, 1, category="car")]
    pred = [R(0, 1, category="pedestrian")]
    report = evaluate_clear(pred, gt)
    assert report.per_category["car"].false_negatives == 1
    assert report.per_category["pedestrian"].false_positives == 1


def test_clear_greedy_prefers_closest_pair():
    gt = [R(0, 1, x=0.0), R(0, 2, x=3.0)]
    pred = [R(0, 9, x=0.4), R(0, 8, x=2.9)]
    c = evaluate_clear(pred, gt, match_threshold=2.0).overall
    assert c.matches == 2 and c.false_positives == 0


def test_clear_empty_inputs():
    c = evaluate_clear([], []).overall
    assert c.mota == 1.0 and c.gt == 0
    only_pred = evaluate_clear([R(0, 1)], []).overall
    assert math.isnan(only_pred.mota)
    assert only_pred.false_positives == 1


def test_clear_report_dict_shape():
    gt = [R(0, 1)]
    d = evaluate_clear(gt, gt).to_dict()
    assert set(d) == {"per_category", "overall"}
    assert d["overall"]["mota"] == 1.0
    assert d["per_category"]["car"]["gt"] == 1

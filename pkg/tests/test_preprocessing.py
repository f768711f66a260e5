from mot3d import DetectionFrame, nms, nms_keep_indices, preprocess, score_filter

from conftest import make_box


def frame(dets, frame_id=0, t=0.0):
    return DetectionFrame(frame_id=frame_id, timestamp_s=t, detections=list(dets))


def test_score_filter_boundary_is_inclusive():
    f = frame([make_box(score=0.29), make_box(score=0.3), make_box(score=0.31)])
    kept = score_filter(f, 0.3)
    assert [d.score for d in kept.detections] == [0.3, 0.31]
    assert kept.frame_id == f.frame_id and kept.timestamp_s == f.timestamp_s


def test_score_filter_preserves_input_order():
    f = frame([make_box(x=float(i), score=0.9 - 0.1 * i) for i in range(5)])
    kept = score_filter(f, 0.0)
    assert [d.x for d in kept.detections] == [0.0, 1.0, 2.0, 3.0, 4.0]


def test_nms_collapses_duplicates_keeping_best_score():
    a = make_box(score=0.9)
    b = make_box(score=0.8)  # same box, lower score
    c = make_box(x=50.0, score=0.5)
    assert nms_keep_indices([a, b, c], iou_max=0.1) == [0, 2]


def test_nms_tie_breaks_by_input_order():
    a = make_box(score=0.7)
    b = make_box(score=0.7)
    assert nms_keep_indices([a, b], iou_max=0.1) == [0]


def test_nms_threshold_is_strict():
    # half-overlapping unit squares: iou exactly 1/3
    a = make_box(x=0.0, w=1.0, l=1.0, score=0.9)
    b = make_box(x=0.5, w=1.0, l=1.0, score=0.8)
    third = 1.0 / 3.0
    assert nms_keep_indices([a, b], iou_max=third) == [0, 1]  # iou == max kept
    assert nms_keep_indices([a, b], iou_max=third - 1e-9) == [0]


def test_nms_cross_category_toggle():
    a = make_box(score=0.9, category="car")
    b = make_box(score=0.8, category="pedestrian")
    assert nms_keep_indices([a, b], iou_max=0.1, cross_category=True) == [0]
    assert nms_keep_indices([a, b], iou_max=0.1, cross_category=False) == [0, 1]


def test_nms_suppressed_box_cannot_suppress_others():
    # b overlaps a (dies) and c; c barely misses a; c must survive since
    # only still-kept boxes suppress
    a = make_box(x=0.0, w=2.0, l=2.0, score=0.9)
    b = make_box(x=1.2, w=2.0, l=2.0, score=0.8)
    c = make_box(x=2.4, w=2.0, l=2.0, score=0.7)
    kept = nms_keep_indices([a, b, c], iou_max=0.05)
    assert 2 in kept and 1 not in kept


def test_nms_returns_sorted_indices_and_frame_preserved():
    dets = [make_box(x=10.0 * i, score=0.5 + 0.01 * i) for i in range(4)]
    kept = nms_keep_indices(dets, iou_max=0.1)
    assert kept == sorted(kept) == [0, 1, 2, 3]
    out = nms(frame(dets, frame_id=7, t=3.5), 0.1)
    assert out.detections == dets
    assert out.frame_id == 7 and out.timestamp_s == 3.5


def test_preprocess_is_filter_then_suppress():
    dets = [
        make_box(x=0.0, score=0.9),
        make_box(x=0.2, score=0.4),   # below gate
        make_box(x=0.3, score=0.8),   # duplicate of the leader, suppressed
        make_box(x=30.0, score=0.7),
    ]
    out = preprocess(frame(dets), min_score=0.5, iou_max=0.1)
    assert out.detections == [dets[0], dets[3]]
    assert out.detections == nms(score_filter(frame(dets), 0.5), 0.1).detections


def test_empty_inputs():
    assert score_filter(frame([]), 0.5).detections == []
    assert nms_keep_indices([], 0.1) == []
    assert nms(frame([]), 0.1).detections == []
    assert preprocess(frame([]), 0.5, 0.1).detections == []

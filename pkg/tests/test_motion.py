import math

import numpy as np
import pytest

from mot3d import ModelKind, bicycle_transition, ctra_transition, make_motion_params
from mot3d.config import DEFAULT_INITIAL_STD, DEFAULT_MEASUREMENT_STD, DEFAULT_PROCESS_STD
from mot3d.motion import (
    BicState,
    CtraState,
    MODEL_DIM,
    MotionParams,
    TrackState,
    init_track,
    jacobian,
    measure,
    measurement_jacobian,
    predict,
    transition,
    update,
)
from mot3d.oracles import fd_jacobian, quad_steer_displacement, quad_turn_accel_displacement

from conftest import make_box


def params_for(model, sigma=0.5, use_velocity=True):
    return make_motion_params(
        model, sigma,
        process_std=DEFAULT_PROCESS_STD,
        measurement_std=DEFAULT_MEASUREMENT_STD,
        initial_std=DEFAULT_INITIAL_STD,
        use_velocity=use_velocity,
    )


def ctra(x=0.0, y=0.0, z=0.0, v=5.0, a=0.0, yaw=0.0, omega=0.0, w=1.9, l=4.6, h=1.7):
    return CtraState(x, y, z, v, a, yaw, omega, w, l, h)


def bic(x=0.0, y=0.0, z=0.0, v=5.0, a=0.0, yaw=0.0, steer=0.0, w=0.6, l=1.8, h=1.4):
    return BicState(x, y, z, v, a, yaw, steer, w, l, h)


# ---- frozen closed-form values ----

def test_turn_accel_step_frozen_example():
    s = ctra(v=1.0, a=1.0, yaw=0.0, omega=1.0)
    out = ctra_transition(s, 1.0)
    assert out.x == pytest.approx(1.2232442754839328, abs=1e-12)
    assert out.y == pytest.approx(0.760866373071617, abs=1e-12)
    assert out.v == pytest.approx(2.0, abs=1e-15)
    assert out.yaw == pytest.approx(1.0, abs=1e-15)
    assert out.a == 1.0 and out.omega == 1.0


def test_quarter_turn_displacement():
    # quarter turn in one second: both displacement components are 2/pi
    s = ctra(v=1.0, yaw=0.0, omega=math.pi / 2)
    out = ctra_transition(s, 1.0)
    assert out.x == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert out.y == pytest.approx(2.0 / math.pi, abs=1e-12)


def test_zero_turn_is_exact_straight_line():
    s = ctra(v=3.0, a=2.0, yaw=0.7, omega=0.0)
    out = ctra_transition(s, 0.5)
    dist = 3.0 * 0.5 + 0.5 * 2.0 * 0.25
    assert out.x == pytest.approx(dist * math.cos(0.7), abs=1e-14)
    assert out.y == pytest.approx(dist * math.sin(0.7), abs=1e-14)
    assert out.yaw == pytest.approx(0.7, abs=1e-15)


# ---- quadrature oracle agreement ----

def test_turn_model_matches_quadrature_across_turn_rates(rng):
    omegas = [0.0, 1e-12, 1e-9, 1e-7, 1e-6, 1e-4, 0.01, 0.1999, 0.2001, 0.5, 2.0, -1.3]
    for omega in omegas:
        for _ in range(10):
            v = float(rng.uniform(-10, 30))
            a = float(rng.uniform(-5, 5))
            yaw = float(rng.uniform(-math.pi, math.pi))
            s = ctra(v=v, a=a, yaw=yaw, omega=omega)
            out = ctra_transition(s, 0.5)
            qx, qy = quad_turn_accel_displacement(v, a, yaw, omega, 0.5)
            assert out.x == pytest.approx(qx, abs=1e-9)
            assert out.y == pytest.approx(qy, abs=1e-9)


def test_series_switchover_is_seamless():
    # the series branch engages below |omega * sigma / 2| = 0.05; values on
    # both sides of the boundary must match quadrature to full precision
    sigma = 0.5
    for omega in (0.2 * (1 - 1e-6), 0.2, 0.2 * (1 + 1e-6), -0.2, 1e-6, -1e-6):
        s = ctra(v=8.0, a=1.5, yaw=1.1, omega=omega)
        out = ctra_transition(s, sigma)
        qx, qy = quad_turn_accel_displacement(8.0, 1.5, 1.1, omega, sigma)
        assert out.x == pytest.approx(qx, abs=1e-9)
        assert out.y == pytest.approx(qy, abs=1e-9)


def test_turn_mirror_symmetry():
    a = ctra(v=5.0, a=1.0, yaw=0.0, omega=0.8)
    b = ctra(v=5.0, a=1.0, yaw=0.0, omega=-0.8)
    out_a = ctra_transition(a, 0.5)
    out_b = ctra_transition(b, 0.5)
    assert out_a.x == pytest.approx(out_b.x, abs=1e-12)
    assert out_a.y == pytest.approx(-out_b.y, abs=1e-12)


def test_steer_model_matches_quadrature(rng):
    steers = [0.0, 1e-8, 1e-5, 0.05, 0.3, -0.45, 1.2]
    for steer in steers:
        for _ in range(8):
            v = float(rng.uniform(-5, 15))
            yaw = float(rng.uniform(-math.pi, math.pi))
            length = float(rng.uniform(1.0, 13.0))
            s = bic(v=v, yaw=yaw, steer=steer, l=length)
            out = bicycle_transition(s, 0.5, wheelbase_ratio=0.8, rear_axle_fraction=0.46)
            qx, qy = quad_steer_displacement(v, yaw, steer, length, 0.8, 0.46, 0.5)
            assert out.x == pytest.approx(qx, abs=1e-9)
            assert out.y == pytest.approx(qy, abs=1e-9)


def test_steer_heading_rate():
    # yaw advances by omega * sigma with omega = v sin(slip) / rear_length
    v, steer, length, ratio, f = 6.0, 0.3, 2.0, 0.8, 0.5
    s = bic(v=v, yaw=0.2, steer=steer, l=length)
    out = bicycle_transition(s, 0.5, wheelbase_ratio=ratio, rear_axle_fraction=f)
    slip = math.atan(f * math.tan(steer))
    omega = v * math.sin(slip) / (f * ratio * length)
    assert out.yaw == pytest.approx(0.2 + omega * 0.5, abs=1e-12)


def test_straight_steer_is_exact():
    s = bic(v=4.0, yaw=1.0, steer=0.0)
    out = bicycle_transition(s, 0.5)
    assert out.x == pytest.approx(2.0 * math.cos(1.0), abs=1e-14)
    assert out.y == pytest.approx(2.0 * math.sin(1.0), abs=1e-14)
    assert out.yaw == pytest.approx(1.0, abs=1e-15)


def test_steer_angle_domain():
    with pytest.raises(ValueError):
        bic(steer=math.pi / 2)


# ---- analytic Jacobians vs finite differences ----

def _state(model, mean, p):
    return TrackState(model=model, mean=np.asarray(mean, float), cov=np.eye(MODEL_DIM[model]))


@pytest.mark.parametrize("model", list(ModelKind))
def test_transition_jacobian_matches_finite_differences(model, rng):
    p = params_for(model)
    for k in range(25):
        mean = np.zeros(MODEL_DIM[model])
        mean[:3] = rng.uniform(-20, 20, 3)
        if model in (ModelKind.CTRA, ModelKind.BICYCLE):
            mean[3] = rng.uniform(-10, 20)
            mean[4] = rng.uniform(-4, 4)
            mean[5] = rng.uniform(-3, 3)
            # exercise the small-turn branch on a share of the states
            mean[6] = [0.0, 1e-7, rng.uniform(-1.2, 1.2), rng.uniform(-0.05, 0.05)][k % 4]
            mean[7:] = rng.uniform(0.5, 4.0, 3)
        else:
            mean[3] = rng.uniform(-3, 3)
            mean[4:-3] = rng.uniform(-8, 8, MODEL_DIM[model] - 7)
            mean[-3:] = rng.uniform(0.5, 4.0, 3)
        s = _state(model, mean, p)
        fd = fd_jacobian(lambda v: transition(_state(model, v, p), p), mean)
        jac = jacobian(s, p)
        err = np.max(np.abs(fd - jac)) / max(1.0, np.max(np.abs(jac)))
        assert err < 1e-5


def test_measurement_jacobian_matches_finite_differences(rng):
    for model in (ModelKind.CTRA, ModelKind.BICYCLE, ModelKind.CV, ModelKind.CA):
        p = params_for(model)
        mean = np.zeros(MODEL_DIM[model])
        mean[:3] = rng.uniform(-5, 5, 3)
        if model in (ModelKind.CTRA, ModelKind.BICYCLE):
            mean[3:7] = [6.0, 1.0, 0.8, 0.25]
            mean[7:] = [0.6, 2.0, 1.4]
        else:
            mean[3] = 0.8
            mean[4:-3] = 1.0
            mean[-3:] = [0.6, 2.0, 1.4]
        s = _state(model, mean, p)
        fd = fd_jacobian(lambda v: measure(_state(model, v, p), p), mean)
        jac = measurement_jacobian(s, p, with_velocity=True)
        assert np.max(np.abs(fd - jac)) < 1e-6


# ---- linear baselines ----

def test_constant_velocity_step():
    p = params_for(ModelKind.CV, sigma=0.5)
    mean = np.array([1.0, 2.0, 0.5, 0.3, 4.0, -2.0, 0.5, 1.9, 4.6, 1.7])
    out = transition(_state(ModelKind.CV, mean, p), p)
    assert out[0] == pytest.approx(1.0 + 4.0 * 0.5)
    assert out[1] == pytest.approx(2.0 - 2.0 * 0.5)
    assert out[2] == pytest.approx(0.5 + 0.5 * 0.5)
    assert np.allclose(out[3:], mean[3:])


def test_constant_acceleration_step():
    p = params_for(ModelKind.CA, sigma=0.5)
    mean = np.array([0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 4.0, 0.0, 1.9, 4.6, 1.7])
    out = transition(_state(ModelKind.CA, mean, p), p)
    # x: v*s + a*s^2/2 with v=2, a=4
    assert out[0] == pytest.approx(2.0 * 0.5 + 0.5 * 4.0 * 0.25)
    assert out[4] == pytest.approx(2.0 + 4.0 * 0.5)


# ---- EKF mechanics ----

def test_predict_wraps_heading_and_keeps_covariance_psd():
    p = params_for(ModelKind.CTRA)
    mean = np.zeros(10)
    mean[3] = 5.0
    mean[5] = 3.1
    mean[6] = 0.5  # pushes yaw past pi
    s = TrackState(ModelKind.CTRA, mean, np.eye(10))
    out = predict(s, p)
    assert -math.pi < out.mean[5] <= math.pi
    assert np.allclose(out.cov, out.cov.T)
    assert np.linalg.eigvalsh(out.cov).min() > 0.0


def test_predict_rejects_non_finite_state():
    p = params_for(ModelKind.CTRA)
    mean = np.zeros(10)
    mean[0] = math.nan
    with pytest.raises(ValueError):
        predict(TrackState(ModelKind.CTRA, mean, np.eye(10)), p)


def test_update_moves_mean_toward_measurement_and_shrinks_variance():
    p = params_for(ModelKind.CTRA)
    det = make_box(x=1.0, y=0.5, z=0.8, w=1.8, l=4.4, h=1.6, yaw=0.1, vx=5.0, vy=0.5)
    s = init_track(make_box(x=0.0, y=0.0, z=1.0, w=1.9, l=4.6, h=1.7, yaw=0.0, vx=4.0, vy=0.0), p)
    prior_var = s.cov[0, 0]
    out = update(s, det, p)
    assert 0.0 < out.mean[0] < 1.0
    assert out.cov[0, 0] < prior_var
    assert np.linalg.eigvalsh(out.cov).min() > -1e-12


def test_update_wraps_heading_innovation_the_short_way():
    p = params_for(ModelKind.CTRA)
    prior = init_track(make_box(yaw=3.1, vx=0.0, vy=0.0), p)
    det = make_box(yaw=-3.1, vx=0.0, vy=0.0)
    out = update(prior, det, p)
    # the innovation is +0.083 (through pi), never -6.2; the posterior
    # heading therefore advances past 3.1 instead of collapsing toward 0
    moved = out.mean[5] - 3.1
    if moved < -math.pi:  # wrapped over the + pi end
        moved += 2.0 * math.pi
    assert 0.0 < moved < 0.084


def test_update_without_velocity_measurement():
    p = params_for(ModelKind.CTRA)
    s = init_track(make_box(vx=3.0, vy=0.0), p)
    det = make_box(x=0.3)
    out = update(s, det, p)
    assert np.all(np.isfinite(out.mean))


def test_update_ignores_velocity_when_disabled():
    p_on = params_for(ModelKind.CTRA, use_velocity=True)
    p_off = params_for(ModelKind.CTRA, use_velocity=False)
    det = make_box(x=0.4, vx=4.0, vy=1.0)
    det_novel = make_box(x=0.4)
    s = TrackState(ModelKind.CTRA, np.array([0, 0, 1, 5, 0, 0, 0, 1, 1, 2], float), np.eye(10))
    out_off = update(s, det, p_off)
    out_ref = update(s, det_novel, p_off)
    assert np.allclose(out_off.mean, out_ref.mean)
    out_on = update(s, det, p_on)
    assert not np.allclose(out_on.mean, out_off.mean)


def test_update_singular_innovation_raises_value_error():
    p = params_for(ModelKind.CTRA)
    zero = MotionParams(
        model=ModelKind.CTRA, sigma_s=0.5, q=np.zeros((10, 10)),
        r=np.zeros((9, 9)), p0=np.zeros((10, 10)),
    )
    s = TrackState(ModelKind.CTRA, np.zeros(10) + [0, 0, 0, 1, 0, 0, 0, 1, 1, 1], np.zeros((10, 10)))
    with pytest.raises(ValueError):
        update(s, make_box(), zero)


# ---- track initialization ----

def test_init_projects_velocity_onto_heading():
    p = params_for(ModelKind.CTRA)
    det = make_box(yaw=0.0, vx=3.0, vy=4.0)
    s = init_track(det, p)
    assert s.mean[3] == pytest.approx(3.0)  # the cross-heading part is noise
    det2 = make_box(yaw=math.pi / 2, vx=3.0, vy=4.0)
    assert init_track(det2, p).mean[3] == pytest.approx(4.0)


def test_init_reversing_velocity_gives_negative_speed():
    p = params_for(ModelKind.CTRA)
    s = init_track(make_box(yaw=0.0, vx=-2.0, vy=0.0), p)
    assert s.mean[3] == pytest.approx(-2.0)


def test_init_without_velocity_inflates_speed_variance():
    p = params_for(ModelKind.CTRA)
    s = init_track(make_box(), p)
    assert s.mean[3] == 0.0
    assert s.cov[3, 3] == pytest.approx(p.p0_vel_no_obs ** 2)
    s_with = init_track(make_box(vx=1.0, vy=0.0), p)
    assert s_with.cov[3, 3] < s.cov[3, 3]


def test_steered_center_offset_round_trip():
    p = make_motion_params(
        ModelKind.BICYCLE, 0.5,
        process_std=DEFAULT_PROCESS_STD,
        measurement_std=DEFAULT_MEASUREMENT_STD,
        initial_std=DEFAULT_INITIAL_STD,
        rear_axle_fraction=0.4,
    )
    det = make_box(x=5.0, y=2.0, yaw=0.9, w=0.6, l=2.0, h=1.4, vx=0.0, vy=0.0)
    s = init_track(det, p)
    off = 0.8 * (0.5 - 0.4) * 2.0
    assert s.mean[0] == pytest.approx(5.0 - off * math.cos(0.9), abs=1e-12)
    m = measure(s, p)
    assert m[0] == pytest.approx(det.x, abs=1e-12)
    assert m[1] == pytest.approx(det.y, abs=1e-12)
    assert m[6] == pytest.approx(det.yaw, abs=1e-12)


def test_centered_axle_has_no_offset():
    p = params_for(ModelKind.BICYCLE)  # rear_axle_fraction defaults to 0.5
    det = make_box(x=5.0, y=2.0, yaw=0.9, vx=0.0, vy=0.0)
    s = init_track(det, p)
    assert s.mean[0] == pytest.approx(5.0, abs=1e-15)


def test_measure_layouts_cover_all_models():
    for model in ModelKind:
        p = params_for(model)
        det = make_box(x=1.0, y=2.0, z=0.5, w=1.1, l=2.2, h=3.3, yaw=0.4, vx=1.0, vy=0.0)
        m = measure(init_track(det, p), p)
        assert m[:7] == pytest.approx([1.0, 2.0, 0.5, 1.1, 2.2, 3.3, 0.4], abs=1e-12)

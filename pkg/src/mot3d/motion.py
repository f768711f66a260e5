"""Motion models and the extended Kalman filter that runs them.

Two nonlinear ground-plane models carry the tracker: a turning, accelerating
point (state ``[x, y, z, v, a, yaw, omega, w, l, h]``) and a front-steered
box whose gravity center rides between the axles
(state ``[x, y, z, v, a, yaw, steer, w, l, h]``). Linear constant-velocity
and constant-acceleration baselines are included for comparisons.

Transitions are exact over a step: position displacement integrates speed
times heading in closed form. The closed forms are built from arc integrals
evaluated with series-stabilized primitives, so the straight-line limit
(turn rate -> 0) is handled without a separate formula and the transition
stays accurate to machine precision on both sides of it. Analytic Jacobians
are exact derivatives of the same primitives.

During every transition the height coordinate, the acceleration, and the
box size stay constant; only the planar pose and speed evolve.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

import numpy as np

from .geometry import BoxState, wrap_angle


class ModelKind(enum.Enum):
    """Motion model selector."""

    CTRA = "ctra"          # constant turn rate and acceleration
    BICYCLE = "bicycle"    # constant steer angle and speed
    CV = "cv"              # constant velocity, linear
    CA = "ca"              # constant acceleration, linear, per-axis


MODEL_DIM = {
    ModelKind.CTRA: 10,
    ModelKind.BICYCLE: 10,
    ModelKind.CV: 10,
    ModelKind.CA: 12,
}

# State component names, used to build noise matrices from per-component
# standard deviations.
LAYOUTS = {
    ModelKind.CTRA: ("x", "y", "z", "v", "a", "yaw", "omega", "w", "l", "h"),
    ModelKind.BICYCLE: ("x", "y", "z", "v", "a", "yaw", "steer", "w", "l", "h"),
    ModelKind.CV: ("x", "y", "z", "yaw", "vx", "vy", "vz", "w", "l", "h"),
    ModelKind.CA: ("x", "y", "z", "yaw", "vx", "vy", "vz", "ax", "ay", "w", "l", "h"),
}

COMPONENT_OF = {
    "x": "pos", "y": "pos", "z": "z",
    "v": "vel", "vx": "vel", "vy": "vel", "vz": "vel_z",
    "a": "acc", "ax": "acc", "ay": "acc",
    "yaw": "yaw", "omega": "turn", "steer": "steer",
    "w": "size", "l": "size", "h": "size",
}

# Measurement vector layout: box center, size, heading, then optionally
# ground-plane velocity.
MEAS_COMPONENTS = ("pos", "pos", "z", "size", "size", "size", "yaw", "vel", "vel")

_YAW_IDX = {ModelKind.CTRA: 5, ModelKind.BICYCLE: 5, ModelKind.CV: 3, ModelKind.CA: 3}


@dataclass(frozen=True)
class CtraState:
    """Typed view of the turning/accelerating state vector."""

    x: float
    y: float
    z: float
    v: float
    a: float
    yaw: float
    omega: float
    w: float
    l: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0.0 and self.l > 0.0 and self.h > 0.0):
            raise ValueError("box sizes must be positive")
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.x, self.y, self.z, self.v, self.a, self.yaw, self.omega,
             self.w, self.l, self.h], dtype=np.float64,
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "CtraState":
        return cls(*(float(v) for v in vec))


@dataclass(frozen=True)
class BicState:
    """Typed view of the front-steered state vector (gravity-center pose)."""

    x: float
    y: float
    z: float
    v: float
    a: float
    yaw: float
    steer: float
    w: float
    l: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0.0 and self.l > 0.0 and self.h > 0.0):
            raise ValueError("box sizes must be positive")
        if not abs(self.steer) < 0.5 * math.pi:
            raise ValueError(f"steer angle must satisfy |steer| < pi/2, got {self.steer}")
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.x, self.y, self.z, self.v, self.a, self.yaw, self.steer,
             self.w, self.l, self.h], dtype=np.float64,
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "BicState":
        return cls(*(float(v) for v in vec))


@dataclass
class TrackState:
    """Filter state: model selector, mean vector, covariance."""

    model: ModelKind
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        dim = MODEL_DIM[self.model]
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        if self.mean.shape != (dim,):
            raise ValueError(f"{self.model.value} mean must have shape ({dim},)")
        if self.cov.shape != (dim, dim):
            raise ValueError(f"{self.model.value} covariance must have shape ({dim}, {dim})")


def _check_psd(name: str, mat: np.ndarray) -> None:
    if not np.allclose(mat, mat.T, atol=1e-9):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(mat)
    if eigs.min() < -1e-9:
        raise ValueError(f"{name} must be positive semidefinite, min eigenvalue {eigs.min()}")


@dataclass
class MotionParams:
    """Per-category filter tuning.

    Attributes:
        model: Which motion model the category uses.
        sigma_s: Default step length in seconds.
        q: Process noise covariance, sized to the model layout.
        r: Measurement noise covariance over the full 9-dim measurement.
        p0: Initial state covariance, sized to the model layout.
        wheelbase_ratio: Wheelbase as a fraction of box length (steered model).
        rear_axle_fraction: Rear-axle distance of the gravity center as a
            fraction of the wheelbase, bounded to [0.4, 0.5].
        p0_vel_no_obs: Initial velocity std used when a detection carries no
            velocity measurement.
        use_velocity: Whether updates consume detection velocity when present.
    """

    model: ModelKind
    sigma_s: float
    q: np.ndarray
    r: np.ndarray
    p0: np.ndarray
    wheelbase_ratio: float = 0.8
    rear_axle_fraction: float = 0.5
    p0_vel_no_obs: float = 10.0
    use_velocity: bool = True

    def __post_init__(self) -> None:
        dim = MODEL_DIM[self.model]
        self.q = np.asarray(self.q, dtype=np.float64)
        self.r = np.asarray(self.r, dtype=np.float64)
        self.p0 = np.asarray(self.p0, dtype=np.float64)
        if self.sigma_s <= 0.0:
            raise ValueError(f"sigma_s must be positive, got {self.sigma_s}")
        if self.q.shape != (dim, dim) or self.p0.shape != (dim, dim):
            raise ValueError(f"q and p0 must be ({dim}, {dim}) for {self.model.value}")
        if self.r.shape != (9, 9):
            raise ValueError("r must cover the 9-dim measurement")
        if not 0.0 < self.wheelbase_ratio <= 1.0:
            raise ValueError(f"wheelbase_ratio must be in (0, 1], got {self.wheelbase_ratio}")
        if not 0.4 <= self.rear_axle_fraction <= 0.5:
            raise ValueError(
                f"rear_axle_fraction must be in [0.4, 0.5], got {self.rear_axle_fraction}"
            )
        _check_psd("q", self.q)
        _check_psd("r", self.r)
        _check_psd("p0", self.p0)


def make_motion_params(
    model: ModelKind,
    sigma_s: float,
    process_std: Mapping[str, float],
    measurement_std: Mapping[str, float],
    initial_std: Mapping[str, float],
    wheelbase_ratio: float = 0.8,
    rear_axle_fraction: float = 0.5,
    use_velocity: bool = True,
) -> MotionParams:
    """Build MotionParams from per-component standard deviations.

    The std mappings are keyed by component name (pos, z, vel, vel_z, acc,
    yaw, turn, steer, size); initial_std additionally takes vel_no_obs.
    """
    names = LAYOUTS[model]
    q = np.diag([process_std[COMPONENT_OF[n]] ** 2 for n in names])
    p0 = np.diag([initial_std[COMPONENT_OF[n]] ** 2 for n in names])
    r = np.diag([measurement_std[c if c != "vel_z" else "vel"] ** 2 for c in MEAS_COMPONENTS])
    return MotionParams(
        model=model,
        sigma_s=sigma_s,
        q=q,
        r=r,
        p0=p0,
        wheelbase_ratio=wheelbase_ratio,
        rear_axle_fraction=rear_axle_fraction,
        p0_vel_no_obs=float(initial_std.get("vel_no_obs", 10.0)),
        use_velocity=use_velocity,
    )


# --- arc integral primitives -------------------------------------------------
#
# All displacements reduce to integrals of cos/sin(theta0 + omega*t) weighted
# by 1, t, t^2 over [0, sigma]. Writing h = omega*sigma/2 and mid =
# theta0 + h, each integral factors into sin(mid)/cos(mid) times one of
#   sinc(h) = sin(h)/h
#   gh(h)   = (cos(h) - sinc(h)) / h
#   ghh(h)  = (cos(h) - sinc(h)) / h^2
# which are evaluated by series below |h| = 0.05 so no precision is lost to
# cancellation as the turn rate crosses zero.

_SERIES_H = 0.05


def _stable_trio(h: float) -> Tuple[float, float, float]:
    if abs(h) < _SERIES_H:
        h2 = h * h
        sinc = 1.0 - h2 / 6.0 + h2 * h2 / 120.0 - h2 * h2 * h2 / 5040.0
        ghh = -1.0 / 3.0 + h2 / 30.0 - h2 * h2 / 840.0 + h2 * h2 * h2 / 45360.0
        return sinc, h * ghh, ghh
    sinc = math.sin(h) / h
    g = math.cos(h) - sinc
    return sinc, g / h, g / (h * h)


def _arc_integrals(
    theta0: float, omega: float, sigma: float
) -> Tuple[float, float, float, float, float, float]:
    """Integrals of cos/sin(theta0 + omega*t) weighted by 1, t, t^2 on [0, sigma].

    Returns (ic, is_, itc, its, it2c, it2s).
    """
    h = 0.5 * omega * sigma
    mid = theta0 + h
    sm = math.sin(mid)
    cm = math.cos(mid)
    sinc, gh, ghh = _stable_trio(h)
    qh = sinc + ghh
    ic = sigma * sinc * cm
    is_ = sigma * sinc * sm
    itc = 0.5 * sigma * sigma * (sm * gh + cm * sinc)
    its = 0.5 * sigma * sigma * (sm * sinc - cm * gh)
    it2c = 0.5 * sigma ** 3 * (sm * gh + cm * qh)
    it2s = 0.5 * sigma ** 3 * (sm * qh - cm * gh)
    return ic, is_, itc, its, it2c, it2s


# --- turning/accelerating model ----------------------------------------------


def _ctra_propagate(mean: np.ndarray, sigma: float) -> np.ndarray:
    v, a, yaw, omega = mean[3], mean[4], mean[5], mean[6]
    ic, is_, itc, its, _, _ = _arc_integrals(yaw, omega, sigma)
    out = mean.copy()
    out[0] += v * ic + a * itc
    out[1] += v * is_ + a * its
    out[3] = v + a * sigma
    out[5] = yaw + omega * sigma
    return out


def _ctra_jacobian(mean: np.ndarray, sigma: float) -> np.ndarray:
    v, a, yaw, omega = mean[3], mean[4], mean[5], mean[6]
    ic, is_, itc, its, it2c, it2s = _arc_integrals(yaw, omega, sigma)
    dx = v * ic + a * itc
    dy = v * is_ + a * its
    jac = np.eye(10)
    jac[0, 3] = ic
    jac[0, 4] = itc
    jac[0, 5] = -dy
    jac[0, 6] = -(v * its + a * it2s)
    jac[1, 3] = is_
    jac[1, 4] = its
    jac[1, 5] = dx
    jac[1, 6] = v * itc + a * it2c
    jac[3, 4] = sigma
    jac[5, 6] = sigma
    return jac


def ctra_transition(s: CtraState, sigma_s: float) -> CtraState:
    """Advance a turning/accelerating state by sigma_s seconds."""
    return CtraState.from_vector(_ctra_propagate(s.as_vector(), sigma_s))


# --- front-steered model -------------------------------------------------------


def _bic_geometry(
    v: float, steer: float, length: float, wheelbase_ratio: float, rear_axle_fraction: float
) -> Tuple[float, float, float]:
    """Slip angle, yaw rate, and rear-axle distance for the steered model."""
    rear = rear_axle_fraction * wheelbase_ratio * length
    slip = math.atan(rear_axle_fraction * math.tan(steer))
    omega = v * math.sin(slip) / rear
    return slip, omega, rear


def _bic_propagate(
    mean: np.ndarray, sigma: float, wheelbase_ratio: float, rear_axle_fraction: float
) -> np.ndarray:
    v, yaw, steer, length = mean[3], mean[5], mean[6], mean[8]
    slip, omega, _ = _bic_geometry(v, steer, length, wheelbase_ratio, rear_axle_fraction)
    ic, is_, _, _, _, _ = _arc_integrals(yaw + slip, omega, sigma)
    out = mean.copy()
    out[0] += v * ic
    out[1] += v * is_
    out[5] = yaw + omega * sigma
    return out


def _bic_jacobian(
    mean: np.ndarray, sigma: float, wheelbase_ratio: float, rear_axle_fraction: float
) -> np.ndarray:
    v, yaw, steer, length = mean[3], mean[5], mean[6], mean[8]
    slip, omega, rear = _bic_geometry(v, steer, length, wheelbase_ratio, rear_axle_fraction)
    ic, is_, itc, its, _, _ = _arc_integrals(yaw + slip, omega, sigma)

    # omega = v*sin(slip)/rear, slip depends on steer only, rear scales with l.
    tb = math.tan(steer)
    f = rear_axle_fraction
    dslip_dsteer = f * (1.0 + tb * tb) / (1.0 + f * f * tb * tb)
    k = math.sin(slip) / rear
    dom_dv = k
    dom_dsteer = v * math.cos(slip) / rear * dslip_dsteer
    dom_dl = -omega / length

    dx = v * ic
    dy = v * is_
    jac = np.eye(10)
    jac[0, 3] = ic - v * its * dom_dv
    jac[0, 5] = -dy
    jac[0, 6] = v * (-is_ * dslip_dsteer - its * dom_dsteer)
    jac[0, 8] = -v * its * dom_dl
    jac[1, 3] = is_ + v * itc * dom_dv
    jac[1, 5] = dx
    jac[1, 6] = v * (ic * dslip_dsteer + itc * dom_dsteer)
    jac[1, 8] = v * itc * dom_dl
    jac[5, 3] = sigma * k
    jac[5, 6] = sigma * dom_dsteer
    jac[5, 8] = sigma * dom_dl
    return jac


def bicycle_transition(
    s: BicState,
    sigma_s: float,
    wheelbase_ratio: float = 0.8,
    rear_axle_fraction: float = 0.5,
) -> BicState:
    """Advance a front-steered state by sigma_s seconds at constant speed."""
    return BicState.from_vector(
        _bic_propagate(s.as_vector(), sigma_s, wheelbase_ratio, rear_axle_fraction)
    )


# --- linear baselines ----------------------------------------------------------


def _linear_matrix(model: ModelKind, sigma: float) -> np.ndarray:
    if model is ModelKind.CV:
        jac = np.eye(10)
        jac[0, 4] = sigma
        jac[1, 5] = sigma
        jac[2, 6] = sigma
        return jac
    jac = np.eye(12)
    jac[0, 4] = sigma
    jac[1, 5] = sigma
    jac[2, 6] = sigma
    jac[0, 7] = 0.5 * sigma * sigma
    jac[1, 8] = 0.5 * sigma * sigma
    jac[4, 7] = sigma
    jac[5, 8] = sigma
    return jac


# --- generic EKF interface -----------------------------------------------------


def transition(s: TrackState, p: MotionParams, sigma_s: Optional[float] = None) -> np.ndarray:
    """Raw propagated mean after one step; heading left unwrapped."""
    sigma = p.sigma_s if sigma_s is None else sigma_s
    if s.model is ModelKind.CTRA:
        return _ctra_propagate(s.mean, sigma)
    if s.model is ModelKind.BICYCLE:
        return _bic_propagate(s.mean, sigma, p.wheelbase_ratio, p.rear_axle_fraction)
    return _linear_matrix(s.model, sigma) @ s.mean


def jacobian(s: TrackState, p: MotionParams, sigma_s: Optional[float] = None) -> np.ndarray:
    """Analytic transition Jacobian at the current mean."""
    sigma = p.sigma_s if sigma_s is None else sigma_s
    if s.model is ModelKind.CTRA:
        return _ctra_jacobian(s.mean, sigma)
    if s.model is ModelKind.BICYCLE:
        return _bic_jacobian(s.mean, sigma, p.wheelbase_ratio, p.rear_axle_fraction)
    return _linear_matrix(s.model, sigma)


def predict(s: TrackState, p: MotionParams, sigma_s: Optional[float] = None) -> TrackState:
    """One EKF prediction step: propagate the mean, inflate the covariance."""
    if not np.all(np.isfinite(s.mean)):
        raise ValueError(f"cannot predict from non-finite state mean {s.mean}")
    mean = transition(s, p, sigma_s)
    if not np.all(np.isfinite(mean)):
        raise ValueError(f"transition produced a non-finite mean from {s.mean}")
    jac = jacobian(s, p, sigma_s)
    cov = jac @ s.cov @ jac.T + p.q
    cov = 0.5 * (cov + cov.T)
    yaw_idx = _YAW_IDX[s.model]
    mean[yaw_idx] = wrap_angle(mean[yaw_idx])
    return TrackState(model=s.model, mean=mean, cov=cov)


def measure(s: TrackState, p: MotionParams) -> np.ndarray:
    """Expected measurement [x, y, z, w, l, h, yaw, vx, vy] for a state.

    The steered model reports the geometric box center, offset from the
    tracked gravity center along the heading, and a velocity direction that
    includes the slip angle.
    """
    m = s.mean
    if s.model is ModelKind.CTRA:
        v, yaw = m[3], m[5]
        return np.array(
            [m[0], m[1], m[2], m[7], m[8], m[9], yaw,
             v * math.cos(yaw), v * math.sin(yaw)]
        )
    if s.model is ModelKind.BICYCLE:
        v, yaw, steer, length = m[3], m[5], m[6], m[8]
        slip = math.atan(p.rear_axle_fraction * math.tan(steer))
        off = p.wheelbase_ratio * (0.5 - p.rear_axle_fraction) * length
        head = yaw + slip
        return np.array(
            [m[0] + off * math.cos(yaw), m[1] + off * math.sin(yaw), m[2],
             m[7], m[8], m[9], yaw, v * math.cos(head), v * math.sin(head)]
        )
    if s.model is ModelKind.CV:
        return np.array([m[0], m[1], m[2], m[7], m[8], m[9], m[3], m[4], m[5]])
    return np.array([m[0], m[1], m[2], m[9], m[10], m[11], m[3], m[4], m[5]])


def measurement_jacobian(s: TrackState, p: MotionParams, with_velocity: bool) -> np.ndarray:
    """Jacobian of measure() rows with respect to the state."""
    dim = MODEL_DIM[s.model]
    rows = 9 if with_velocity else 7
    jac = np.zeros((rows, dim))
    m = s.mean
    if s.model is ModelKind.CTRA:
        for r, c in ((0, 0), (1, 1), (2, 2), (3, 7), (4, 8), (5, 9), (6, 5)):
            jac[r, c] = 1.0
        if with_velocity:
            v, yaw = m[3], m[5]
            jac[7, 3] = math.cos(yaw)
            jac[7, 5] = -v * math.sin(yaw)
            jac[8, 3] = math.sin(yaw)
            jac[8, 5] = v * math.cos(yaw)
        return jac
    if s.model is ModelKind.BICYCLE:
        v, yaw, steer, length = m[3], m[5], m[6], m[8]
        f = p.rear_axle_fraction
        off_per_l = p.wheelbase_ratio * (0.5 - f)
        off = off_per_l * length
        for r, c in ((0, 0), (1, 1), (2, 2), (3, 7), (4, 8), (5, 9), (6, 5)):
            jac[r, c] = 1.0
        jac[0, 5] = -off * math.sin(yaw)
        jac[0, 8] = off_per_l * math.cos(yaw)
        jac[1, 5] = off * math.cos(yaw)
        jac[1, 8] = off_per_l * math.sin(yaw)
        if with_velocity:
            tb = math.tan(steer)
            slip = math.atan(f * tb)
            dslip = f * (1.0 + tb * tb) / (1.0 + f * f * tb * tb)
            head = yaw + slip
            jac[7, 3] = math.cos(head)
            jac[7, 5] = -v * math.sin(head)
            jac[7, 6] = -v * math.sin(head) * dslip
            jac[8, 3] = math.sin(head)
            jac[8, 5] = v * math.cos(head)
            jac[8, 6] = v * math.cos(head) * dslip
        return jac
    size0 = 7 if s.model is ModelKind.CV else 9
    for r, c in ((0, 0), (1, 1), (2, 2), (3, size0), (4, size0 + 1), (5, size0 + 2), (6, 3)):
        jac[r, c] = 1.0
    if with_velocity:
        jac[7, 4] = 1.0
        jac[8, 5] = 1.0
    return jac


def update(s: TrackState, det: BoxState, p: MotionParams) -> TrackState:
    """One EKF measurement update against a detection.

    The heading innovation is wrapped to (-pi, pi]; the posterior covariance
    uses the Joseph form and is re-symmetrized.
    """
    with_velocity = p.use_velocity and det.vx is not None and det.vy is not None
    k = 9 if with_velocity else 7
    z = np.array(
        [det.x, det.y, det.z, det.w, det.l, det.h, det.yaw]
        + ([det.vx, det.vy] if with_velocity else [])
    )
    hx = measure(s, p)[:k]
    jac = measurement_jacobian(s, p, with_velocity)
    r = p.r[:k, :k]
    innovation = z - hx
    innovation[6] = wrap_angle(innovation[6])
    ph_t = s.cov @ jac.T
    s_mat = jac @ ph_t + r
    try:
        gain = np.linalg.solve(s_mat, ph_t.T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"innovation covariance is singular: {exc}") from exc
    mean = s.mean + gain @ innovation
    yaw_idx = _YAW_IDX[s.model]
    mean[yaw_idx] = wrap_angle(mean[yaw_idx])
    i_kh = np.eye(MODEL_DIM[s.model]) - gain @ jac
    cov = i_kh @ s.cov @ i_kh.T + gain @ r @ gain.T
    cov = 0.5 * (cov + cov.T)
    return TrackState(model=s.model, mean=mean, cov=cov)


def init_track(det: BoxState, p: MotionParams) -> TrackState:
    """Start a filter state from a detection.

    Detection velocity, when present and enabled, seeds the speed (projected
    onto the heading for the nonlinear models); otherwise speed starts at 0
    with an inflated initial variance.
    """
    has_vel = p.use_velocity and det.vx is not None and det.vy is not None
    if has_vel:
        along = det.vx * math.cos(det.yaw) + det.vy * math.sin(det.yaw)
    else:
        along = 0.0

    cov = p.p0.copy()
    names = LAYOUTS[p.model]
    if not has_vel:
        for i, name in enumerate(names):
            if COMPONENT_OF[name] == "vel":
                cov[i, i] = p.p0_vel_no_obs ** 2

    if p.model is ModelKind.CTRA:
        mean = np.array(
            [det.x, det.y, det.z, along, 0.0, det.yaw, 0.0, det.w, det.l, det.h]
        )
    elif p.model is ModelKind.BICYCLE:
        off = p.wheelbase_ratio * (0.5 - p.rear_axle_fraction) * det.l
        mean = np.array(
            [det.x - off * math.cos(det.yaw), det.y - off * math.sin(det.yaw), det.z,
             along, 0.0, det.yaw, 0.0, det.w, det.l, det.h]
        )
    elif p.model is ModelKind.CV:
        vx = det.vx if has_vel else 0.0
        vy = det.vy if has_vel else 0.0
        mean = np.array(
            [det.x, det.y, det.z, det.yaw, vx, vy, 0.0, det.w, det.l, det.h]
        )
    else:
        vx = det.vx if has_vel else 0.0
        vy = det.vy if has_vel else 0.0
        mean = np.array(
            [det.x, det.y, det.z, det.yaw, vx, vy, 0.0, 0.0, 0.0,
             det.w, det.l, det.h]
        )
    return TrackState(model=p.model, mean=mean, cov=cov)

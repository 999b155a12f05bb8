"""PID person-following with an engage/stop hysteresis band.

Two independent loops: distance error drives forward speed, bearing drives the
turn rate. The robot starts moving only once the target is farther than
``z_engage_m`` and stops when it gets within ``z_stop_m``. While the target is
occluded the last forward speed ramps down to zero; when the track is lost or
not yet acquired everything is reset.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ParameterError
from .tracker import TrackMode, TrackState


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 1.0  # bound on |ki * integral|, same units as the output

    def __post_init__(self) -> None:
        if min(self.kp, self.ki, self.kd) < 0:
            raise ParameterError("PID gains must be >= 0")
        if not self.integral_limit > 0:
            raise ParameterError("integral_limit must be > 0")


@dataclass(frozen=True)
class ControlGains:
    distance: PidGains = PidGains(kp=0.5, ki=0.05, kd=0.1, integral_limit=1.0)
    heading: PidGains = PidGains(kp=1.5, ki=0.0, kd=0.2, integral_limit=1.0)


@dataclass(frozen=True)
class ControllerConfig:
    z_setpoint_m: float = 1.5
    z_engage_m: float = 2.0
    z_stop_m: float = 1.5
    v_max: float = 0.7
    w_max: float = 1.0
    decel_time_s: float = 0.5

    def __post_init__(self) -> None:
        if not 0 < self.z_stop_m <= self.z_setpoint_m <= self.z_engage_m:
            raise ParameterError("need 0 < z_stop_m <= z_setpoint_m <= z_engage_m")
        if not (self.v_max > 0 and self.w_max > 0):
            raise ParameterError("v_max and w_max must be > 0")
        if not self.decel_time_s > 0:
            raise ParameterError("decel_time_s must be > 0")


@dataclass(frozen=True)
class ControlCommand:
    v: float
    w: float
    engaged: bool


@dataclass(frozen=True)
class ControllerState:
    engaged: bool = False
    integral_z: float = 0.0
    integral_heading: float = 0.0
    prev_error_z: float | None = None
    prev_error_heading: float | None = None
    v_hold: float = 0.0  # forward speed at the last tracked frame, ramped down while occluded


_RAMP_EPS = 1e-9


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _pid(gains: PidGains, error: float, integral: float, prev: float | None, dt: float):
    integral += error * dt
    if gains.ki > 0:
        bound = gains.integral_limit / gains.ki
        integral = _clamp(integral, -bound, bound)
    derivative = 0.0 if prev is None else (error - prev) / dt
    out = gains.kp * error + gains.ki * integral + gains.kd * derivative
    return out, integral


def reset(state: ControllerState | None = None) -> ControllerState:
    return ControllerState()


def update(
    state: ControllerState,
    track: TrackState,
    dt: float,
    gains: ControlGains = ControlGains(),
    cfg: ControllerConfig = ControllerConfig(),
) -> tuple[ControllerState, ControlCommand]:
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")

    if track.mode in (TrackMode.LOST, TrackMode.SEARCHING):
        return reset(state), ControlCommand(0.0, 0.0, False)

    if track.mode is TrackMode.OCCLUDED:
        frac = 1.0 - track.time_since_seen_s / cfg.decel_time_s
        # time_since_seen is a sum of dts; absorb its rounding so the ramp lands on 0
        v = state.v_hold * frac if frac > _RAMP_EPS else 0.0
        # integrals frozen; derivative restarts on reacquisition
        new = replace(state, prev_error_z=None, prev_error_heading=None)
        return new, ControlCommand(_clamp(v, 0.0, cfg.v_max), 0.0, state.engaged)

    m = track.last_measurement
    z = m.z_m
    if not state.engaged:
        if z > cfg.z_engage_m:
            state = replace(reset(state), engaged=True)
        else:
            return replace(state, v_hold=0.0), ControlCommand(0.0, 0.0, False)
    elif z <= cfg.z_stop_m:
        return reset(state), ControlCommand(0.0, 0.0, False)

    e_z = z - cfg.z_setpoint_m
    u_z, i_z = _pid(gains.distance, e_z, state.integral_z, state.prev_error_z, dt)
    # positive bearing means the target is to the right, which needs a negative (clockwise) turn
    e_h = -m.bearing_rad
    u_h, i_h = _pid(gains.heading, e_h, state.integral_heading, state.prev_error_heading, dt)
    v = _clamp(u_z, 0.0, cfg.v_max)
    w = _clamp(u_h, -cfg.w_max, cfg.w_max)
    new = ControllerState(True, i_z, i_h, e_z, e_h, v)
    return new, ControlCommand(v, w, True)

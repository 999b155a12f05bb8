import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereofollow.control import (
    ControlGains,
    ControllerConfig,
    ControllerState,
    PidGains,
    reset,
    update,
)
from stereofollow.errors import ParameterError
from stereofollow.geometry import DepthMeasurement
from stereofollow.tracker import TrackMode, TrackState

CFG = ControllerConfig()
GAINS = ControlGains()


def tracking(z, bearing=0.0):
    return TrackState(TrackMode.TRACKING, DepthMeasurement(z, bearing, 0.0, 0.0, 0.0), 0.0)


def test_zero_error_gives_zero_command():
    state = ControllerState(engaged=True)
    _, cmd = update(state, tracking(CFG.z_setpoint_m), 0.1, GAINS, CFG)
    assert (cmd.v, cmd.w) == (0.0, 0.0)


def test_p_only_hand_value():
    cfg = ControllerConfig(z_setpoint_m=2.0, z_engage_m=2.0, z_stop_m=1.5, v_max=0.7)
    gains = ControlGains(distance=PidGains(0.5), heading=PidGains(1.5))
    _, cmd = update(ControllerState(), tracking(3.0), 0.1, gains, cfg)
    assert cmd.v == pytest.approx(0.5) and cmd.engaged


@pytest.mark.parametrize("mode", [TrackMode.LOST, TrackMode.SEARCHING])
def test_lost_or_searching_stops_and_resets(mode):
    state = ControllerState(engaged=True, integral_z=3.0, prev_error_z=1.0, v_hold=0.5)
    new, cmd = update(state, TrackState(mode, None, 5.0), 0.1, GAINS, CFG)
    assert (cmd.v, cmd.w, cmd.engaged) == (0.0, 0.0, False)
    assert new == ControllerState()


def test_does_not_engage_below_threshold():
    s, cmd = update(ControllerState(), tracking(2.0), 0.1, GAINS, CFG)
    assert not cmd.engaged and cmd.v == 0.0
    s, cmd = update(s, tracking(2.0001), 0.1, GAINS, CFG)
    assert cmd.engaged and cmd.v > 0.0


def test_disengages_at_stop_distance():
    s, _ = update(ControllerState(), tracking(3.0), 0.1, GAINS, CFG)
    s, cmd = update(s, tracking(CFG.z_stop_m), 0.1, GAINS, CFG)
    assert not cmd.engaged and cmd.v == 0.0 and s == ControllerState()


def test_heading_sign_turns_toward_target():
    s, cmd = update(ControllerState(), tracking(3.0, bearing=0.2), 0.1, GAINS, CFG)
    assert cmd.w < 0  # target to the right -> clockwise
    s, cmd = update(ControllerState(), tracking(3.0, bearing=-0.2), 0.1, GAINS, CFG)
    assert cmd.w > 0


def test_first_sample_derivative_is_zero():
    gains = ControlGains(distance=PidGains(0.0, 0.0, 5.0), heading=PidGains(0.0, 0.0, 5.0))
    _, cmd = update(ControllerState(), tracking(3.0, 0.3), 0.1, gains, CFG)
    assert (cmd.v, cmd.w) == (0.0, 0.0)


def test_integral_clamped():
    gains = ControlGains(distance=PidGains(0.0, 1.0, 0.0, integral_limit=0.3))
    s = ControllerState()
    for _ in range(100):
        s, cmd = update(s, tracking(5.0), 0.1, gains, CFG)
    assert gains.distance.ki * s.integral_z == pytest.approx(0.3)
    assert cmd.v == pytest.approx(0.3)


def test_occlusion_ramp():
    s, cmd = update(ControllerState(), tracking(3.0), 0.1, GAINS, CFG)
    v0 = cmd.v
    integral = s.integral_z
    vs = []
    for k in range(1, 8):
        s, cmd = update(s, TrackState(TrackMode.OCCLUDED, None, 0.1 * k), 0.1, GAINS, CFG)
        vs.append(cmd.v)
        assert cmd.w == 0.0 and s.integral_z == integral
    assert vs[0] == pytest.approx(v0 * 0.8)
    assert vs[4:] == [0.0, 0.0, 0.0]
    assert all(a >= b for a, b in zip(vs, vs[1:]))


def test_occlusion_ramp_reaches_zero_despite_rounding():
    s, _ = update(ControllerState(), tracking(3.0), 0.05, GAINS, CFG)
    elapsed = 0.0
    for _ in range(10):
        elapsed += 0.05
    assert elapsed < CFG.decel_time_s
    _, cmd = update(s, TrackState(TrackMode.OCCLUDED, None, elapsed), 0.05, GAINS, CFG)
    assert cmd.v == 0.0


class TestReset:
    def test_zeroes(self):
        assert reset(ControllerState(True, 1.0, 2.0, 3.0, 4.0, 0.5)) == ControllerState()

    def test_idempotent(self):
        assert reset(reset(ControllerState(engaged=True))) == reset(ControllerState(engaged=True))

    def test_update_after_reset(self):
        s = reset(ControllerState(engaged=True, integral_z=5.0, prev_error_z=2.0))
        _, cmd = update(s, tracking(CFG.z_setpoint_m), 0.1, GAINS, CFG)
        assert (cmd.v, cmd.w) == (0.0, 0.0)


@pytest.mark.parametrize("kwargs", [dict(z_stop_m=2.5), dict(v_max=0.0), dict(decel_time_s=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        ControllerConfig(**kwargs)


modes = st.sampled_from(list(TrackMode))


@settings(max_examples=300)
@given(st.lists(st.tuples(modes, st.floats(0.05, 50.0), st.floats(-1.5, 1.5), st.floats(0.01, 0.5)),
                max_size=40))
def test_output_always_saturated(seq):
    s = ControllerState()
    tss = 0.0
    for mode, z, b, dt in seq:
        tss = 0.0 if mode is TrackMode.TRACKING else tss + dt
        m = DepthMeasurement(z, b, 0.0, 0.0, 0.0)
        s, cmd = update(s, TrackState(mode, m, tss), dt, GAINS, CFG)
        assert 0.0 <= cmd.v <= CFG.v_max
        assert abs(cmd.w) <= CFG.w_max
        assert not math.isnan(cmd.v)


@settings(max_examples=200)
@given(st.lists(st.floats(1.5001, 2.0), min_size=1, max_size=50), st.booleans())
def test_engagement_never_chatters_inside_band(zs, start_engaged):
    s = ControllerState(engaged=start_engaged)
    for z in zs:
        s, cmd = update(s, tracking(z), 0.1, GAINS, CFG)
        assert cmd.engaged is start_engaged


@settings(max_examples=50)
@given(st.floats(0.0, 0.7), st.integers(5, 30))
def test_occlusion_safety(v_hold, frames):
    s = ControllerState(engaged=True, v_hold=v_hold)
    cmd = None
    for k in range(1, frames + 1):
        s, cmd = update(s, TrackState(TrackMode.OCCLUDED, None, 0.1 * k), 0.1, GAINS, CFG)
    assert cmd.v == 0.0


def test_bad_dt():
    with pytest.raises(ParameterError):
        update(ControllerState(), tracking(3.0), 0.0, GAINS, CFG)

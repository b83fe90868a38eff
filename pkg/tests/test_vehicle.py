import numpy as np
import pytest
from numpy.testing import assert_allclose

from drivedae.sim import VehicleSpec, VehicleState, step_vehicle
from drivedae.sim.vehicle import footprint_corners, wrap_angle

SPEC = VehicleSpec()


def test_default_footprint_matches_platform():
    assert SPEC.width == 1.86
    assert SPEC.length == 4.5
    assert SPEC.max_speed == 30.0


def test_rest_zero_input_is_fixed_point():
    s0 = VehicleState.at(3.0, -2.0, yaw=0.4)
    s1 = step_vehicle(s0, (0.0, 0.0), 0.1)
    assert np.array_equal(s1.position, s0.position)
    assert s1.yaw == s0.yaw
    assert s1.speed == 0.0
    assert s1.steer_angle == 0.0


def test_constant_steer_yaw_rate_closed_form():
    delta = 0.3
    v = 10.0
    s = VehicleState(position=np.zeros(2), yaw=0.0, speed=v, steer_angle=delta)
    ci = (delta / SPEC.max_steer_angle, 0.0)
    dt = 0.1
    s1 = step_vehicle(s, ci, dt)
    measured = (s1.yaw - s.yaw) / dt
    assert_allclose(measured, v * np.tan(delta) / SPEC.wheelbase, atol=1e-9)
    assert s1.speed == v


def test_full_pedal_reaches_speed_cap_exactly():
    s = VehicleState.at(0.0, 0.0)
    for _ in range(600):
        s = step_vehicle(s, (0.0, 1.0), 0.1)
    assert s.speed == 30.0


def test_braking_stops_at_zero():
    s = VehicleState(position=np.zeros(2), speed=10.0)
    for _ in range(40):
        s = step_vehicle(s, (0.0, -1.0), 0.1)
    assert s.speed == 0.0


def test_no_reverse_without_flag():
    s = VehicleState(position=np.zeros(2), speed=0.0)
    s = step_vehicle(s, (0.0, -1.0), 0.1)
    assert s.speed == 0.0


def test_reverse_when_allowed_capped():
    s = VehicleState(position=np.zeros(2), speed=0.0, reverse_allowed=True)
    for _ in range(20):
        s = step_vehicle(s, (0.0, -1.0), 0.1)
    assert s.speed == -SPEC.max_reverse_speed
    assert s.position[0] < 0.0


def test_pedal_zero_speed_never_increases():
    s = VehicleState(position=np.zeros(2), speed=12.0)
    speeds = []
    for _ in range(50):
        s = step_vehicle(s, (0.3, 0.0), 0.1)
        speeds.append(s.speed)
    assert np.all(np.diff([12.0] + speeds) <= 0.0)


def test_steer_rate_limit():
    s = VehicleState(position=np.zeros(2), speed=5.0)
    s = step_vehicle(s, (1.0, 0.0), 0.1)
    assert_allclose(s.steer_angle, SPEC.steer_rate * 0.1, rtol=1e-12)
    for _ in range(5):
        s = step_vehicle(s, (1.0, 0.0), 0.1)
    assert s.steer_angle == SPEC.max_steer_angle


def test_out_of_range_input_clamped():
    a = step_vehicle(VehicleState(position=np.zeros(2), speed=5.0), (9.0, 7.0), 0.1)
    b = step_vehicle(VehicleState(position=np.zeros(2), speed=5.0), (1.0, 1.0), 0.1)
    assert np.array_equal(a.position, b.position)
    assert a.speed == b.speed and a.steer_angle == b.steer_angle


def test_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_vehicle(VehicleState.at(0, 0), (0.0, 0.0), 0.0)


def test_wrap_angle():
    assert_allclose(wrap_angle(np.pi + 0.1), -np.pi + 0.1, atol=1e-12)
    assert wrap_angle(np.pi) == np.pi
    assert wrap_angle(-np.pi) == np.pi
    assert wrap_angle(0.2) == 0.2


def test_footprint_corners_axis_aligned():
    s = VehicleState.at(1.0, 2.0, yaw=0.0)
    corners = footprint_corners(s)
    want = np.array([[3.25, 2.93], [-1.25, 2.93], [-1.25, 1.07], [3.25, 1.07]])
    assert_allclose(corners, want, atol=1e-12)


def test_circular_arc_geometry():
    # constant steer and speed trace a circle of radius wheelbase/tan(steer)
    delta = 0.25
    v = 8.0
    s = VehicleState(position=np.zeros(2), yaw=0.0, speed=v, steer_angle=delta)
    ci = (delta / SPEC.max_steer_angle, 0.0)
    radius = SPEC.wheelbase / np.tan(delta)
    center = np.array([0.0, radius])
    for _ in range(200):
        s = step_vehicle(s, ci, 0.01)
        assert_allclose(np.hypot(*(s.position - center)), radius, rtol=1e-4)

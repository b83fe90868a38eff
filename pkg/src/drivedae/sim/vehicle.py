"""Kinematic bicycle model with steering-rate and pedal limits.

Control input is physical: steer and pedal both in [-1, 1]. Steer scales
the front-wheel angle, pedal >= 0 accelerates and pedal < 0 brakes (or
reverses, but only while the reverse flag is set after a frontal crash).
"""

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class VehicleSpec:
    width: float = 1.86
    length: float = 4.5
    wheelbase: float = 2.8
    max_speed: float = 30.0
    max_steer_angle: float = 0.55
    accel_limit: float = 3.0
    brake_limit: float = 6.0
    steer_rate: float = 1.1
    max_reverse_speed: float = 3.0

    def __post_init__(self):
        for name in ("width", "length", "wheelbase", "max_speed", "max_steer_angle",
                     "accel_limit", "brake_limit", "steer_rate", "max_reverse_speed"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class VehicleState:
    position: np.ndarray
    yaw: float = 0.0
    speed: float = 0.0
    steer_angle: float = 0.0
    station: float = 0.0
    reverse_allowed: bool = False

    @classmethod
    def at(cls, x: float, y: float, yaw: float = 0.0) -> "VehicleState":
        return cls(position=np.array([x, y], dtype=np.float64), yaw=yaw)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]. In-range values pass through untouched."""
    if -np.pi < a <= np.pi:
        return float(a)
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    return np.pi if w == -np.pi else float(w)


def step_vehicle(state: VehicleState, ci, dt: float, spec: VehicleSpec = VehicleSpec()) -> VehicleState:
    """Advance one time step. ci = (steer, pedal), both clamped to [-1, 1]."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    steer_cmd = float(np.clip(ci[0], -1.0, 1.0))
    pedal = float(np.clip(ci[1], -1.0, 1.0))

    target = steer_cmd * spec.max_steer_angle
    max_delta = spec.steer_rate * dt
    steer = state.steer_angle + float(np.clip(target - state.steer_angle, -max_delta, max_delta))

    accel = pedal * (spec.accel_limit if pedal >= 0.0 else spec.brake_limit)
    lo = -spec.max_reverse_speed if state.reverse_allowed else 0.0
    speed = float(np.clip(state.speed + accel * dt, lo, spec.max_speed))

    yaw_rate = speed * np.tan(steer) / spec.wheelbase
    mid_yaw = state.yaw + 0.5 * yaw_rate * dt
    pos = state.position + speed * dt * np.array([np.cos(mid_yaw), np.sin(mid_yaw)])
    yaw = wrap_angle(state.yaw + yaw_rate * dt)
    return replace(state, position=pos, yaw=yaw, speed=speed, steer_angle=steer)


def footprint_corners(state: VehicleState, spec: VehicleSpec = VehicleSpec()) -> np.ndarray:
    """Oriented rectangle corners (4, 2), counterclockwise from front-left."""
    hl, hw = spec.length / 2.0, spec.width / 2.0
    c, s = np.cos(state.yaw), np.sin(state.yaw)
    R = np.array([[c, -s], [s, c]])
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    return state.position + local @ R.T

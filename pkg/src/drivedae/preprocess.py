"""Raw signals to the normalized 186-entry model input.

Layout: control (2) ++ state (4) ++ distance vector (180). The distance
vector covers the front half plane only; its index runs 0 = full right,
90 = dead ahead, 179 = full left.
"""

import numpy as np

from .sim.lidar import OBSTACLE_MIN_HEIGHT, LidarScan

INPUT_DIM = 186
CI_SLICE = slice(0, 2)
STATE_SLICE = slice(2, 6)
DIST_SLICE = slice(6, 186)
DIST_LEN = 180
MAX_DISTANCE = 50.0
MAX_SPEED = 30.0

# scan azimuth bins (vehicle frame, CCW from forward) for distance entries
# 0..179: right beam (270) around to just shy of the left beam (89)
_FRONT_AZIMUTHS = np.concatenate([np.arange(270, 360), np.arange(0, 90)])


def normalize_ci(steer: float, pedal: float) -> np.ndarray:
    """Physical [-1, 1] control to a [0, 1] pair."""
    raw = np.clip(np.array([steer, pedal], dtype=np.float64), -1.0, 1.0)
    return (raw + 1.0) / 2.0


def denormalize_ci(c) -> np.ndarray:
    """Inverse of normalize_ci back onto [-1, 1]."""
    return 2.0 * np.asarray(c, dtype=np.float64) - 1.0


def normalize_state(speed: float, yaw: float, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    """Speed scaled by 30 m/s, angles mapped by (a + pi) / 2 pi."""
    s = np.clip(speed, 0.0, MAX_SPEED) / MAX_SPEED
    angles = (np.array([yaw, pitch, roll], dtype=np.float64) + np.pi) / (2.0 * np.pi)
    return np.concatenate([[s], angles])


def downsample_channels(scan: LidarScan) -> LidarScan:
    """64-channel scan to 16 channels, keeping every 4th."""
    if scan.channels != 64:
        raise ValueError(f"expected a 64-channel scan, got {scan.channels}")
    return LidarScan(
        ranges=scan.ranges[::4].copy(),
        heights=scan.heights[::4].copy(),
        elevations=scan.elevations[::4].copy(),
        max_range=scan.max_range,
    )


def pointcloud_to_distance_vector(scan: LidarScan) -> np.ndarray:
    """Nearest obstacle distance per front-half degree, clamped and scaled.

    A return counts as an obstacle when its hit height is at least 0.3 m
    above the ground plane. Distances are horizontal, clamped to 50 m and
    divided by 50; bins without an obstacle return read 1.0.
    """
    if scan.channels != 16:
        raise ValueError(f"expected a 16-channel scan, got {scan.channels}")
    horiz = scan.ranges * np.cos(scan.elevations)[:, None]
    obstacle = (scan.heights >= OBSTACLE_MIN_HEIGHT) & (scan.ranges < scan.max_range)
    horiz = np.where(obstacle, horiz, np.inf)
    nearest = horiz.min(axis=0)
    return np.clip(nearest[_FRONT_AZIMUTHS], 0.0, MAX_DISTANCE) / MAX_DISTANCE


def assemble_input(c, s, d) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if c.shape != (2,):
        raise ValueError(f"control must have 2 entries, got {c.shape}")
    if s.shape != (4,):
        raise ValueError(f"state must have 4 entries, got {s.shape}")
    if d.shape != (DIST_LEN,):
        raise ValueError(f"distance vector must have {DIST_LEN} entries, got {d.shape}")
    return np.concatenate([c, s, d])


def build_model_input(steer: float, pedal: float, speed: float, yaw: float,
                      scan: LidarScan, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    """Full pipeline from raw signals and a 64- or 16-channel scan."""
    if scan.channels == 64:
        scan = downsample_channels(scan)
    return assemble_input(
        normalize_ci(steer, pedal),
        normalize_state(speed, yaw, pitch, roll),
        pointcloud_to_distance_vector(scan),
    )

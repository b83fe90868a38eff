"""Virtual multi-channel LiDAR over the 2D canyon.

Rays sweep 360 one-degree azimuth bins per channel; channel elevations run
from +2.0 degrees down in 0.4 degree steps, so channel 5 is exactly
horizontal. The 16-channel variant keeps every 4th channel and is
bin-identical to downsampling a 64-channel scan.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .terrain import OBSTACLE_HEIGHT, WALL_HEIGHT, TerrainSpec
from .vehicle import VehicleState

N_AZIMUTH = 360
SENSOR_HEIGHT = 1.8
MAX_RANGE = 60.0
TOP_ELEVATION_DEG = 2.0
ELEVATION_STEP_DEG = 0.4
FULL_CHANNELS = 64
OBSTACLE_MIN_HEIGHT = 0.3


def channel_elevations(channels: int) -> np.ndarray:
    """Elevation angles in radians for the requested channel count."""
    if channels not in (FULL_CHANNELS, FULL_CHANNELS // 4):
        raise ValueError("channels must be 64 or 16")
    stride = 1 if channels == FULL_CHANNELS else 4
    idx = np.arange(0, FULL_CHANNELS, stride)
    return np.deg2rad(TOP_ELEVATION_DEG - ELEVATION_STEP_DEG * idx)


@dataclass(frozen=True)
class LidarScan:
    """ranges: slant distances (C, 360), misses = max_range; heights: hit
    z (C, 360), ground and misses = 0; elevations: radians (C,)."""

    ranges: np.ndarray
    heights: np.ndarray
    elevations: np.ndarray
    max_range: float

    @property
    def channels(self) -> int:
        return self.ranges.shape[0]

    def horizontal_ranges(self) -> np.ndarray:
        return self.ranges * np.cos(self.elevations)[:, None]


def cast_lidar(state: VehicleState, terrain: TerrainSpec, channels: int = FULL_CHANNELS,
               max_range: float = MAX_RANGE) -> LidarScan:
    elev = channel_elevations(channels)
    frame = terrain.frame
    station, _ = frame.nearest_station(state.position)
    segs = np.ascontiguousarray(frame.walls_near(station, max_range))
    circles = np.ascontiguousarray(frame.obstacles_near(station, max_range))
    ranges, heights = kernels.sweep_rays(
        float(state.position[0]),
        float(state.position[1]),
        float(state.yaw),
        SENSOR_HEIGHT,
        np.ascontiguousarray(np.tan(elev)),
        np.ascontiguousarray(np.cos(elev)),
        N_AZIMUTH,
        segs,
        circles,
        WALL_HEIGHT,
        OBSTACLE_HEIGHT,
        max_range,
    )
    return LidarScan(ranges=ranges, heights=heights, elevations=elev, max_range=max_range)


def lidar_offset_estimate(scan: LidarScan) -> float:
    """Lateral offset estimated from the scan alone: half the difference
    between right and left clearance at the +-90 degree beams, using
    returns at least OBSTACLE_MIN_HEIGHT above ground."""
    left = _side_clearance(scan, 90)
    right = _side_clearance(scan, 270)
    return (right - left) / 2.0


def _side_clearance(scan: LidarScan, azimuth_bin: int) -> float:
    slant = scan.ranges[:, azimuth_bin]
    height = scan.heights[:, azimuth_bin]
    horiz = slant * np.cos(scan.elevations)
    valid = (height >= OBSTACLE_MIN_HEIGHT) & (slant < scan.max_range)
    if not np.any(valid):
        return scan.max_range
    return float(horiz[valid].min())

"""Procedural canyon terrain.

A terrain is a polyline centerline with a per-point corridor half-width and
a list of circular obstacles hugging the walls. Generation keeps the
heading within about 60 degrees of the +x axis, which makes the centerline
x-monotone: nearest-station queries are unambiguous and walls cannot fold
back onto themselves.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

STEP_M = 2.0
HEADING_LIMIT = 1.05
WALL_HEIGHT = 4.0
OBSTACLE_HEIGHT = 2.0
TERRAIN_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class TerrainSpec:
    """Canyon geometry. Arrays: centerline (N,2), half_width (N,),
    obstacles (O,3) as cx, cy, radius."""

    seed: int
    centerline: np.ndarray
    half_width: np.ndarray
    obstacles: np.ndarray
    total_length: float

    @cached_property
    def frame(self) -> "TerrainFrame":
        return TerrainFrame(self)


class TerrainFrame:
    """Derived geometry for fast queries, built once per spec."""

    def __init__(self, spec: TerrainSpec):
        self.spec = spec
        pts = spec.centerline
        diffs = np.diff(pts, axis=0)
        seg_len = np.hypot(diffs[:, 0], diffs[:, 1])
        self.stations = np.concatenate([[0.0], np.cumsum(seg_len)])
        self.seg_len = seg_len
        self.tangents = diffs / seg_len[:, None]
        # left normal of each segment
        self.normals = np.stack([-self.tangents[:, 1], self.tangents[:, 0]], axis=1)
        pn = np.empty_like(pts)
        pn[:-1] = self.normals
        pn[-1] = self.normals[-1]
        self.point_normals = pn
        self.left_wall = pts + pn * spec.half_width[:, None]
        self.right_wall = pts - pn * spec.half_width[:, None]
        self.wall_segments = np.concatenate(
            [_polyline_segments(self.left_wall), _polyline_segments(self.right_wall)]
        )
        # station of each wall segment start, for distance culling
        self.wall_segment_station = np.concatenate([self.stations[:-1]] * 2)
        if spec.obstacles.size:
            self.obstacle_station = np.array(
                [self.nearest_station(c)[0] for c in spec.obstacles[:, :2]]
            )
        else:
            self.obstacle_station = np.empty(0)

    def nearest_station(self, point) -> tuple[float, float]:
        """Project a point onto the centerline.

        Returns (station, signed lateral offset), offset positive to the
        left of the travel direction.
        """
        p = np.asarray(point, dtype=np.float64)
        a = self.spec.centerline[:-1]
        d = self.spec.centerline[1:] - a
        t = np.einsum("ij,ij->i", p - a, d) / (self.seg_len ** 2)
        t = np.clip(t, 0.0, 1.0)
        proj = a + t[:, None] * d
        dist2 = np.sum((proj - p) ** 2, axis=1)
        i = int(np.argmin(dist2))
        station = self.stations[i] + t[i] * self.seg_len[i]
        rel = p - proj[i]
        offset = self.normals[i] @ rel
        return float(station), float(offset)

    def point_at(self, station: float) -> np.ndarray:
        i, t = self._locate(station)
        return self.spec.centerline[i] + t * (self.spec.centerline[i + 1] - self.spec.centerline[i])

    def heading_at(self, station: float) -> float:
        i, _ = self._locate(station)
        tx, ty = self.tangents[i]
        return float(np.arctan2(ty, tx))

    def half_width_at(self, station: float) -> float:
        i, t = self._locate(station)
        hw = self.spec.half_width
        return float(hw[i] + t * (hw[i + 1] - hw[i]))

    def _locate(self, station: float) -> tuple[int, float]:
        s = float(np.clip(station, 0.0, self.stations[-1]))
        i = int(np.searchsorted(self.stations, s, side="right") - 1)
        i = min(max(i, 0), len(self.seg_len) - 1)
        t = (s - self.stations[i]) / self.seg_len[i]
        return i, float(min(max(t, 0.0), 1.0))

    def walls_near(self, station: float, reach: float) -> np.ndarray:
        """Wall segments within a station window. The heading limit keeps
        dx/ds above cos(HEADING_LIMIT), so euclidean reach r maps to a
        station window r / cos(HEADING_LIMIT) plus one segment of slack."""
        window = reach / np.cos(HEADING_LIMIT) + STEP_M * 2
        mask = np.abs(self.wall_segment_station - station) <= window
        return self.wall_segments[mask]

    def obstacles_near(self, station: float, reach: float) -> np.ndarray:
        if not self.spec.obstacles.size:
            return np.empty((0, 3))
        window = reach / np.cos(HEADING_LIMIT) + STEP_M * 2
        mask = np.abs(self.obstacle_station - station) <= window
        return self.spec.obstacles[mask]


def _polyline_segments(points: np.ndarray) -> np.ndarray:
    return np.concatenate([points[:-1], points[1:]], axis=1)


def _plan_segments(rng, length_m: float):
    """Segment plan as (kind, param, seg_length) tuples; kind 0 straight,
    kind 1 arc with signed radius. Every 800 m block opens with a long
    straight and a tight arc so the required features are always present."""
    plan = []
    planned = 0.0
    while planned < length_m:
        block_end = planned + 800.0
        straight = rng.uniform(110.0, 170.0)
        plan.append((0, 0.0, straight))
        planned += straight
        radius = rng.uniform(26.0, 38.0) * (1.0 if rng.random() < 0.5 else -1.0)
        angle = rng.uniform(0.6, 1.2)
        plan.append((1, radius, abs(radius) * angle))
        planned += abs(radius) * angle
        while planned < min(block_end, length_m):
            if rng.random() < 0.45:
                seg = rng.uniform(40.0, 120.0)
                plan.append((0, 0.0, seg))
            else:
                radius = rng.uniform(45.0, 160.0) * (1.0 if rng.random() < 0.5 else -1.0)
                angle = rng.uniform(0.3, 0.9)
                seg = abs(radius) * angle
                plan.append((1, radius, seg))
            planned += seg
    return plan


def _trace_centerline(plan, length_m: float) -> np.ndarray:
    n_steps = int(round(length_m / STEP_M))
    pts = np.empty((n_steps + 1, 2))
    pts[0] = (0.0, 0.0)
    heading = 0.0
    seg_iter = iter(plan)
    kind, radius, remaining = next(seg_iter)
    for i in range(n_steps):
        if remaining <= 0.0:
            kind, radius, remaining = next(seg_iter, (0, 0.0, np.inf))
        if kind == 1:
            dtheta = STEP_M / radius
            if abs(heading + dtheta) > HEADING_LIMIT:
                radius = -radius  # bend away from the limit
                dtheta = -dtheta
            heading += dtheta
        pts[i + 1] = pts[i] + STEP_M * np.array([np.cos(heading), np.sin(heading)])
        remaining -= STEP_M
    return pts


def _half_width_profile(rng, stations: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Smooth width profile strictly inside [lo, hi]/2: a normalized mix of
    two long-wavelength sinusoids, amplitude held 5% short of the bounds."""
    mid = (lo + hi) / 4.0
    amp = 0.95 * (hi - lo) / 4.0
    w1, w2 = rng.uniform(0.5, 1.0, size=2)
    l1, l2 = rng.uniform(150.0, 400.0, size=2)
    p1, p2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
    mix = w1 * np.sin(2.0 * np.pi * stations / l1 + p1) + w2 * np.sin(2.0 * np.pi * stations / l2 + p2)
    return mid + amp * mix / (w1 + w2)


MIN_CLEAR_CHANNEL = 3.2


def _place_obstacles(rng, pts, stations, half_width, tangents) -> np.ndarray:
    rows = []
    s = 80.0
    end = stations[-1] - 40.0
    while s < end:
        i = int(np.searchsorted(stations, s)) - 1
        i = min(max(i, 0), len(tangents) - 1)
        normal = np.array([-tangents[i, 1], tangents[i, 0]])
        side = 1.0 if rng.random() < 0.5 else -1.0
        radius = rng.uniform(0.6, 1.3)
        gap = rng.uniform(0.3, 0.8)
        # never intrude past the clear-channel guarantee
        max_intrusion = 2.0 * half_width[i] - MIN_CLEAR_CHANNEL
        if gap + 2.0 * radius > max_intrusion:
            radius = max((max_intrusion - gap) / 2.0, 0.0)
        if radius >= 0.3:
            center = pts[i] + side * (half_width[i] - gap - radius) * normal
            rows.append((center[0], center[1], radius))
        s += rng.uniform(25.0, 60.0)
    return np.array(rows) if rows else np.empty((0, 3))


def generate_terrain(seed: int, length_m: float = 1600.0, width_range=(9.0, 15.0)) -> TerrainSpec:
    """Build a canyon of roughly the requested length.

    The corridor width stays within width_range; obstacles hug one wall and
    always leave well over a 3 m clear channel on the other side.
    """
    if length_m <= 100.0:
        raise ValueError("length_m must exceed 100 m")
    lo, hi = width_range
    if lo >= hi:
        raise ValueError("width_range must satisfy min < max")
    if lo < 1.86 + 1.0:
        raise ValueError("corridor narrower than vehicle width + 1 m")

    rng = np.random.default_rng(seed)
    plan = _plan_segments(rng, length_m)
    pts = _trace_centerline(plan, length_m)
    diffs = np.diff(pts, axis=0)
    seg_len = np.hypot(diffs[:, 0], diffs[:, 1])
    stations = np.concatenate([[0.0], np.cumsum(seg_len)])
    half_width = _half_width_profile(rng, stations, lo, hi)
    tangents = diffs / seg_len[:, None]
    obstacles = _place_obstacles(rng, pts, stations, half_width, tangents)
    return TerrainSpec(
        seed=int(seed),
        centerline=pts,
        half_width=half_width,
        obstacles=obstacles,
        total_length=float(stations[-1]),
    )


def terrain_to_dict(spec: TerrainSpec) -> dict:
    return {
        "version": TERRAIN_FORMAT_VERSION,
        "seed": spec.seed,
        "total_length": spec.total_length,
        "centerline": spec.centerline.tolist(),
        "half_width": spec.half_width.tolist(),
        "obstacles": spec.obstacles.tolist(),
    }


def terrain_from_dict(d: dict) -> TerrainSpec:
    if d.get("version") != TERRAIN_FORMAT_VERSION:
        raise ValueError(f"unsupported terrain format version {d.get('version')!r}")
    obstacles = np.array(d["obstacles"], dtype=np.float64)
    if obstacles.size == 0:
        obstacles = np.empty((0, 3))
    return TerrainSpec(
        seed=int(d["seed"]),
        centerline=np.array(d["centerline"], dtype=np.float64),
        half_width=np.array(d["half_width"], dtype=np.float64),
        obstacles=obstacles,
        total_length=float(d["total_length"]),
    )


def save_terrain(spec: TerrainSpec, path) -> None:
    with open(path, "w") as f:
        json.dump(terrain_to_dict(spec), f)


def load_terrain(path) -> TerrainSpec:
    with open(path) as f:
        return terrain_from_dict(json.load(f))

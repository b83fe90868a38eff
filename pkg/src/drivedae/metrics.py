"""Driving-quality metrics computed from closed-loop logs.

All metrics use the physical-unit series recorded at 10 Hz: lateral
offset in meters (ground-truth centerline distance, with a LiDAR-derived
variant logged alongside), speed in m/s, steering in command units.
Standard deviations use the sample (n-1) convention.
"""

from dataclasses import dataclass, field

import numpy as np

TICK_SECONDS = 0.1


class MetricError(Exception):
    pass


@dataclass
class DriveLog:
    """One closed-loop run. Arrays all share length T (one row per tick)."""

    terrain_seed: int
    assist: bool
    ticks: np.ndarray         # (T,) contiguous tick numbers
    raw_ci: np.ndarray        # (T, 2) physical
    assisted_ci: np.ndarray   # (T, 2)
    applied_ci: np.ndarray    # (T, 2)
    position: np.ndarray      # (T, 2) meters
    yaw: np.ndarray           # (T,)
    speed: np.ndarray         # (T,)
    station: np.ndarray       # (T,)
    offset: np.ndarray        # (T,) signed meters from the centerline
    offset_lidar: np.ndarray  # (T,) LiDAR-estimated variant
    events: list = field(default_factory=list)
    distance: float = 0.0     # odometer meters
    finished: bool = True     # reached the terrain end

    def __post_init__(self):
        T = len(self.ticks)
        for name in ("raw_ci", "assisted_ci", "applied_ci", "position", "yaw",
                     "speed", "station", "offset", "offset_lidar"):
            if len(getattr(self, name)) != T:
                raise ValueError(f"{name} length differs from ticks")
        if T and not np.array_equal(np.diff(self.ticks), np.ones(T - 1, dtype=int)):
            raise ValueError("ticks must be contiguous")

    def __len__(self):
        return len(self.ticks)


@dataclass(frozen=True)
class MetricsReport:
    sdlp: float            # meters
    sdlp_lidar: float      # meters
    sm: float              # m/s
    tct: float | None      # seconds; None on DNF
    zero: float            # sign changes per meter
    crashes: tuple         # (frontal, side, total)

    def __post_init__(self):
        total = self.crashes[0] + self.crashes[1]
        if self.crashes[2] != total:
            raise ValueError("crash total must equal frontal + side")
        for v in (self.sdlp, self.sdlp_lidar, self.sm, self.zero):
            if v < 0:
                raise ValueError("metrics must be >= 0")


def _sample_sd(series: np.ndarray, what: str) -> float:
    if len(series) < 2:
        raise MetricError(f"{what} needs at least 2 records")
    return float(np.std(series, ddof=1))


def sdlp(log: DriveLog, variant: str = "true") -> float:
    """Standard deviation of lateral position, meters."""
    if variant == "true":
        return _sample_sd(log.offset, "sdlp")
    if variant == "lidar":
        return _sample_sd(log.offset_lidar, "sdlp")
    raise ValueError(f"unknown sdlp variant {variant!r}")


def speed_maintenance(log: DriveLog) -> float:
    """Standard deviation of speed, m/s."""
    return _sample_sd(log.speed, "speed_maintenance")


def tct(log: DriveLog) -> float:
    """Task completion time, seconds."""
    if not log.finished:
        raise MetricError(f"run on seed {log.terrain_seed} did not finish")
    if len(log) == 0:
        raise MetricError("empty log")
    return float(log.ticks[-1] - log.ticks[0]) * TICK_SECONDS


def zero_crossings(log: DriveLog) -> float:
    """Steering sign changes per meter driven; zero samples inherit the
    previous sign."""
    if log.distance <= 0:
        raise MetricError("distance driven must be positive")
    count = 0
    prev = 0
    for v in log.applied_ci[:, 0]:
        s = int(np.sign(v)) or prev
        if prev != 0 and s != prev:
            count += 1
        prev = s
    return count / log.distance


def count_crashes(log: DriveLog) -> tuple:
    frontal = sum(1 for e in log.events if e.classification == "frontal")
    side = sum(1 for e in log.events if e.classification == "side")
    return frontal, side


def metrics_report(log: DriveLog) -> MetricsReport:
    frontal, side = count_crashes(log)
    try:
        tct_s = tct(log)
    except MetricError:
        tct_s = None
    return MetricsReport(
        sdlp=sdlp(log),
        sdlp_lidar=sdlp(log, variant="lidar"),
        sm=speed_maintenance(log),
        tct=tct_s,
        zero=zero_crossings(log),
        crashes=(frontal, side, frontal + side),
    )

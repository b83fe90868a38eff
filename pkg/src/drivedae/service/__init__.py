from .blending import ASSIST_WEIGHT, RAW_WEIGHT, blend, interpolate
from .session import (
    STAGES,
    TICK_MS,
    DriveSession,
    LatencyAccumulator,
    LatencyStats,
    SessionTick,
)

__all__ = [
    "ASSIST_WEIGHT",
    "RAW_WEIGHT",
    "blend",
    "interpolate",
    "STAGES",
    "TICK_MS",
    "DriveSession",
    "LatencyAccumulator",
    "LatencyStats",
    "SessionTick",
]

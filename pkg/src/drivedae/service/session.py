"""Tick-synchronous assistance session.

One session owns a world and a rolling window of the k most recent
normalized input rows. Each tick: sense, preprocess, denoise the
driver's control (once the window is full), blend 80/20, and apply to
the vehicle. Assisted commands ramp linearly from the previous applied
control across the 100 ms tick so the platform never sees a step change;
unassisted play applies commands directly, matching how training data is
recorded. History rows carry the control the vehicle actually received;
only the current row carries the driver's raw control, mirroring how
training corrupts only the final step of a window.
"""

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..model import ParamVector
from ..model.network import forward_window
from ..preprocess import (
    assemble_input,
    denormalize_ci,
    normalize_ci,
    normalize_state,
    pointcloud_to_distance_vector,
)
from ..sim import TerrainSpec, VehicleSpec, World, cast_lidar, lidar_offset_estimate
from .blending import blend

TICK_MS = 100.0
STAGES = ("receive", "preprocess", "inference", "blend", "send")


@dataclass(frozen=True)
class SessionTick:
    tick: int
    raw_ci: np.ndarray       # physical [-1, 1]
    assisted_ci: np.ndarray  # physical; equals raw during warm-up / assist off
    applied_ci: np.ndarray   # physical
    state: "object"          # VehicleState after the step
    offset_true: float
    offset_lidar: float
    contacts: list
    event: "object"          # debounced ContactEvent or None
    stage_ms: dict


@dataclass
class LatencyStats:
    ticks: int
    stage_mean_ms: dict
    stage_max_ms: dict
    end_to_end_mean_ms: float
    end_to_end_max_ms: float
    missed_deadlines: int

    def as_dict(self) -> dict:
        return {
            "ticks": self.ticks,
            "stage_mean_ms": self.stage_mean_ms,
            "stage_max_ms": self.stage_max_ms,
            "end_to_end_mean_ms": self.end_to_end_mean_ms,
            "end_to_end_max_ms": self.end_to_end_max_ms,
            "missed_deadlines": self.missed_deadlines,
        }


class LatencyAccumulator:
    def __init__(self, deadline_ms: float = TICK_MS):
        self.deadline_ms = deadline_ms
        self._sums = {s: 0.0 for s in STAGES}
        self._maxes = {s: 0.0 for s in STAGES}
        self._total_sum = 0.0
        self._total_max = 0.0
        self.ticks = 0
        self.missed = 0

    def add(self, stage_ms: dict, end_to_end_ms: float | None = None) -> None:
        if end_to_end_ms is None:
            end_to_end_ms = sum(stage_ms.values())
        for s, v in stage_ms.items():
            self._sums[s] += v
            self._maxes[s] = max(self._maxes[s], v)
        self._total_sum += end_to_end_ms
        self._total_max = max(self._total_max, end_to_end_ms)
        self.ticks += 1
        if end_to_end_ms > self.deadline_ms:
            self.missed += 1

    def stats(self) -> LatencyStats:
        n = max(self.ticks, 1)
        return LatencyStats(
            ticks=self.ticks,
            stage_mean_ms={s: self._sums[s] / n for s in STAGES},
            stage_max_ms=dict(self._maxes),
            end_to_end_mean_ms=self._total_sum / n,
            end_to_end_max_ms=self._total_max,
            missed_deadlines=self.missed,
        )


class DriveSession:
    """Shared by the evaluation harness and the WebSocket server."""

    def __init__(self, terrain: TerrainSpec, params: ParamVector | None = None,
                 assist: bool = False, vehicle: VehicleSpec = VehicleSpec(),
                 start_station: float = 10.0):
        if assist and params is None:
            raise ValueError("assist requires model parameters")
        self.terrain = terrain
        self.params = params
        self.assist = assist
        self.world = World(terrain, vehicle, start_station=start_station)
        self.k = params.dims.k if params is not None else 10
        self._history = deque(maxlen=self.k - 1)
        self._prev_applied = None

    @property
    def state(self):
        return self.world.state

    @property
    def station(self) -> float:
        return self.world.state.station

    @property
    def events(self) -> list:
        return self.world.events

    def tick(self, raw_steer: float, raw_pedal: float) -> SessionTick:
        t0 = time.perf_counter()
        raw_phys = np.clip([raw_steer, raw_pedal], -1.0, 1.0)
        state = self.world.state
        scan = cast_lidar(state, self.terrain, channels=16)
        dvec = pointcloud_to_distance_vector(scan)
        raw_norm = normalize_ci(raw_phys[0], raw_phys[1])
        row = assemble_input(raw_norm, normalize_state(state.speed, state.yaw), dvec)
        t1 = time.perf_counter()

        warm = len(self._history) < self.k - 1
        if self.assist and not warm:
            window = np.empty((self.k, row.size))
            for i, past in enumerate(self._history):
                window[i] = past
            window[-1] = row
            _, chat = forward_window(window, self.params)
            t2 = time.perf_counter()
            applied_norm = blend(chat, raw_norm)
            t3 = time.perf_counter()
            assisted_phys = denormalize_ci(chat)
            applied_phys = denormalize_ci(applied_norm)
        else:
            # bypass: the raw command reaches the vehicle bit for bit
            t2 = t3 = t1
            applied_norm = raw_norm
            assisted_phys = raw_phys.copy()
            applied_phys = raw_phys.copy()

        ramp_from = self._prev_applied if self.assist else None
        result = self.world.step(applied_phys, ci_from=ramp_from)
        self._prev_applied = applied_phys

        row_applied = row.copy()
        row_applied[0:2] = applied_norm
        self._history.append(row_applied)

        return SessionTick(
            tick=result.tick,
            raw_ci=raw_phys,
            assisted_ci=assisted_phys,
            applied_ci=applied_phys,
            state=result.state,
            offset_true=self._offset_true(result.state),
            offset_lidar=lidar_offset_estimate(scan),
            contacts=result.contacts,
            event=result.event,
            stage_ms={
                "preprocess": (t1 - t0) * 1e3,
                "inference": (t2 - t1) * 1e3,
                "blend": (t3 - t2) * 1e3,
            },
        )

    def _offset_true(self, state) -> float:
        _, offset = self.terrain.frame.nearest_station(state.position)
        return float(offset)

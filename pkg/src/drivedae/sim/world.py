"""Fixed-tick world: substepped vehicle integration, contact response,
station tracking, and crash episode recording.

One tick is 100 ms split into 5 physics substeps. When a tick is given
both a previous and a target control, the substeps interpolate linearly
between them, which realizes smooth command application.
"""

from dataclasses import dataclass, replace

import numpy as np

from .contacts import FRONTAL, Contact, ContactEvent, ContactTracker, detect_contacts
from .terrain import TerrainSpec
from .vehicle import VehicleSpec, VehicleState, step_vehicle

TICK_SECONDS = 0.1
SUBSTEPS = 5
REVERSE_CLEAR_SPEED = 0.5


@dataclass(frozen=True)
class TickResult:
    tick: int
    state: VehicleState
    contacts: list
    event: ContactEvent | None


def start_state(terrain: TerrainSpec, station: float = 10.0) -> VehicleState:
    frame = terrain.frame
    pos = frame.point_at(station)
    return VehicleState(
        position=pos.copy(),
        yaw=frame.heading_at(station),
        speed=0.0,
        steer_angle=0.0,
        station=station,
    )


def lateral_offset(state: VehicleState, terrain: TerrainSpec) -> float:
    """Ground-truth signed distance from the centerline, positive left."""
    _, offset = terrain.frame.nearest_station(state.position)
    return offset


class World:
    """Steps one vehicle through one terrain. Deterministic: state, tick
    count, and crash record are fully determined by the input sequence."""

    def __init__(self, terrain: TerrainSpec, vehicle: VehicleSpec = VehicleSpec(),
                 dt: float = TICK_SECONDS, substeps: int = SUBSTEPS,
                 start_station: float = 10.0):
        self.terrain = terrain
        self.vehicle = vehicle
        self.dt = dt
        self.substeps = substeps
        self.state = start_state(terrain, start_station)
        self.tracker = ContactTracker()
        self.tick = 0
        self.odometer = 0.0

    @property
    def events(self) -> list:
        return self.tracker.events

    def step(self, ci, ci_from=None) -> TickResult:
        """Advance one tick. ci is the control at the end of the tick;
        when ci_from is given the substeps ramp linearly from it to ci."""
        target = np.asarray(ci, dtype=np.float64)
        start = target if ci_from is None else np.asarray(ci_from, dtype=np.float64)
        sub_dt = self.dt / self.substeps
        st = self.state
        for j in range(1, self.substeps + 1):
            frac = j / self.substeps
            ci_j = start + frac * (target - start)
            st = step_vehicle(st, ci_j, sub_dt, self.vehicle)
            self.odometer += abs(st.speed) * sub_dt

        if st.speed > REVERSE_CLEAR_SPEED and st.reverse_allowed:
            st = replace(st, reverse_allowed=False)

        contacts = detect_contacts(st, self.terrain, self.vehicle)
        if contacts:
            st = self._resolve_contacts(st, contacts)
        event = self.tracker.update(self.tick, contacts)

        station, _ = self.terrain.frame.nearest_station(st.position)
        st = replace(st, station=station)
        self.state = st
        result = TickResult(tick=self.tick, state=st, contacts=contacts, event=event)
        self.tick += 1
        return result

    def _resolve_contacts(self, st: VehicleState, contacts: list) -> VehicleState:
        deepest = max(contacts, key=lambda c: c.penetration)
        pos = st.position + deepest.normal * deepest.penetration
        if any(c.classification == FRONTAL for c in contacts):
            # a frontal hit stops the platform; it must back out
            return replace(st, position=pos, speed=0.0, reverse_allowed=True)
        return replace(st, position=pos, speed=st.speed * 0.5)

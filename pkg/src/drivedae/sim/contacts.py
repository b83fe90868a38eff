"""Vehicle-footprint collision detection and crash episode counting.

``detect_contacts`` is pure: footprint rectangle against nearby wall
segments and obstacle circles, one Contact per touching entity with the
deepest wall contact kept. ``ContactTracker`` turns per-tick contact sets
into debounced crash episodes: a new event needs at least 5 contact-free
ticks since the previous contact.
"""

from dataclasses import dataclass

import numpy as np

from .terrain import TerrainSpec
from .vehicle import VehicleSpec, VehicleState, wrap_angle

FRONTAL_MAX_ANGLE = np.deg2rad(45.0)
DEBOUNCE_TICKS = 5
FRONTAL = "frontal"
SIDE = "side"


@dataclass(frozen=True)
class Contact:
    point: np.ndarray
    normal: np.ndarray  # unit, from the surface toward the vehicle
    penetration: float
    kind: str  # "wall" | "obstacle"
    normal_angle_rel_heading: float
    classification: str  # "frontal" | "side"


@dataclass(frozen=True)
class ContactEvent:
    tick: int
    point: np.ndarray
    normal_angle_rel_heading: float
    classification: str
    kind: str


def _classify(normal: np.ndarray, yaw: float) -> tuple[float, str]:
    """Angle between heading and the into-surface direction (-normal).
    Small angle means driving straight at the surface: frontal."""
    into = np.arctan2(-normal[1], -normal[0])
    rel = wrap_angle(into - yaw)
    cls = FRONTAL if abs(rel) <= FRONTAL_MAX_ANGLE else SIDE
    return float(rel), cls


def _segment_rect_contact(seg, center, axis_f, axis_l, hl, hw):
    """Overlap of a wall segment with the oriented rectangle.

    Exact detection via Liang-Barsky clipping in the rectangle frame; the
    reported point and depth come from sampling the clipped span, which is
    plenty for push-out and deepest-contact selection."""
    a = np.array([seg[0], seg[1]]) - center
    b = np.array([seg[2], seg[3]]) - center
    af = np.array([a @ axis_f, a @ axis_l])
    bf = np.array([b @ axis_f, b @ axis_l])
    d = bf - af
    t0, t1 = 0.0, 1.0
    for p, q in ((-d[0], af[0] + hl), (d[0], hl - af[0]),
                 (-d[1], af[1] + hw), (d[1], hw - af[1])):
        if p == 0.0:
            if q < 0.0:
                return None, 0.0
        else:
            r = q / p
            if p < 0.0:
                t0 = max(t0, r)
            else:
                t1 = min(t1, r)
    if t0 > t1:
        return None, 0.0
    t = np.linspace(t0, t1, 9)
    pts = af[None, :] + t[:, None] * d[None, :]
    pen = np.minimum(hl - np.abs(pts[:, 0]), hw - np.abs(pts[:, 1]))
    i = int(np.argmax(pen))
    world = center + pts[i, 0] * axis_f + pts[i, 1] * axis_l
    return world, float(max(pen[i], 0.0))


def detect_contacts(state: VehicleState, terrain: TerrainSpec,
                    spec: VehicleSpec = VehicleSpec()) -> list[Contact]:
    frame = terrain.frame
    hl, hw = spec.length / 2.0, spec.width / 2.0
    center = state.position
    axis_f = np.array([np.cos(state.yaw), np.sin(state.yaw)])
    axis_l = np.array([-np.sin(state.yaw), np.cos(state.yaw)])
    reach = np.hypot(hl, hw) + 4.0
    station, _ = frame.nearest_station(center)

    contacts = []
    best_wall = None
    for seg in frame.walls_near(station, reach):
        # quick reject on endpoint distance
        mid = np.array([(seg[0] + seg[2]) / 2.0, (seg[1] + seg[3]) / 2.0])
        if np.hypot(*(mid - center)) > reach:
            continue
        point, pen = _segment_rect_contact(seg, center, axis_f, axis_l, hl, hw)
        if point is None:
            continue
        if best_wall is None or pen > best_wall[1]:
            d = np.array([seg[2] - seg[0], seg[3] - seg[1]])
            normal = np.array([-d[1], d[0]])
            normal /= np.hypot(*normal)
            if normal @ (center - point) < 0.0:
                normal = -normal
            best_wall = (point, pen, normal)
    if best_wall is not None:
        point, pen, normal = best_wall
        rel, cls = _classify(normal, state.yaw)
        contacts.append(Contact(point=point, normal=normal, penetration=pen,
                                kind="wall", normal_angle_rel_heading=rel, classification=cls))

    for cx, cy, radius in frame.obstacles_near(station, reach):
        c = np.array([cx, cy]) - center
        local = np.array([c @ axis_f, c @ axis_l])
        closest = np.clip(local, [-hl, -hw], [hl, hw])
        gap = np.hypot(*(local - closest))
        if gap > radius:
            continue
        world = center + closest[0] * axis_f + closest[1] * axis_l
        out = world - np.array([cx, cy])
        norm = np.hypot(*out)
        normal = out / norm if norm > 1e-12 else -axis_f
        rel, cls = _classify(normal, state.yaw)
        contacts.append(Contact(point=world, normal=normal, penetration=float(radius - gap),
                                kind="obstacle", normal_angle_rel_heading=rel, classification=cls))
    return contacts


class ContactTracker:
    """Debounces per-tick contacts into crash episodes."""

    def __init__(self):
        self.free_ticks = DEBOUNCE_TICKS
        self.events: list[ContactEvent] = []

    def update(self, tick: int, contacts: list[Contact]) -> ContactEvent | None:
        if not contacts:
            self.free_ticks += 1
            return None
        opened = None
        if self.free_ticks >= DEBOUNCE_TICKS:
            deepest = max(contacts, key=lambda c: c.penetration)
            opened = ContactEvent(
                tick=tick,
                point=deepest.point,
                normal_angle_rel_heading=deepest.normal_angle_rel_heading,
                classification=deepest.classification,
                kind=deepest.kind,
            )
            self.events.append(opened)
        self.free_ticks = 0
        return opened

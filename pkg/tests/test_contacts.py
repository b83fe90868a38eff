import numpy as np
from numpy.testing import assert_allclose

from drivedae.sim import ContactTracker, VehicleState, detect_contacts
from drivedae.sim.contacts import DEBOUNCE_TICKS, FRONTAL, SIDE

from worlds import straight_corridor


def test_centered_vehicle_no_contact():
    terrain = straight_corridor(half_width=4.5)
    assert detect_contacts(VehicleState.at(0.0, 0.0), terrain) == []


def test_head_on_wall_is_frontal():
    # corridor along +y: right wall at x = +10; facing +x drives into it
    terrain = straight_corridor(half_width=10.0, along="y")
    state = VehicleState.at(8.5, 0.0, yaw=0.0)
    contacts = detect_contacts(state, terrain)
    assert len(contacts) == 1
    c = contacts[0]
    assert c.kind == "wall"
    assert c.classification == FRONTAL
    assert_allclose(c.normal, [-1.0, 0.0], atol=1e-12)
    assert_allclose(c.penetration, 0.75, atol=1e-9)
    assert abs(c.normal_angle_rel_heading) < 1e-9
    # normal points from the surface back toward the vehicle
    assert c.normal @ (state.position - c.point) > 0.0


def test_shallow_scrape_is_side():
    terrain = straight_corridor(half_width=10.0, along="y")
    yaw = np.deg2rad(80.0)  # 10 degrees off the wall direction
    state = VehicleState.at(8.8, 0.0, yaw=yaw)
    contacts = detect_contacts(state, terrain)
    assert len(contacts) == 1
    assert contacts[0].classification == SIDE
    assert_allclose(abs(contacts[0].normal_angle_rel_heading), np.deg2rad(80.0), atol=1e-9)


def test_exactly_45_degrees_is_frontal():
    terrain = straight_corridor(half_width=10.0, along="y")
    state = VehicleState.at(9.0, 0.0, yaw=np.deg2rad(45.0))
    contacts = detect_contacts(state, terrain)
    assert len(contacts) == 1
    assert contacts[0].classification == FRONTAL


def test_obstacle_contact_frontal():
    terrain = straight_corridor(half_width=200.0, obstacles=[(3.0, 0.0, 1.0)])
    contacts = detect_contacts(VehicleState.at(0.0, 0.0), terrain)
    assert len(contacts) == 1
    c = contacts[0]
    assert c.kind == "obstacle"
    assert c.classification == FRONTAL
    assert_allclose(c.penetration, 0.25, atol=1e-12)
    assert_allclose(c.normal, [-1.0, 0.0], atol=1e-12)
    assert_allclose(c.point, [2.25, 0.0], atol=1e-12)


def test_obstacle_clear_when_outside():
    terrain = straight_corridor(half_width=200.0, obstacles=[(4.0, 0.0, 1.0)])
    assert detect_contacts(VehicleState.at(0.0, 0.0), terrain) == []


def test_tracker_debounce():
    terrain = straight_corridor(half_width=10.0, along="y")
    hit = detect_contacts(VehicleState.at(8.5, 0.0, yaw=0.0), terrain)
    tracker = ContactTracker()
    tick = 0
    assert tracker.update(tick, hit) is not None  # episode opens
    for _ in range(3):
        tick += 1
        assert tracker.update(tick, hit) is None  # same episode
    # four free ticks: not enough to close the episode
    for _ in range(DEBOUNCE_TICKS - 1):
        tick += 1
        tracker.update(tick, [])
    tick += 1
    assert tracker.update(tick, hit) is None
    # five free ticks: next contact opens a new episode
    for _ in range(DEBOUNCE_TICKS):
        tick += 1
        tracker.update(tick, [])
    tick += 1
    event = tracker.update(tick, hit)
    assert event is not None
    assert event.tick == tick
    assert len(tracker.events) == 2


def test_tracker_records_classification():
    terrain = straight_corridor(half_width=10.0, along="y")
    hit = detect_contacts(VehicleState.at(8.8, 0.0, yaw=np.deg2rad(80.0)), terrain)
    tracker = ContactTracker()
    event = tracker.update(0, hit)
    assert event.classification == SIDE
    assert event.kind == "wall"

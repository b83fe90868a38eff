"""Deterministic 2D canyon world: terrain, vehicle, LiDAR, contacts."""

from .contacts import Contact, ContactEvent, ContactTracker, detect_contacts
from .lidar import LidarScan, cast_lidar, lidar_offset_estimate
from .terrain import TerrainSpec, generate_terrain, load_terrain, save_terrain, terrain_from_dict, terrain_to_dict
from .vehicle import VehicleSpec, VehicleState, step_vehicle
from .world import TickResult, World, lateral_offset

__all__ = [
    "Contact",
    "ContactEvent",
    "ContactTracker",
    "LidarScan",
    "TerrainSpec",
    "TickResult",
    "VehicleSpec",
    "VehicleState",
    "World",
    "cast_lidar",
    "detect_contacts",
    "generate_terrain",
    "lateral_offset",
    "lidar_offset_estimate",
    "load_terrain",
    "save_terrain",
    "terrain_from_dict",
    "terrain_to_dict",
]

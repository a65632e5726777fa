"""Core domain types: poses, twists, scans, the clock, and the grid world."""

from .grid import NO_RETURN, OccupancyGrid, grid_raycast, raycast_bearings, raycast_rays
from .types import STOP, LaserScan, Pose, SimClock, Twist, normalize_angle

__all__ = [
    "NO_RETURN",
    "OccupancyGrid",
    "grid_raycast",
    "raycast_bearings",
    "raycast_rays",
    "STOP",
    "LaserScan",
    "Pose",
    "SimClock",
    "Twist",
    "normalize_angle",
]

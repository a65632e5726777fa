"""Simulated LiDAR on the occupancy grid."""

from __future__ import annotations

import math

import numpy as np

from ..core import LaserScan, OccupancyGrid, Pose, raycast_bearings

LIDAR_HZ = 5.0
CAMERA_HZ = 30.0


def scan_bearings(beam_count: int) -> np.ndarray:
    """Robot-relative beam bearings evenly covering the full circle."""
    inc = 2.0 * math.pi / beam_count
    return -math.pi + inc * np.arange(beam_count)


def simulate_scan(
    grid: OccupancyGrid,
    true_pose: Pose,
    beam_count: int = 360,
    range_max: float = 8.0,
    noise_sigma: float = 0.01,
    rng: np.random.Generator | None = None,
    timestamp: float = 0.0,
) -> LaserScan:
    """Raycast one full-circle scan; per-beam Gaussian range noise is optional.

    Noise is drawn for every beam (one rng draw per beam regardless of hits)
    and applied only to returning beams, clamped back into (0, range_max].
    """
    rel = scan_bearings(beam_count)
    world = true_pose.yaw + rel
    dists = raycast_bearings(grid, true_pose.x, true_pose.y, world, range_max)
    if noise_sigma > 0 and rng is not None:
        noise = rng.normal(0.0, noise_sigma, beam_count)
        finite = np.isfinite(dists)
        dists = dists.copy()
        dists[finite] = np.clip(dists[finite] + noise[finite], 1e-6, range_max)
    inc = 2.0 * math.pi / beam_count
    return LaserScan(
        angle_min=-math.pi,
        angle_max=-math.pi + (beam_count - 1) * inc,
        beam_count=beam_count,
        ranges=tuple(float(d) for d in dists),
        range_max=range_max,
        timestamp=timestamp,
    )

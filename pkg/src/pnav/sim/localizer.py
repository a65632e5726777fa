"""Particle-filter localizer over the occupancy grid.

Classic Monte Carlo localization: odometry-driven motion update with process
noise, beam-wise Gaussian likelihood of |simulated - observed| range over a
subset of beams, systematic resampling when the effective sample size decays,
and a weighted-mean estimate (circular mean for yaw).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import OccupancyGrid, Pose, raycast_rays
from ..locality import ParticleSet
from .sensors import scan_bearings


@dataclass
class Localizer:
    particles: ParticleSet
    sigma_trans: float = 0.005      # m per step, motion process noise
    sigma_rot: float = 0.005        # rad per step
    beams_used: int = 12
    sigma_hit: float = 0.2          # m, range likelihood width
    estimate: Pose = Pose(0.0, 0.0, 0.0)
    lost: bool = False              # set when all weights collapse to zero


def init_localizer(
    pose: Pose,
    count: int,
    spread: float,
    rng: np.random.Generator,
    yaw_spread: float = 0.2,
    **kwargs,
) -> Localizer:
    """Particles uniform in a box of half-width `spread` around the pose."""
    xs = pose.x + rng.uniform(-spread, spread, count)
    ys = pose.y + rng.uniform(-spread, spread, count)
    yaws = pose.yaw + rng.uniform(-yaw_spread, yaw_spread, count)
    ps = ParticleSet(xs, ys, yaws, np.full(count, 1.0 / count))
    loc = Localizer(particles=ps, **kwargs)
    loc.estimate = _mean_pose(ps)
    return loc


def _mean_pose(ps: ParticleSet) -> Pose:
    w = ps.weights
    x = float(np.sum(w * ps.xs))
    y = float(np.sum(w * ps.ys))
    yaw = math.atan2(float(np.sum(w * np.sin(ps.yaws))), float(np.sum(w * np.cos(ps.yaws))))
    return Pose(x, y, yaw)


def _systematic_resample(ps: ParticleSet, count: int, rng: np.random.Generator) -> ParticleSet:
    positions = (rng.random() + np.arange(count)) / count
    cumulative = np.cumsum(ps.weights)
    cumulative[-1] = 1.0
    idx = np.searchsorted(cumulative, positions)
    return ParticleSet(
        ps.xs[idx].copy(), ps.ys[idx].copy(), ps.yaws[idx].copy(), np.full(count, 1.0 / count)
    )


def resize(loc: Localizer, count: int, rng: np.random.Generator) -> Localizer:
    """Resample to a new particle count (coordinator may grow or shrink the set)."""
    if count == loc.particles.count:
        return loc
    ps = _systematic_resample(loc.particles, count, rng)
    return replace(loc, particles=ps, estimate=_mean_pose(ps))


def localizer_step(
    loc: Localizer,
    odom_delta: tuple[float, float],
    scan,
    grid: OccupancyGrid,
    rng: np.random.Generator,
) -> Localizer:
    """One predict / weight / resample cycle from an odometry delta and a scan."""
    ps = loc.particles
    n = ps.count
    d_trans, d_rot = odom_delta

    # motion update: translate along the mid-rotation heading
    trans = d_trans + rng.normal(0.0, loc.sigma_trans, n)
    rot = d_rot + rng.normal(0.0, loc.sigma_rot, n)
    mid = ps.yaws + 0.5 * rot
    xs = ps.xs + trans * np.cos(mid)
    ys = ps.ys + trans * np.sin(mid)
    yaws = ps.yaws + rot

    # measurement update over a beam subset
    step = max(1, scan.beam_count // loc.beams_used)
    beam_idx = np.arange(0, scan.beam_count, step)[: loc.beams_used]
    rel = scan_bearings(scan.beam_count)[beam_idx]
    observed = np.array([scan.ranges[i] for i in beam_idx])
    observed = np.minimum(observed, scan.range_max)  # no-return compares as max range

    cx = np.floor(xs / grid.resolution).astype(np.int64)
    cy = np.floor(ys / grid.resolution).astype(np.int64)
    inside = (cx >= 0) & (cx < grid.width) & (cy >= 0) & (cy < grid.height)
    valid = inside.copy()
    valid[inside] = ~grid.cells[cy[inside], cx[inside]]

    log_w = np.full(n, -np.inf)
    if np.any(valid):
        vx, vy, vyaw = xs[valid], ys[valid], yaws[valid]
        k = len(beam_idx)
        m = len(vx)
        flat = raycast_rays(
            grid,
            np.repeat(vx, k),
            np.repeat(vy, k),
            (vyaw[:, None] + rel[None, :]).ravel(),
            scan.range_max,
        )
        expected = np.minimum(flat.reshape(m, k), scan.range_max)
        diff = expected - observed[None, :]
        log_w[valid] = -np.sum(diff * diff, axis=1) / (2.0 * loc.sigma_hit**2)

    lost = False
    finite = np.isfinite(log_w)
    if not np.any(finite):
        weights = np.full(n, 1.0 / n)  # lost-robot fallback
        lost = True
    else:
        log_w -= log_w[finite].max()
        weights = np.exp(log_w)
        total = weights.sum()
        if total <= 0 or not np.isfinite(total):
            weights = np.full(n, 1.0 / n)
            lost = True
        else:
            weights /= total

    ps = ParticleSet(xs, ys, yaws, weights)
    ess = 1.0 / float(np.sum(ps.weights**2))
    if ess < n / 2.0:
        ps = _systematic_resample(ps, n, rng)
    return replace(loc, particles=ps, estimate=_mean_pose(ps), lost=lost)

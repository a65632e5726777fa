"""Local dynamic-window planner with a power term, plus the global grid planner.

The local planner samples velocity commands reachable within one control
period, rolls each along its constant-twist arc, scores heading / clearance /
speed / predicted motor power (each min-max normalized over the sample set),
and picks the best collision-free command. With the power weight at zero this
reduces to the classic three-criterion dynamic window objective.

The global planner is 8-connected Dijkstra over the occupancy grid; its only
consumer besides navigation is the plan-length progress monitor.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import LaserScan, OccupancyGrid, Pose, STOP, Twist, normalize_angle

_SQRT2 = math.sqrt(2.0)


class NoPathError(RuntimeError):
    """Raised when the goal cell cannot be reached from the start cell."""


@dataclass(frozen=True)
class PlannerWeights:
    """Objective weights: heading, clearance, velocity, and power."""

    alpha: float = 0.4
    beta: float = 0.3
    gamma: float = 0.2
    theta_p: float = 0.1

    def __post_init__(self) -> None:
        parts = (self.alpha, self.beta, self.gamma, self.theta_p)
        if any(p < 0 for p in parts):
            raise ValueError("weights must be non-negative")
        if sum(parts) <= 0:
            raise ValueError("at least one weight must be positive")

    def without_power(self) -> "PlannerWeights":
        return PlannerWeights(self.alpha, self.beta, self.gamma, 0.0)


@dataclass(frozen=True)
class PlannerLimits:
    """Velocity caps and acceleration limits of the drive."""

    vmax: float = 0.5       # m/s
    wmax: float = 1.0       # rad/s
    accel_v: float = 0.5    # m/s^2
    accel_w: float = 1.5    # rad/s^2

    def __post_init__(self) -> None:
        if min(self.vmax, self.wmax, self.accel_v, self.accel_w) <= 0:
            raise ValueError("limits must be positive")


@dataclass
class TrajectorySample:
    cmd: Twist
    heading_score: float
    dist_score: float
    vel_score: float
    power_score: float
    total: float
    predicted_motor_watts: float
    collision_free: bool


@dataclass(frozen=True)
class GlobalPlan:
    waypoints: tuple[tuple[float, float], ...]
    length: float

    def remaining_length(self, x: float, y: float) -> float:
        """Plan length still ahead of the nearest waypoint to (x, y)."""
        if len(self.waypoints) == 1:
            wx, wy = self.waypoints[0]
            return math.hypot(wx - x, wy - y)
        pts = np.asarray(self.waypoints)
        d2 = (pts[:, 0] - x) ** 2 + (pts[:, 1] - y) ** 2
        k = int(np.argmin(d2))
        ahead = float(np.sum(np.hypot(np.diff(pts[k:, 0]), np.diff(pts[k:, 1]))))
        return math.sqrt(float(d2[k])) + ahead


def plan_global(grid: OccupancyGrid, start: Pose, goal: tuple[float, float]) -> GlobalPlan:
    """Shortest 8-connected grid path by Dijkstra, diagonal cost sqrt(2)*res.

    Ties in the priority queue break on (smaller iy, then smaller ix) of the
    expanded cell, which makes the plan deterministic.
    """
    sx, sy = grid.world_to_cell(start.x, start.y)
    gx, gy = grid.world_to_cell(goal[0], goal[1])
    if grid.is_occupied_cell(sx, sy):
        raise ValueError(f"start cell ({sx}, {sy}) is occupied or out of bounds")
    if grid.is_occupied_cell(gx, gy):
        raise ValueError(f"goal cell ({gx}, {gy}) is occupied or out of bounds")

    res = grid.resolution
    moves = (
        (1, 0, res), (-1, 0, res), (0, 1, res), (0, -1, res),
        (1, 1, _SQRT2 * res), (1, -1, _SQRT2 * res),
        (-1, 1, _SQRT2 * res), (-1, -1, _SQRT2 * res),
    )
    dist: dict[tuple[int, int], float] = {(sx, sy): 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    done: set[tuple[int, int]] = set()
    heap: list[tuple[float, int, int]] = [(0.0, sy, sx)]
    while heap:
        d, iy, ix = heapq.heappop(heap)
        if (ix, iy) in done:
            continue
        done.add((ix, iy))
        if (ix, iy) == (gx, gy):
            break
        for dx, dy, cost in moves:
            nx, ny = ix + dx, iy + dy
            if grid.is_occupied_cell(nx, ny) or (nx, ny) in done:
                continue
            nd = d + cost
            if nd < dist.get((nx, ny), math.inf):
                dist[(nx, ny)] = nd
                parent[(nx, ny)] = (ix, iy)
                heapq.heappush(heap, (nd, ny, nx))
    if (gx, gy) not in done:
        raise NoPathError(f"no path from cell ({sx}, {sy}) to ({gx}, {gy})")

    cells = [(gx, gy)]
    while cells[-1] != (sx, sy):
        cells.append(parent[cells[-1]])
    cells.reverse()
    waypoints = tuple(grid.cell_center(ix, iy) for ix, iy in cells)
    return GlobalPlan(waypoints=waypoints, length=dist[(gx, gy)])


def _lattice(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([(lo + hi) / 2.0])
    return np.linspace(lo, hi, n)


def sample_window(
    current: Twist,
    limits: PlannerLimits,
    dt: float,
    counts: tuple[int, int] = (5, 11),
) -> list[Twist]:
    """Velocity commands reachable from `current` within one control period."""
    nv, nw = counts
    v_lo = max(0.0, current.v - limits.accel_v * dt)
    v_hi = min(limits.vmax, current.v + limits.accel_v * dt)
    w_lo = max(-limits.wmax, current.w - limits.accel_w * dt)
    w_hi = min(limits.wmax, current.w + limits.accel_w * dt)
    return [
        Twist(float(v), float(w))
        for v in _lattice(v_lo, v_hi, nv)
        for w in _lattice(w_lo, w_hi, nw)
    ]


def _arc_points(v: float, w: float, horizon: float, dt: float) -> np.ndarray:
    """Robot-relative points along the constant-twist arc at t = dt..horizon."""
    n = max(1, int(round(horizon / dt)))
    ts = dt * np.arange(1, n + 1)
    if abs(w) < 1e-12:
        return np.column_stack([v * ts, np.zeros_like(ts)])
    return np.column_stack([(v / w) * np.sin(w * ts), (v / w) * (1.0 - np.cos(w * ts))])


def _minmax(raw: np.ndarray) -> np.ndarray:
    lo, hi = float(raw.min()), float(raw.max())
    if hi - lo < 1e-12:
        return np.ones_like(raw)
    return (raw - lo) / (hi - lo)


def score_samples(
    samples: list[Twist],
    pose: Pose,
    goal: tuple[float, float],
    scan: LaserScan,
    model,
    weights: PlannerWeights,
    current: Twist = STOP,
    horizon: float = 2.0,
    dt: float = 0.1,
    safety_radius: float = 0.2,
    clearance_cap: float = 2.0,
) -> list[TrajectorySample]:
    """Roll out and score every candidate command.

    `model` is any motor-power predictor with a predict_batch((n, 4)) method;
    it is fed (candidate, current) windows so speed changes cost what the
    motors would actually draw. The power criterion scores cheaper commands
    higher.
    """
    if not samples:
        raise ValueError("no velocity samples to score")

    # obstacle points from the scan, robot-relative
    finite = [(r, scan.bearing(i)) for i, r in enumerate(scan.ranges) if not math.isinf(r)]
    if finite:
        obs = np.array([[r * math.cos(b), r * math.sin(b)] for r, b in finite])
    else:
        obs = None

    # direction to the goal is measured once from the current pose; each
    # candidate is judged by how well its predicted end yaw lines up with it.
    # (Judging from the per-candidate end position would punish faster
    # commands for merely getting closer to the goal, braking the robot.)
    goal_dir = math.atan2(goal[1] - pose.y, goal[0] - pose.x)

    heading_raw = np.empty(len(samples))
    clearance_raw = np.empty(len(samples))
    vel_raw = np.empty(len(samples))
    collision_free = np.empty(len(samples), dtype=bool)
    for i, cmd in enumerate(samples):
        pts = _arc_points(cmd.v, cmd.w, horizon, dt)
        end_yaw = pose.yaw + cmd.w * horizon
        heading_raw[i] = math.pi - abs(normalize_angle(goal_dir - end_yaw))
        if obs is None:
            clearance = clearance_cap
        else:
            d2 = (obs[None, :, 0] - pts[:, 0:1]) ** 2 + (obs[None, :, 1] - pts[:, 1:2]) ** 2
            clearance = min(clearance_cap, float(np.sqrt(d2.min())))
        clearance_raw[i] = clearance
        vel_raw[i] = cmd.v
        collision_free[i] = clearance >= safety_radius

    features = np.array([[c.v, c.w, current.v, current.w] for c in samples])
    power_raw = np.asarray(model.predict_batch(features), dtype=float)

    heading_s = _minmax(heading_raw)
    dist_s = _minmax(clearance_raw)
    vel_s = _minmax(vel_raw)
    power_s = 1.0 - _minmax(power_raw) if (power_raw.max() - power_raw.min()) >= 1e-12 else np.ones_like(power_raw)

    totals = (
        weights.alpha * heading_s
        + weights.beta * dist_s
        + weights.gamma * vel_s
        + weights.theta_p * power_s
    )
    return [
        TrajectorySample(
            cmd=samples[i],
            heading_score=float(heading_s[i]),
            dist_score=float(dist_s[i]),
            vel_score=float(vel_s[i]),
            power_score=float(power_s[i]),
            total=float(totals[i]),
            predicted_motor_watts=float(power_raw[i]),
            collision_free=bool(collision_free[i]),
        )
        for i in range(len(samples))
    ]


def select_command(scored: list[TrajectorySample]) -> Twist:
    """Best collision-free sample by total; ties prefer lower |w| then lower v.

    Falls back to a full stop when every sample is blocked.
    """
    if not scored:
        raise ValueError("no scored samples")
    best: TrajectorySample | None = None
    for s in scored:
        if not s.collision_free:
            continue
        if best is None or s.total > best.total:
            best = s
        elif s.total == best.total:
            key = (abs(s.cmd.w), s.cmd.v)
            if key < (abs(best.cmd.w), best.cmd.v):
                best = s
    return best.cmd if best is not None else STOP

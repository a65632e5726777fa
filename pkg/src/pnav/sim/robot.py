"""Robot plant: first-order velocity tracking and exact constant-twist arcs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import OccupancyGrid, Pose, STOP, Twist, normalize_angle
from ..planner import PlannerLimits


@dataclass
class RobotState:
    pose: Pose
    twist: Twist = STOP
    commanded: Twist = STOP


def _approach(value: float, target: float, max_step: float) -> float:
    if target > value:
        return min(target, value + max_step)
    return max(target, value - max_step)


def advance_pose(pose: Pose, twist: Twist, dt: float) -> Pose:
    """Exact unicycle integration of a constant twist over dt.

    Closed-form arcs (rather than Euler steps) keep long circular paths from
    drifting: a full circle returns to the start up to rounding.
    """
    if abs(twist.w) < 1e-12:
        return Pose(
            pose.x + twist.v * math.cos(pose.yaw) * dt,
            pose.y + twist.v * math.sin(pose.yaw) * dt,
            pose.yaw,
        )
    yaw1 = pose.yaw + twist.w * dt
    r = twist.v / twist.w
    return Pose(
        pose.x + r * (math.sin(yaw1) - math.sin(pose.yaw)),
        pose.y - r * (math.cos(yaw1) - math.cos(pose.yaw)),
        normalize_angle(yaw1),
    )


def integrate_kinematics(
    state: RobotState,
    dt: float,
    limits: PlannerLimits,
    grid: OccupancyGrid | None = None,
) -> tuple[RobotState, bool]:
    """One tick of plant dynamics; returns (new state, collided).

    The twist tracks the commanded twist under the acceleration limits, then
    the pose follows the resulting arc. A move that would land in an occupied
    cell is blocked: the robot keeps its position (rotation still applies),
    forward speed drops to zero, and the collision is reported.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = _approach(state.twist.v, state.commanded.v, limits.accel_v * dt)
    w = _approach(state.twist.w, state.commanded.w, limits.accel_w * dt)
    twist = Twist(v, w)
    target = advance_pose(state.pose, twist, dt)
    if grid is not None and not grid.is_free_world(target.x, target.y):
        held = Pose(state.pose.x, state.pose.y, target.yaw)
        return RobotState(held, Twist(0.0, w), state.commanded), True
    return RobotState(target, twist, state.commanded), False

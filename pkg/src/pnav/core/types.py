"""Shared kinematic types, the scan container, and the simulation clock."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle (radians) into (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    r = math.fmod(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class Pose:
    """Planar pose: x, y in meters, yaw in radians wrapped to (-pi, pi]."""

    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Twist:
    """Body velocity: v forward m/s, w yaw rate rad/s."""

    v: float
    w: float


STOP = Twist(0.0, 0.0)


@dataclass(frozen=True)
class LaserScan:
    """One planar range scan.

    Beams are robot-relative, evenly spaced from angle_min to angle_max.
    A range is either a hit in (0, range_max] or +inf for no return.
    """

    angle_min: float
    angle_max: float
    beam_count: int
    ranges: tuple[float, ...]
    range_max: float
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        if self.beam_count < 1:
            raise ValueError("beam_count must be >= 1")
        if len(self.ranges) != self.beam_count:
            raise ValueError(
                f"ranges length {len(self.ranges)} != beam_count {self.beam_count}"
            )
        if self.range_max <= 0:
            raise ValueError("range_max must be positive")
        for r in self.ranges:
            if not (0.0 < r <= self.range_max or math.isinf(r)):
                raise ValueError(f"range {r!r} outside (0, range_max] and not +inf")

    @property
    def increment(self) -> float:
        if self.beam_count == 1:
            return 0.0
        return (self.angle_max - self.angle_min) / (self.beam_count - 1)

    @property
    def full_circle(self) -> bool:
        """Whether the beams cover the whole circle (wraparound lookups apply)."""
        if self.beam_count == 1:
            return False
        return (self.angle_max - self.angle_min) + self.increment >= TWO_PI - 1e-9

    def bearing(self, i: int) -> float:
        return self.angle_min + i * self.increment

    def range_at_bearing(self, bearing: float) -> float:
        """Range of the beam nearest to a robot-relative bearing."""
        if self.beam_count == 1:
            return self.ranges[0]
        b = normalize_angle(bearing)
        idx = int(round((b - self.angle_min) / self.increment))
        if self.full_circle:
            idx %= self.beam_count
        else:
            idx = min(max(idx, 0), self.beam_count - 1)
        return self.ranges[idx]


@dataclass
class SimClock:
    """Fixed-step clock; time only advances in whole ticks.

    `now` is derived from an integer tick counter so long runs accumulate no
    floating-point drift.
    """

    tick: float
    ticks: int = field(default=0)

    def __post_init__(self) -> None:
        if self.tick <= 0:
            raise ValueError("tick must be positive")
        if self.ticks < 0:
            raise ValueError("tick counter must be non-negative")

    @property
    def now(self) -> float:
        return self.ticks * self.tick

    def advance(self, n: int = 1) -> float:
        if n < 0:
            raise ValueError("clock cannot move backwards")
        self.ticks += n
        return self.now

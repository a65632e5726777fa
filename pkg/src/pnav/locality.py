"""Navigation locality at three levels: sensing, position, and path.

Sensing locality is the overlap ratio of two camera view frustums projected
into the plane. Position locality is the inverse summed variance of the
localization particle cloud. Path locality is whether the global plan is
shrinking (progress) or growing (deviation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Pose

CONF_MAX = 1e6
_CONF_EPS = 1e-6
_DEGENERATE_AREA = 1e-12

PROGRESS_EPS_M = 0.05


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera geometry plus the depth the view frustum is projected to."""

    w: float = 640.0          # px
    h: float = 480.0          # px
    f_x: float = 320.0        # px
    f_y: float = 320.0        # px
    view_range: float = 4.0   # m

    def __post_init__(self) -> None:
        for name in ("w", "h", "f_x", "f_y", "view_range"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def fov_w(self) -> float:
        """Horizontal field of view, 2*atan(w / 2f_x)."""
        return 2.0 * math.atan(self.w / (2.0 * self.f_x))

    @property
    def fov_h(self) -> float:
        """Vertical field of view; carried along but unused by the planar overlap."""
        return 2.0 * math.atan(self.h / (2.0 * self.f_y))


@dataclass(frozen=True)
class Frustum:
    """Planar camera footprint: a convex polygon with CCW vertices."""

    polygon: tuple[tuple[float, float], ...]

    @property
    def area(self) -> float:
        return polygon_area(self.polygon)


def polygon_area(points) -> float:
    """Shoelace area; degenerate polygons (under 3 vertices or ~zero) report 0."""
    if len(points) < 3:
        return 0.0
    s = 0.0
    for (x0, y0), (x1, y1) in zip(points, list(points[1:]) + [points[0]]):
        s += x0 * y1 - x1 * y0
    area = abs(s) / 2.0
    return 0.0 if area < _DEGENERATE_AREA else area


def clip_convex(subject, clip) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of one convex CCW polygon by another.

    Points exactly on a clip edge count as inside, so clipping a polygon by
    itself returns its own vertices unchanged.
    """
    output = list(subject)
    cp1 = clip[-1]
    for cp2 in clip:
        if not output:
            return []
        ex, ey = cp2[0] - cp1[0], cp2[1] - cp1[1]

        def inside(p):
            return ex * (p[1] - cp1[1]) - ey * (p[0] - cp1[0]) >= 0.0

        def intersection(s, e):
            dcx, dcy = cp1[0] - cp2[0], cp1[1] - cp2[1]
            dpx, dpy = s[0] - e[0], s[1] - e[1]
            denom = dcx * dpy - dcy * dpx
            if denom == 0.0:
                # segment parallel to the clip edge; only reachable through
                # rounding noise when a vertex sits on the edge
                return e
            n1 = cp1[0] * cp2[1] - cp1[1] * cp2[0]
            n2 = s[0] * e[1] - s[1] * e[0]
            return ((n1 * dpx - n2 * dcx) / denom, (n1 * dpy - n2 * dcy) / denom)

        inputs, output = output, []
        s = inputs[-1]
        s_in = inside(s)
        for e in inputs:
            e_in = inside(e)
            if e_in:
                if not s_in:
                    output.append(intersection(s, e))
                output.append(e)
            elif s_in:
                output.append(intersection(s, e))
            s, s_in = e, e_in
        cp1 = cp2
    return output


def fov_polygon(pose: Pose, intrinsics: CameraIntrinsics) -> Frustum:
    """Project the camera view to a planar isoceles triangle at the pose.

    The apex sits at the pose; the far edge is the chord at view_range depth,
    so the two far vertices lie at bearings yaw +- fov_w/2 and distance
    view_range / cos(fov_w/2). Vertices are ordered counterclockwise.
    """
    half = intrinsics.fov_w / 2.0
    if intrinsics.fov_w >= math.pi:
        raise ValueError(f"horizontal FOV {intrinsics.fov_w} rad >= pi is unsupported")
    d = intrinsics.view_range / math.cos(half)
    right = (pose.x + d * math.cos(pose.yaw - half), pose.y + d * math.sin(pose.yaw - half))
    left = (pose.x + d * math.cos(pose.yaw + half), pose.y + d * math.sin(pose.yaw + half))
    return Frustum(((pose.x, pose.y), right, left))


def fov_overlap(p1: Pose, p2: Pose, intrinsics: CameraIntrinsics) -> float:
    """Overlap ratio of the two view frustums: area(F1 ^ F2) / min areas, in [0, 1]."""
    f1 = fov_polygon(p1, intrinsics)
    f2 = fov_polygon(p2, intrinsics)
    a1, a2 = f1.area, f2.area
    inter = polygon_area(clip_convex(f1.polygon, f2.polygon))
    return min(1.0, max(0.0, inter / min(a1, a2)))


@dataclass
class ParticleSet:
    """Weighted pose hypotheses; weights are kept normalized to sum 1."""

    xs: np.ndarray
    ys: np.ndarray
    yaws: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.xs)
        if n < 1:
            raise ValueError("a particle set needs at least one particle")
        if not (len(self.ys) == len(self.yaws) == len(self.weights) == n):
            raise ValueError("particle arrays must share one length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        total = float(self.weights.sum())
        if total <= 0:
            raise ValueError("weights must not all be zero")
        self.weights = self.weights / total

    @property
    def count(self) -> int:
        return len(self.xs)

    @classmethod
    def from_rows(cls, rows) -> "ParticleSet":
        arr = np.asarray(rows, dtype=float)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].copy())


def confidence_ratio(ps: ParticleSet) -> float:
    """Inverse of the summed positional variances, saturated at CONF_MAX.

    Variances are unweighted population variances of the particle positions;
    the weights only matter to the localizer itself.
    """
    var_x = float(np.mean((ps.xs - ps.xs.mean()) ** 2))
    var_y = float(np.mean((ps.ys - ps.ys.mean()) ** 2))
    denom = var_x + var_y
    if denom < _CONF_EPS:
        return CONF_MAX
    return 1.0 / denom


class ProgressStatus(Enum):
    PROGRESS = "PROGRESS"
    DEVIATION = "DEVIATION"
    STALLED = "STALLED"


@dataclass(frozen=True)
class PlanSnapshot:
    """Remaining global plan length and current local plan length at an instant."""

    global_len: float
    local_len: float
    timestamp: float

    def __post_init__(self) -> None:
        if self.global_len < 0 or self.local_len < 0:
            raise ValueError("plan lengths must be non-negative")


def progress_status(prev: PlanSnapshot, curr: PlanSnapshot, eps: float = PROGRESS_EPS_M) -> ProgressStatus:
    """Classify plan evolution: shrinking global plan is progress, growth is deviation."""
    if curr.timestamp <= prev.timestamp:
        raise ValueError("snapshots must be time-ordered")
    if curr.global_len > prev.global_len + eps:
        return ProgressStatus.DEVIATION
    if curr.global_len < prev.global_len - eps and curr.local_len <= prev.local_len + eps:
        return ProgressStatus.PROGRESS
    return ProgressStatus.STALLED


@dataclass(frozen=True)
class LocalityReport:
    """The coordinator's locality inputs: sensing, position, and path signals."""

    fov_overlap: float
    confidence_ratio: float
    progress: ProgressStatus

    def __post_init__(self) -> None:
        if not 0.0 <= self.fov_overlap <= 1.0:
            raise ValueError("fov_overlap must be in [0, 1]")
        if not 0.0 < self.confidence_ratio <= CONF_MAX:
            raise ValueError("confidence_ratio must be in (0, CONF_MAX]")

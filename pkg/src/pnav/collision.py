"""Collision prediction: pipeline-delay timeline, reachable distance, TTC, safe time.

The timeline profile stores per-frequency stage latencies (mean and observed
max). End-to-end delay is the sensor-alignment slack plus the slower of the
localization and detection stages, then the costmap and local-planner stages.
Safe time is the time-to-collision minus that delay; negative values mean the
pipeline cannot react before a possible impact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import LaserScan
from .power.embedded import CPU_LEVELS_MHZ, GPU_LEVELS_MHZ, FrequencyConfig

DT0_CAP_S = 0.033  # camera at 30 Hz bounds the sensor-alignment slack

TIMELINE_HEADER = "pnav-timeline v1"

# stage latencies observed at the top frequency levels (seconds)
SLAM_ANCHOR_S = 0.040608
COSTMAP_ANCHOR_S = 0.101043
PLANNER_ANCHOR_S = 0.060
DETECTOR_ANCHOR_S = 0.050
WORST_FACTOR = 1.5


class DelayCase(Enum):
    AVERAGE = "AVERAGE"
    WORST = "WORST"


@dataclass(frozen=True)
class StageTiming:
    mean: float
    max: float

    def __post_init__(self) -> None:
        if self.mean <= 0 or self.max < self.mean:
            raise ValueError("stage timing needs 0 < mean <= max")

    def pick(self, case: DelayCase) -> float:
        return self.mean if case is DelayCase.AVERAGE else self.max


@dataclass(frozen=True)
class TimelineProfile:
    """Per-frequency stage latencies keyed by MHz level."""

    dt0: float
    slam: dict[int, StageTiming]        # CPU-bound
    object_det: dict[int, StageTiming]  # GPU-bound
    costmap: dict[int, StageTiming]     # CPU-bound
    planner: dict[int, StageTiming]     # CPU-bound

    def __post_init__(self) -> None:
        if not 0 < self.dt0 <= DT0_CAP_S:
            raise ValueError(f"dt0 must be in (0, {DT0_CAP_S}]")
        for name in ("slam", "object_det", "costmap", "planner"):
            if not getattr(self, name):
                raise ValueError(f"{name} lookup is empty")

    def _lookup(self, table: dict[int, StageTiming], f: int, what: str) -> StageTiming:
        try:
            return table[f]
        except KeyError:
            raise ValueError(f"no {what} timing profiled at {f} MHz") from None

    def stage_times(self, fc: FrequencyConfig, case: DelayCase) -> tuple[float, float, float, float]:
        return (
            self._lookup(self.slam, fc.f_cpu, "slam").pick(case),
            self._lookup(self.object_det, fc.f_gpu, "detector").pick(case),
            self._lookup(self.costmap, fc.f_cpu, "costmap").pick(case),
            self._lookup(self.planner, fc.f_cpu, "planner").pick(case),
        )


def synthesize_profile(
    cpu_levels=CPU_LEVELS_MHZ,
    gpu_levels=GPU_LEVELS_MHZ,
    slam_anchor: float = SLAM_ANCHOR_S,
    costmap_anchor: float = COSTMAP_ANCHOR_S,
    planner_anchor: float = PLANNER_ANCHOR_S,
    detector_anchor: float = DETECTOR_ANCHOR_S,
    worst_factor: float = WORST_FACTOR,
    dt0: float = DT0_CAP_S,
) -> TimelineProfile:
    """Build the offline-profiled lookup: t(f) = anchor * (f_top / f).

    The inverse-frequency law keeps latency monotone in frequency; worst-case
    entries are a fixed factor above the mean.
    """

    def scaled(anchor: float, levels) -> dict[int, StageTiming]:
        top = levels[-1]
        return {
            f: StageTiming(anchor * (top / f), worst_factor * anchor * (top / f))
            for f in levels
        }

    return TimelineProfile(
        dt0=dt0,
        slam=scaled(slam_anchor, cpu_levels),
        object_det=scaled(detector_anchor, gpu_levels),
        costmap=scaled(costmap_anchor, cpu_levels),
        planner=scaled(planner_anchor, cpu_levels),
    )


def pipeline_delay(profile: TimelineProfile, fc: FrequencyConfig, case: DelayCase) -> float:
    """dt0 + max(slam, detector) + costmap + planner at the given frequencies."""
    t_slam, t_obj, t_costmap, t_planner = profile.stage_times(fc, case)
    return profile.dt0 + max(t_slam, t_obj) + t_costmap + t_planner


# -- reachable distance and TTC ------------------------------------------------


def velocity_lattice(vmax: float, wmax: float, nv: int, nw: int) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive sample lattices over [0, vmax] and [-wmax, wmax]."""
    vs = np.array([vmax / 2.0]) if nv == 1 else np.linspace(0.0, vmax, nv)
    ws = np.array([0.0]) if nw == 1 else np.linspace(-wmax, wmax, nw)
    return vs, ws


def min_reachable_distance(
    scan: LaserScan,
    vmax: float,
    wmax: float,
    horizon: float = 2.0,
    samples: tuple[int, int] = (5, 11),
    time_step: float = 0.05,
) -> float:
    """Shortest remaining clearance over the drivable window, or +inf.

    Every sampled command (v, w) is rolled forward along its constant-twist
    arc; at each time step the scan range at the arc point's bearing, minus the
    distance already covered toward it, is a collision candidate (floored at
    zero). Beams with no return contribute nothing; a scan with no returns at
    all yields +inf.
    """
    if scan.beam_count < 1:
        raise ValueError("scan has no beams")
    if vmax <= 0 or horizon <= 0 or time_step <= 0:
        raise ValueError("vmax, horizon, and time_step must be positive")
    if all(math.isinf(r) for r in scan.ranges):
        return math.inf

    vs, ws = velocity_lattice(vmax, wmax, *samples)
    n_t = int(math.floor(horizon / time_step + 1e-9))
    best = math.inf
    for v in vs:
        for w in ws:
            for k in range(n_t + 1):
                t = k * time_step
                if abs(w) < 1e-12:
                    px, py = v * t, 0.0
                else:
                    px = (v / w) * math.sin(w * t)
                    py = (v / w) * (1.0 - math.cos(w * t))
                r = scan.range_at_bearing(math.atan2(py, px))
                if math.isinf(r):
                    continue
                d = r - math.sqrt(px * px + py * py)
                if d < 0.0:
                    d = 0.0
                if d < best:
                    best = d
    return best


def time_to_collision(f_d: float, vmax: float) -> float:
    """f_d / vmax; +inf propagates as a clear path."""
    if vmax <= 0:
        raise ValueError("vmax must be positive")
    if math.isinf(f_d):
        return math.inf
    if f_d < 0:
        raise ValueError("reachable distance cannot be negative")
    return f_d / vmax


def safe_time(t_c: float, delay: float) -> float:
    """t_c minus the pipeline delay; negative means the pipeline is too slow."""
    if delay < 0:
        raise ValueError("delay must be non-negative")
    if math.isinf(t_c):
        return math.inf
    return t_c - delay


@dataclass(frozen=True)
class TTCReport:
    f_d: float
    t_c: float
    s_t: float
    case: DelayCase


def ttc_report(
    scan: LaserScan,
    vmax: float,
    wmax: float,
    profile: TimelineProfile,
    fc: FrequencyConfig,
    case: DelayCase = DelayCase.WORST,
    horizon: float = 2.0,
    samples: tuple[int, int] = (5, 11),
) -> TTCReport:
    f_d = min_reachable_distance(scan, vmax, wmax, horizon, samples)
    t_c = time_to_collision(f_d, vmax)
    s_t = safe_time(t_c, pipeline_delay(profile, fc, case))
    return TTCReport(f_d, t_c, s_t, case)


# -- persistence -----------------------------------------------------------------


def save_profile(profile: TimelineProfile, path) -> None:
    lines = [TIMELINE_HEADER, f"dt0 = {profile.dt0!r}"]
    for stage in ("slam", "object_det", "costmap", "planner"):
        table: dict[int, StageTiming] = getattr(profile, stage)
        for f in sorted(table):
            t = table[f]
            lines.append(f"{stage}.{f} = {t.mean * 1e3!r} {t.max * 1e3!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile(path) -> TimelineProfile:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != TIMELINE_HEADER:
        raise ValueError(f"{path}: not a timeline profile (missing '{TIMELINE_HEADER}')")
    dt0 = None
    tables: dict[str, dict[int, StageTiming]] = {
        "slam": {}, "object_det": {}, "costmap": {}, "planner": {}
    }
    for ln in lines[1:]:
        key, _, value = ln.partition("=")
        key = key.strip()
        if key == "dt0":
            dt0 = float(value)
            continue
        stage, _, mhz = key.partition(".")
        if stage not in tables:
            raise ValueError(f"{path}: unknown timeline stage {stage!r}")
        mean_ms, max_ms = value.split()
        tables[stage][int(mhz)] = StageTiming(float(mean_ms) / 1e3, float(max_ms) / 1e3)
    if dt0 is None:
        raise ValueError(f"{path}: missing dt0 entry")
    return TimelineProfile(dt0=dt0, **tables)

"""Utilization-aware DVFS governor baseline.

Steps one level up when utilization crosses 80%, one level down below 30%.
Utilization on the simulated board is synthesized from the timeline lookups:
the CPU's busiest pipeline stage as a fraction of the 5 Hz scan cycle, and the
detector latency as a fraction of its invocation period.
"""

from __future__ import annotations

from ..collision import DelayCase, TimelineProfile
from ..power.embedded import CPU_LEVELS_MHZ, GPU_LEVELS_MHZ, FrequencyConfig

UTIL_UP = 0.8
UTIL_DOWN = 0.3
PIPELINE_CYCLE_S = 0.2  # stages are driven by the 5 Hz scan cycle


def _step(levels: tuple[int, ...], current: int, util: float) -> int:
    i = levels.index(current)
    if util > UTIL_UP and i + 1 < len(levels):
        return levels[i + 1]
    if util < UTIL_DOWN and i > 0:
        return levels[i - 1]
    return current


def udvfs_governor(util_cpu: float, util_gpu: float, current: FrequencyConfig) -> FrequencyConfig:
    """One governor step for both axes."""
    if not (0.0 <= util_cpu <= 1.0 and 0.0 <= util_gpu <= 1.0):
        raise ValueError("utilizations must be in [0, 1]")
    return FrequencyConfig(
        _step(CPU_LEVELS_MHZ, current.f_cpu, util_cpu),
        _step(GPU_LEVELS_MHZ, current.f_gpu, util_gpu),
    )


def synthesize_utilization(
    profile: TimelineProfile,
    fc: FrequencyConfig,
    detection_period_s: float,
) -> tuple[float, float]:
    """(cpu, gpu) utilization in [0, 1] from the stage latency lookups."""
    t_slam, t_obj, t_costmap, t_planner = profile.stage_times(fc, DelayCase.AVERAGE)
    util_cpu = max(t_slam, t_costmap, t_planner) / PIPELINE_CYCLE_S
    util_gpu = t_obj / detection_period_s
    return min(1.0, util_cpu), min(1.0, util_gpu)

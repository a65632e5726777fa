"""Coordinator: picks CPU/GPU frequencies and navigation parameters.

Frequency selection is an exhaustive search over the 7x6 level grid for the
cheapest board power whose worst-case pipeline delay still leaves the
time-to-collision margin above the critical threshold. Mode switching runs a
small hysteresis state machine over the locality test: several consecutive
failures drop into performance mode, several consecutive margin-passing
successes return to power saving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .collision import DelayCase, TimelineProfile, pipeline_delay
from .locality import LocalityReport, ProgressStatus
from .power.embedded import (
    CPU_LEVELS_MHZ,
    DUTY_REFERENCE_HZ,
    GPU_LEVELS_MHZ,
    MAX_FREQUENCIES,
    EmbeddedPowerModel,
    FrequencyConfig,
    predict_embedded_power,
)

YOLO_WAIT_MAX_MS = 200
PARTICLES_MIN = 500
PARTICLES_MAX = 3000
CONTROLLER_FREQUENCIES_HZ = (10, 20, 30)


class Mode(Enum):
    POWER_SAVING = "POWER_SAVING"
    PERFORMANCE = "PERFORMANCE"


@dataclass(frozen=True)
class CoordinatorConfig:
    t_d: float = 2.0                    # critical TTC margin, seconds
    fov_threshold: float = 0.8
    confidence_threshold: float = 50.0  # 1/m^2
    hysteresis_margin: float = 0.10
    consecutive_trigger: int = 3

    def __post_init__(self) -> None:
        if self.t_d <= 0 or self.fov_threshold <= 0 or self.confidence_threshold <= 0:
            raise ValueError("thresholds must be positive")
        if not 0.0 <= self.hysteresis_margin <= 0.5:
            raise ValueError("hysteresis_margin must be in [0, 0.5]")
        if self.consecutive_trigger < 1:
            raise ValueError("consecutive_trigger must be >= 1")


@dataclass(frozen=True)
class NavParams:
    """Navigation-stack knobs the coordinator is allowed to move."""

    yolo_wait_ms: int
    max_particles: int
    controller_frequency: int

    def __post_init__(self) -> None:
        if not 0 <= self.yolo_wait_ms <= YOLO_WAIT_MAX_MS:
            raise ValueError(f"yolo_wait_ms must be in [0, {YOLO_WAIT_MAX_MS}]")
        if not PARTICLES_MIN <= self.max_particles <= PARTICLES_MAX:
            raise ValueError(f"max_particles must be in [{PARTICLES_MIN}, {PARTICLES_MAX}]")
        if self.controller_frequency not in CONTROLLER_FREQUENCIES_HZ:
            raise ValueError(f"controller_frequency must be one of {CONTROLLER_FREQUENCIES_HZ}")


def optimize_frequencies(
    embedded: EmbeddedPowerModel,
    profile: TimelineProfile,
    t_c: float,
    t_d: float,
    detection_hz: float = DUTY_REFERENCE_HZ,
) -> FrequencyConfig:
    """Cheapest frequency pair whose worst-case delay keeps t_c - delay >= t_d.

    All 42 pairs are scanned; ties prefer the lower GPU then lower CPU level.
    When no pair is feasible the maximal frequencies are returned, since
    minimizing delay is the safest remaining move.
    """
    if t_d <= 0:
        raise ValueError("t_d must be positive")
    best: FrequencyConfig | None = None
    best_power = math.inf
    for f_gpu in GPU_LEVELS_MHZ:
        for f_cpu in CPU_LEVELS_MHZ:
            fc = FrequencyConfig(f_cpu, f_gpu)
            delay = pipeline_delay(profile, fc, DelayCase.WORST)
            if t_c - delay < t_d:
                continue
            power = predict_embedded_power(embedded, fc, detection_hz)
            if power < best_power:
                best, best_power = fc, power
    return best if best is not None else MAX_FREQUENCIES


def locality_test(report: LocalityReport, cfg: CoordinatorConfig, margin: float = 0.0) -> bool:
    """All three locality signals healthy, with thresholds raised by `margin`."""
    return (
        report.fov_overlap >= cfg.fov_threshold * (1.0 + margin)
        and report.confidence_ratio >= cfg.confidence_threshold * (1.0 + margin)
        and report.progress is ProgressStatus.PROGRESS
    )


def step_mode(
    current: Mode, test_passed: bool, streak: int, cfg: CoordinatorConfig
) -> tuple[Mode, int]:
    """Advance the mode machine by one evaluation.

    `streak` counts consecutive transition-driving results (failures while
    power saving, passes while in performance mode). The caller must already
    have applied the hysteresis margin to `test_passed` when in performance
    mode; a switch resets the streak.
    """
    if current is Mode.POWER_SAVING:
        streak = streak + 1 if not test_passed else 0
    else:
        streak = streak + 1 if test_passed else 0
    if streak >= cfg.consecutive_trigger:
        flipped = Mode.PERFORMANCE if current is Mode.POWER_SAVING else Mode.POWER_SAVING
        return flipped, 0
    return current, streak


def apply_mode(mode: Mode, s_t: float, cfg: CoordinatorConfig) -> NavParams:
    """Navigation parameters for a mode.

    Power saving throttles the detector by the available safe time (clamped to
    the allowed wait range) and runs lean; performance mode restores full-rate
    settings.
    """
    if mode is Mode.PERFORMANCE:
        return NavParams(yolo_wait_ms=0, max_particles=PARTICLES_MAX, controller_frequency=30)
    if math.isinf(s_t):
        wait = YOLO_WAIT_MAX_MS
    else:
        wait = int(min(YOLO_WAIT_MAX_MS, max(0, round(s_t * 1000.0))))
    return NavParams(yolo_wait_ms=wait, max_particles=PARTICLES_MIN, controller_frequency=10)


@dataclass
class Coordinator:
    """Single-owner mode machine fusing locality and safe-time inputs.

    The mode machine moves the navigation parameters; frequencies always come
    from the constrained optimizer (performance mode raises the duty cycle it
    optimizes for, and a tight time-to-collision drives the search toward the
    fast levels on its own). A negative worst-case safe time forces
    performance mode outright; with no feasible pair the optimizer already
    fails safe to the maximal frequencies.
    """

    embedded: EmbeddedPowerModel
    profile: TimelineProfile
    cfg: CoordinatorConfig
    mode: Mode = Mode.POWER_SAVING
    streak: int = 0

    def evaluate(
        self,
        report: LocalityReport,
        t_c: float,
        s_t_worst: float,
        base_detection_period_s: float = 1.0 / DUTY_REFERENCE_HZ,
    ) -> tuple[Mode, NavParams, FrequencyConfig]:
        if s_t_worst < 0:
            self.mode, self.streak = Mode.PERFORMANCE, 0
        else:
            margin = self.cfg.hysteresis_margin if self.mode is Mode.PERFORMANCE else 0.0
            passed = locality_test(report, self.cfg, margin)
            self.mode, self.streak = step_mode(self.mode, passed, self.streak, self.cfg)

        params = apply_mode(self.mode, s_t_worst, self.cfg)
        detection_hz = 1.0 / (base_detection_period_s + params.yolo_wait_ms / 1000.0)
        freqs = optimize_frequencies(self.embedded, self.profile, t_c, self.cfg.t_d, detection_hz)
        return self.mode, params, freqs

"""Deterministic scenario loop wiring the whole stack together.

Fixed 10 ms ticks. Within a tick, stages always run in the same order:
sense (LiDAR 5 Hz, camera 30 Hz, detection stub) -> monitor/coordinate
(5 Hz) -> governor (5 Hz, uDVFS policies) -> plan (controller rate) ->
actuate (every tick) -> log (5 Hz). All randomness flows from one seeded
generator, so identical (spec, seed) runs produce identical byte streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..collision import (
    DelayCase,
    TimelineProfile,
    min_reachable_distance,
    pipeline_delay,
    safe_time,
    time_to_collision,
)
from ..coordinator import Coordinator, CoordinatorConfig, Mode, NavParams
from ..core import OccupancyGrid, Pose, STOP, SimClock, Twist, normalize_angle
from ..locality import (
    CameraIntrinsics,
    LocalityReport,
    PlanSnapshot,
    ProgressStatus,
    confidence_ratio,
    fov_overlap,
    progress_status,
)
from ..planner import (
    GlobalPlan,
    NoPathError,
    PlannerLimits,
    PlannerWeights,
    plan_global,
    sample_window,
    score_samples,
    select_command,
)
from ..power.embedded import (
    EmbeddedPowerModel,
    FrequencyConfig,
    MAX_FREQUENCIES,
    MIN_FREQUENCIES,
    predict_embedded_power,
    predict_total_power,
)
from ..power.mlp import MotorPowerModel
from ..power.plant import MotorCommandWindow, MotorPlant
from .governor import synthesize_utilization, udvfs_governor
from .localizer import Localizer, init_localizer, localizer_step, resize
from .robot import RobotState, integrate_kinematics
from .sensors import simulate_scan

TICK_S = 0.01
LIDAR_PERIOD_S = 0.2
CAMERA_PERIOD_S = 1.0 / 30.0
COORDINATOR_PERIOD_S = 0.2
GOVERNOR_PERIOD_S = 0.2
METRICS_PERIOD_S = 0.2


class Policy(Enum):
    SP = "SP"
    SP_UDVFS = "SP_UDVFS"
    PNAV_UDVFS = "PNAV_UDVFS"
    PNAV = "PNAV"


class ScenarioAbort(RuntimeError):
    """Scenario could not complete; the message carries the diagnostic."""


# navigation-stack defaults the shortest-path baselines run with
BASELINE_NAV_PARAMS = NavParams(yolo_wait_ms=0, max_particles=1000, controller_frequency=20)


@dataclass(frozen=True)
class ScenarioSpec:
    grid: OccupancyGrid
    start: Pose
    goals: tuple[tuple[float, float], ...]
    loops: int = 1
    policy: Policy = Policy.PNAV
    seed: int = 0
    map_path: str = "<inline>"
    weights: PlannerWeights = PlannerWeights()
    limits: PlannerLimits = PlannerLimits()
    horizon: float = 2.0
    planner_dt: float = 0.1
    safety_radius: float = 0.2
    clearance_cap: float = 2.0
    lookahead: float = 1.5
    beam_count: int = 180
    range_max: float = 6.0
    scan_noise_sigma: float = 0.01
    loc_sigma_trans: float = 0.01
    loc_sigma_rot: float = 0.01
    loc_beams_used: int = 12
    loc_sigma_hit: float = 0.2
    loc_init_spread: float = 0.3
    intrinsics: CameraIntrinsics = CameraIntrinsics()
    coordinator_cfg: CoordinatorConfig = CoordinatorConfig()
    detection_base_hz: float = 6.0
    goal_tolerance: float = 0.2
    time_limit_s: float = 600.0

    def __post_init__(self) -> None:
        if self.loops < 1:
            raise ValueError("loops must be >= 1")
        if not self.goals:
            raise ValueError("at least one goal is required")
        if not self.grid.is_free_world(self.start.x, self.start.y):
            raise ValueError("start pose is not on a free cell")
        for gx, gy in self.goals:
            if not self.grid.is_free_world(gx, gy):
                raise ValueError(f"goal ({gx}, {gy}) is not on a free cell")


@dataclass(frozen=True)
class MetricsSample:
    time_s: float
    mode: Mode
    freqs: FrequencyConfig
    motor_w: float
    embedded_w: float
    total_w: float
    predicted_motor_w: float
    predicted_total_w: float
    position_error_m: float
    orientation_error_rad: float
    t_c_s: float
    s_t_s: float


@dataclass
class CalibrationBundle:
    plant: MotorPlant
    motor_model: MotorPowerModel
    embedded: EmbeddedPowerModel
    profile: TimelineProfile


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    metrics: list[MetricsSample]
    summary: dict


def _carrot(plan: GlobalPlan, x: float, y: float, lookahead: float) -> tuple[float, float]:
    """Waypoint roughly `lookahead` meters ahead along the plan."""
    pts = plan.waypoints
    if len(pts) == 1:
        return pts[0]
    arr = np.asarray(pts)
    d2 = (arr[:, 0] - x) ** 2 + (arr[:, 1] - y) ** 2
    k = int(np.argmin(d2))
    acc = 0.0
    for i in range(k + 1, len(pts)):
        acc += math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1])
        if acc >= lookahead:
            return pts[i]
    return pts[-1]


def _trapezoid_energy(samples: list[MetricsSample]) -> float:
    e = 0.0
    for a, b in zip(samples, samples[1:]):
        e += 0.5 * (a.total_w + b.total_w) * (b.time_s - a.time_s)
    return e


class _Run:
    """Mutable state of one scenario execution."""

    def __init__(self, spec: ScenarioSpec, calib: CalibrationBundle):
        self.spec = spec
        self.calib = calib
        self.rng = np.random.default_rng(spec.seed)
        self.clock = SimClock(tick=TICK_S)
        self.robot = RobotState(pose=spec.start)
        self.prev_tick_twist = STOP

        is_pnav = spec.policy in (Policy.PNAV, Policy.PNAV_UDVFS)
        self.nav = apply_initial_params(spec.policy)
        self.localizer = init_localizer(
            spec.start,
            self.nav.max_particles,
            spec.loc_init_spread,
            self.rng,
            sigma_trans=spec.loc_sigma_trans,
            sigma_rot=spec.loc_sigma_rot,
            beams_used=spec.loc_beams_used,
            sigma_hit=spec.loc_sigma_hit,
        )
        self.coordinator = (
            Coordinator(calib.embedded, calib.profile, spec.coordinator_cfg) if is_pnav else None
        )
        uses_governor = spec.policy in (Policy.SP_UDVFS, Policy.PNAV_UDVFS)
        self.freqs = MIN_FREQUENCIES if uses_governor else MAX_FREQUENCIES
        self.uses_governor = uses_governor
        self.weights = spec.weights if is_pnav else spec.weights.without_power()
        self.mode = Mode.POWER_SAVING if is_pnav else Mode.PERFORMANCE

        # goal queue: loops x goals
        self.goal_queue = [g for _ in range(spec.loops) for g in spec.goals]
        self.goal_idx = 0
        self.leg_start = 0.0
        self.finish_times: list[float] = []
        self.collisions = 0

        self.plan = self._replan()
        self.last_scan = None
        self.f_d = math.inf
        self.odom_dist = 0.0
        self.odom_rot = 0.0
        self.latest_cam_pose: Pose = self.localizer.estimate
        self.prev_coord_cam_pose: Pose | None = None
        self.prev_snapshot: PlanSnapshot | None = None
        self.last_cmd = STOP

        self.next_lidar = 0.0
        self.next_camera = 0.0
        self.next_coord = 0.0
        self.next_governor = 0.0
        self.next_control = 0.0
        self.next_metrics = 0.0
        self.next_detection = 0.0

        self.metrics: list[MetricsSample] = []
        self.done = False

    # -- helpers -----------------------------------------------------------

    @property
    def goal(self) -> tuple[float, float]:
        return self.goal_queue[self.goal_idx]

    def _plan_origin(self) -> Pose:
        est = self.localizer.estimate
        if self.spec.grid.is_free_world(est.x, est.y):
            return est
        return self.robot.pose  # estimate drifted into a wall; fall back to truth

    def _replan(self) -> GlobalPlan:
        try:
            return plan_global(self.spec.grid, self._plan_origin(), self.goal)
        except (NoPathError, ValueError) as exc:
            raise ScenarioAbort(f"goal {self.goal} unreachable: {exc}") from exc

    def detection_period(self) -> float:
        return 1.0 / self.spec.detection_base_hz + self.nav.yolo_wait_ms / 1000.0

    def detection_hz(self) -> float:
        return 1.0 / self.detection_period()

    # -- per-tick stages ------------------------------------------------------

    def fire_lidar(self, now: float) -> None:
        spec = self.spec
        self.last_scan = simulate_scan(
            spec.grid, self.robot.pose, spec.beam_count, spec.range_max,
            spec.scan_noise_sigma, self.rng, now,
        )
        trans = self.odom_dist * (1.0 + self.rng.normal(0.0, 0.01))
        rot = self.odom_rot + self.rng.normal(0.0, math.radians(0.5))
        self.odom_dist = 0.0
        self.odom_rot = 0.0
        self.localizer = localizer_step(
            self.localizer, (trans, rot), self.last_scan, spec.grid, self.rng
        )
        self.f_d = min_reachable_distance(
            self.last_scan, spec.limits.vmax, spec.limits.wmax, spec.horizon
        )

    def fire_coordinator(self, now: float) -> None:
        spec = self.spec
        cam_now = self.latest_cam_pose
        cam_prev = self.prev_coord_cam_pose or cam_now
        fov = fov_overlap(cam_prev, cam_now, spec.intrinsics)
        conf = confidence_ratio(self.localizer.particles)
        est = self.localizer.estimate
        snapshot = PlanSnapshot(
            global_len=self.plan.remaining_length(est.x, est.y),
            local_len=abs(self.last_cmd.v) * spec.horizon,
            timestamp=now,
        )
        if self.prev_snapshot is None:
            progress = ProgressStatus.PROGRESS
        else:
            progress = progress_status(self.prev_snapshot, snapshot)
        report = LocalityReport(fov, conf, progress)

        t_c = time_to_collision(self.f_d, spec.limits.vmax)
        s_t_worst = safe_time(t_c, pipeline_delay(self.calib.profile, self.freqs, DelayCase.WORST))
        mode, params, freqs = self.coordinator.evaluate(
            report, t_c, s_t_worst, 1.0 / spec.detection_base_hz
        )
        self.mode = mode
        if params.max_particles != self.nav.max_particles:
            self.localizer = resize(self.localizer, params.max_particles, self.rng)
        self.nav = params
        if self.spec.policy is Policy.PNAV:
            self.freqs = freqs
        self.prev_snapshot = snapshot
        self.prev_coord_cam_pose = cam_now

    def fire_governor(self) -> None:
        util_cpu, util_gpu = synthesize_utilization(
            self.calib.profile, self.freqs, self.detection_period()
        )
        self.freqs = udvfs_governor(util_cpu, util_gpu, self.freqs)

    def fire_control(self, now: float) -> None:
        spec = self.spec
        est = self.localizer.estimate
        if math.hypot(est.x - self.goal[0], est.y - self.goal[1]) <= spec.goal_tolerance:
            self.finish_times.append(now - self.leg_start)
            self.goal_idx += 1
            if self.goal_idx >= len(self.goal_queue):
                self.done = True
                self.robot = replace(self.robot, commanded=STOP)
                self.last_cmd = STOP
                return
            self.leg_start = now
            self.plan = self._replan()
            self.prev_snapshot = None
            return
        carrot = _carrot(self.plan, est.x, est.y, spec.lookahead)
        window = sample_window(
            self.robot.twist, spec.limits, 1.0 / self.nav.controller_frequency
        )
        scored = score_samples(
            window, est, carrot, self.last_scan, self.calib.motor_model, self.weights,
            current=self.robot.twist, horizon=spec.horizon, dt=spec.planner_dt,
            safety_radius=spec.safety_radius, clearance_cap=spec.clearance_cap,
        )
        cmd = select_command(scored)
        self.robot = replace(self.robot, commanded=cmd)
        self.last_cmd = cmd

    def actuate(self) -> None:
        before = self.robot.pose
        self.prev_tick_twist = self.robot.twist
        self.robot, collided = integrate_kinematics(
            self.robot, TICK_S, self.spec.limits, self.spec.grid
        )
        after = self.robot.pose
        self.odom_dist += math.hypot(after.x - before.x, after.y - before.y)
        self.odom_rot += normalize_angle(after.yaw - before.yaw)
        if collided:
            self.collisions += 1
            self.robot = replace(self.robot, commanded=STOP)
            self.last_cmd = STOP
            self.plan = self._replan()
            self.prev_snapshot = None

    def log_metrics(self, now: float) -> None:
        cmd_window = MotorCommandWindow(self.robot.twist, self.prev_tick_twist)
        motor_truth = self.calib.plant.power(cmd_window)
        embedded = predict_embedded_power(self.calib.embedded, self.freqs, self.detection_hz())
        truth = predict_total_power(motor_truth, embedded)
        motor_pred = self.calib.motor_model.predict(cmd_window)
        est = self.localizer.estimate
        pose = self.robot.pose
        t_c = time_to_collision(self.f_d, self.spec.limits.vmax)
        s_t = safe_time(t_c, pipeline_delay(self.calib.profile, self.freqs, DelayCase.WORST))
        self.metrics.append(
            MetricsSample(
                time_s=now,
                mode=self.mode,
                freqs=self.freqs,
                motor_w=truth.motor_watts,
                embedded_w=truth.embedded_watts,
                total_w=truth.total_watts,
                predicted_motor_w=motor_pred,
                predicted_total_w=motor_pred + embedded,
                position_error_m=math.hypot(est.x - pose.x, est.y - pose.y),
                orientation_error_rad=abs(normalize_angle(est.yaw - pose.yaw)),
                t_c_s=t_c,
                s_t_s=s_t,
            )
        )


def apply_initial_params(policy: Policy) -> NavParams:
    if policy in (Policy.PNAV, Policy.PNAV_UDVFS):
        # power-saving defaults until the first coordinator evaluation
        return NavParams(yolo_wait_ms=0, max_particles=500, controller_frequency=10)
    return BASELINE_NAV_PARAMS


def run_scenario(spec: ScenarioSpec, calib: CalibrationBundle) -> ScenarioResult:
    run = _Run(spec, calib)
    is_pnav = spec.policy in (Policy.PNAV, Policy.PNAV_UDVFS)

    while not run.done:
        now = run.clock.now
        if now > spec.time_limit_s:
            raise ScenarioAbort(
                f"time limit {spec.time_limit_s}s exceeded at goal index {run.goal_idx} "
                f"({run.goal}); the goal may be unreachable"
            )
        if now >= run.next_lidar:
            run.fire_lidar(now)
            run.next_lidar += LIDAR_PERIOD_S
        if now >= run.next_camera:
            run.latest_cam_pose = run.localizer.estimate
            run.next_camera += CAMERA_PERIOD_S
        if now >= run.next_detection:
            run.next_detection = now + run.detection_period()
        if is_pnav and now >= run.next_coord:
            run.fire_coordinator(now)
            run.next_coord += COORDINATOR_PERIOD_S
        if run.uses_governor and now >= run.next_governor:
            run.fire_governor()
            run.next_governor += GOVERNOR_PERIOD_S
        if now >= run.next_control:
            run.fire_control(now)
            run.next_control += 1.0 / run.nav.controller_frequency
        run.actuate()
        if now >= run.next_metrics:
            run.log_metrics(now)
            run.next_metrics += METRICS_PERIOD_S
        run.clock.advance()

    if not run.metrics or run.metrics[-1].time_s < run.clock.now - TICK_S / 2:
        run.log_metrics(run.clock.now)

    return ScenarioResult(spec=spec, metrics=run.metrics, summary=_summarize(run))


# -- scenario file parsing ------------------------------------------------------

_SCALAR_KEYS = {
    "start.x": float, "start.y": float, "start.yaw": float,
    "loops": int, "seed": int, "policy": str,
    "planner.alpha": float, "planner.beta": float, "planner.gamma": float,
    "planner.theta_p": float,
    "planner.vmax": float, "planner.wmax": float,
    "planner.accel_v": float, "planner.accel_w": float,
    "planner.horizon": float, "planner.dt": float,
    "planner.safety_radius": float, "planner.clearance_cap": float,
    "planner.lookahead": float,
    "sensor.beams": int, "sensor.range_max": float, "sensor.noise_sigma": float,
    "localizer.sigma_trans": float, "localizer.sigma_rot": float,
    "localizer.beams_used": int, "localizer.sigma_hit": float,
    "localizer.init_spread": float,
    "camera.width": float, "camera.height": float,
    "camera.fx": float, "camera.fy": float, "camera.view_range": float,
    "coordinator.t_d": float, "coordinator.fov_threshold": float,
    "coordinator.confidence_threshold": float,
    "coordinator.hysteresis_margin": float, "coordinator.consecutive_trigger": int,
    "detection.base_hz": float,
    "sim.goal_tolerance": float, "sim.time_limit": float,
}


def parse_scenario_text(
    text: str,
    base_dir=None,
    policy: Policy | None = None,
    seed: int | None = None,
) -> ScenarioSpec:
    """Parse the flat key = value scenario format.

    `map` names the world file (relative to base_dir); `goal.N = x y` lines
    define the ordered goal list. CLI-provided policy and seed override the
    file. Unknown keys and malformed values are reported with their line
    number.
    """
    import os

    values: dict[str, object] = {}
    goals: dict[int, tuple[float, float]] = {}
    map_rel = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"scenario line {lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        if key == "map":
            map_rel = value
        elif key.startswith("goal."):
            try:
                idx = int(key.split(".", 1)[1])
                gx, gy = value.split()
                goals[idx] = (float(gx), float(gy))
            except ValueError as exc:
                raise ValueError(f"scenario line {lineno}: bad goal: {exc}") from exc
        elif key in _SCALAR_KEYS:
            try:
                values[key] = _SCALAR_KEYS[key](value)
            except ValueError as exc:
                raise ValueError(f"scenario line {lineno}: bad value for {key}: {exc}") from exc
        else:
            raise ValueError(f"scenario line {lineno}: unknown key {key!r}")

    if map_rel is None:
        raise ValueError("scenario: missing 'map' entry")
    if not goals:
        raise ValueError("scenario: no goal.N entries")
    for req in ("start.x", "start.y"):
        if req not in values:
            raise ValueError(f"scenario: missing '{req}'")

    map_path = os.path.join(base_dir, map_rel) if base_dir else map_rel
    grid = OccupancyGrid.load(map_path)

    if policy is None:
        name = str(values.get("policy", Policy.PNAV.value))
        try:
            policy = Policy(name)
        except ValueError:
            raise ValueError(f"scenario: unknown policy {name!r}") from None

    def get(key, default):
        return values.get(key, default)

    weights = PlannerWeights(
        get("planner.alpha", 0.4), get("planner.beta", 0.3),
        get("planner.gamma", 0.2), get("planner.theta_p", 0.1),
    )
    limits = PlannerLimits(
        get("planner.vmax", 0.5), get("planner.wmax", 1.0),
        get("planner.accel_v", 0.5), get("planner.accel_w", 1.5),
    )
    intrinsics = CameraIntrinsics(
        get("camera.width", 640.0), get("camera.height", 480.0),
        get("camera.fx", 320.0), get("camera.fy", 320.0),
        get("camera.view_range", 4.0),
    )
    coord_cfg = CoordinatorConfig(
        get("coordinator.t_d", 2.0), get("coordinator.fov_threshold", 0.8),
        get("coordinator.confidence_threshold", 50.0),
        get("coordinator.hysteresis_margin", 0.10),
        get("coordinator.consecutive_trigger", 3),
    )
    return ScenarioSpec(
        grid=grid,
        start=Pose(values["start.x"], values["start.y"], get("start.yaw", 0.0)),
        goals=tuple(goals[i] for i in sorted(goals)),
        loops=get("loops", 1),
        policy=policy,
        seed=seed if seed is not None else get("seed", 0),
        map_path=str(map_path),
        weights=weights,
        limits=limits,
        horizon=get("planner.horizon", 2.0),
        planner_dt=get("planner.dt", 0.1),
        safety_radius=get("planner.safety_radius", 0.2),
        clearance_cap=get("planner.clearance_cap", 2.0),
        lookahead=get("planner.lookahead", 1.5),
        beam_count=get("sensor.beams", 180),
        range_max=get("sensor.range_max", 6.0),
        scan_noise_sigma=get("sensor.noise_sigma", 0.01),
        loc_sigma_trans=get("localizer.sigma_trans", 0.01),
        loc_sigma_rot=get("localizer.sigma_rot", 0.01),
        loc_beams_used=get("localizer.beams_used", 12),
        loc_sigma_hit=get("localizer.sigma_hit", 0.2),
        loc_init_spread=get("localizer.init_spread", 0.3),
        intrinsics=intrinsics,
        coordinator_cfg=coord_cfg,
        detection_base_hz=get("detection.base_hz", 6.0),
        goal_tolerance=get("sim.goal_tolerance", 0.2),
        time_limit_s=get("sim.time_limit", 600.0),
    )


def parse_scenario(path, policy: Policy | None = None, seed: int | None = None) -> ScenarioSpec:
    import os

    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    return parse_scenario_text(text, base_dir=os.path.dirname(os.path.abspath(path)),
                               policy=policy, seed=seed)


def _summarize(run: _Run) -> dict:
    spec = run.spec
    samples = run.metrics
    finite_ttc = [s.t_c_s for s in samples if math.isfinite(s.t_c_s)]
    truth_total = np.array([s.total_w for s in samples])
    pred_total = np.array([s.predicted_total_w for s in samples])
    rel_err = np.abs(pred_total - truth_total) / np.maximum(truth_total, 1e-9)
    n_saving = sum(1 for s in samples if s.mode is Mode.POWER_SAVING)
    return {
        "policy": spec.policy.value,
        "seed": spec.seed,
        "map": spec.map_path,
        "start": [spec.start.x, spec.start.y, spec.start.yaw],
        "goals": [list(g) for g in spec.goals],
        "loops": spec.loops,
        "sim_time_s": run.clock.now,
        "goals_reached": len(run.finish_times),
        "collision_count": run.collisions,
        "finish_times_s": run.finish_times,
        "mean_finish_time_s": (
            float(np.mean(run.finish_times)) if run.finish_times else None
        ),
        "total_energy_j": _trapezoid_energy(samples),
        "mean_power_w": float(truth_total.mean()) if samples else None,
        "mean_motor_power_w": float(np.mean([s.motor_w for s in samples])) if samples else None,
        "mean_embedded_power_w": float(np.mean([s.embedded_w for s in samples])) if samples else None,
        "mean_position_error_m": float(np.mean([s.position_error_m for s in samples])) if samples else None,
        "mean_orientation_error_rad": float(np.mean([s.orientation_error_rad for s in samples])) if samples else None,
        "ttc_min_s": min(finite_ttc) if finite_ttc else None,
        "ttc_mean_s": float(np.mean(finite_ttc)) if finite_ttc else None,
        "ttc_max_s": max(finite_ttc) if finite_ttc else None,
        "mean_abs_rel_power_error": float(rel_err.mean()) if samples else None,
        "power_saving_fraction": n_saving / len(samples) if samples else None,
        "mean_f_cpu_mhz": float(np.mean([s.freqs.f_cpu for s in samples])) if samples else None,
        "mean_f_gpu_mhz": float(np.mean([s.freqs.f_gpu for s in samples])) if samples else None,
    }

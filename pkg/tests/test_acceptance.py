"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

 1. Embedded power anchors reproduced exactly; interpolation monotone.
 2. Halving the detection rate sheds board power 36.5 -> 26.8 W (+-1).
 3. Motor model: held-out R^2 >= 0.8, accuracy >= 90%, gradients match
    finite differences to 1e-4.
 4. End-to-end prediction: mean relative error <= 5% over 1000+ samples.
 5. Frustum overlap: exact identity/disjoint cases, Monte-Carlo agreement
    on 200 seeded pose pairs, symmetry and rigid-motion invariance.
 6. Frequency optimizer equals brute force and satisfies its constraint.
 7. Reachable-distance oracle equality; TTC/safe-time identities.
 8. Energy regression: PNAV <= 0.80 x SP and <= 0.95 x SP_UDVFS energy.
 9. Navigation guard: position error <= 1.25x SP, finish time <= 1.10x SP.
10. Determinism: identical runs produce byte-identical artifacts.
"""

import math
from itertools import product

import numpy as np
import pytest

from pnav.collision import (
    DelayCase,
    min_reachable_distance,
    pipeline_delay,
    safe_time,
    synthesize_profile,
    time_to_collision,
)
from pnav.coordinator import optimize_frequencies
from pnav.core import LaserScan, Pose
from pnav.locality import CameraIntrinsics, fov_overlap
from pnav.power import (
    BOARD_WATT_ANCHORS,
    CALIBRATION_CPU_MHZ,
    CPU_LEVELS_MHZ,
    GPU_LEVELS_MHZ,
    FrequencyConfig,
    calibrate_embedded_model,
    make_training_set,
    mse_loss_and_grads,
    predict_embedded_power,
    regression_metrics,
)
from pnav.sim import Policy, run_scenario

from test_collision import brute_force_reachable, full_circle_scan, random_scan
from test_coordinator import brute_force_optimum
from test_locality import SQUARE_FOV, monte_carlo_overlap
from conftest import corridor_spec

EMBEDDED = calibrate_embedded_model()
PROFILE = synthesize_profile()


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_01_embedded_anchors():
    worst = 0.0
    for f_gpu, watts in BOARD_WATT_ANCHORS:
        fc = FrequencyConfig(CALIBRATION_CPU_MHZ, f_gpu)
        worst = max(worst, abs(predict_embedded_power(EMBEDDED, fc, 6.0) - watts))
    mids = np.linspace(GPU_LEVELS_MHZ[0], GPU_LEVELS_MHZ[-1], 500)
    rail = [EMBEDDED.gpu_power(f) for f in mids]
    monotone = all(b >= a for a, b in zip(rail, rail[1:]))
    report(
        "criterion 1 (embedded anchors)",
        worst < 0.01 and monotone,
        f"max anchor residual {worst:.2e} W, interpolation monotone: {monotone}",
    )


def test_criterion_02_detection_duty():
    fc = FrequencyConfig(CPU_LEVELS_MHZ[-1], GPU_LEVELS_MHZ[-1])
    full = predict_embedded_power(EMBEDDED, fc, 6.0)
    half = predict_embedded_power(EMBEDDED, fc, 3.0)
    ok = abs(full - 36.5) <= 1.0 and abs(half - 26.8) <= 1.0
    report(
        "criterion 2 (detection duty)",
        ok,
        f"6 Hz -> {full:.2f} W (target 36.5 +- 1), 3 Hz -> {half:.2f} W (target 26.8 +- 1)",
    )


def test_criterion_03_motor_model(motor_model, motor_split):
    _, (X_test, y_test) = motor_split
    held = regression_metrics(y_test, motor_model.predict_batch(X_test))

    X_clean, y_clean = make_training_set(1000, seed=515, noise_frac=0.0)
    clean = regression_metrics(y_clean, motor_model.predict_batch(X_clean))

    # gradient check against central finite differences
    Xg, yg = make_training_set(256, seed=31)
    Xn = (Xg - motor_model.x_mean) / motor_model.x_std
    yn = (yg - motor_model.y_mean) / motor_model.y_std
    _, w_grads, b_grads = mse_loss_and_grads(motor_model, Xn, yn)
    rng = np.random.default_rng(12)
    eps, worst_rel = 1e-6, 0.0
    for _ in range(20):
        layer = int(rng.integers(len(motor_model.weights)))
        i = int(rng.integers(motor_model.weights[layer].shape[0]))
        j = int(rng.integers(motor_model.weights[layer].shape[1]))
        analytic = w_grads[layer][i, j]
        motor_model.weights[layer][i, j] += eps
        up = mse_loss_and_grads(motor_model, Xn, yn)[0]
        motor_model.weights[layer][i, j] -= 2 * eps
        down = mse_loss_and_grads(motor_model, Xn, yn)[0]
        motor_model.weights[layer][i, j] += eps
        numeric = (up - down) / (2 * eps)
        worst_rel = max(worst_rel, abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8))

    ok = held["r2"] >= 0.8 and clean["accuracy"] >= 0.90 and worst_rel <= 1e-4
    report(
        "criterion 3 (motor model)",
        ok,
        f"held-out R^2 {held['r2']:.4f} (>= 0.8), accuracy {clean['accuracy'] * 100:.1f}% "
        f"(>= 90%), gradient max rel err {worst_rel:.2e} (<= 1e-4)",
    )


def test_criterion_04_e2e_prediction(reference_runs):
    samples = reference_runs[Policy.SP].metrics + reference_runs[Policy.PNAV].metrics
    truth = np.array([s.total_w for s in samples])
    pred = np.array([s.predicted_total_w for s in samples])
    rel = np.abs(pred - truth) / truth
    ok = len(samples) >= 1000 and float(rel.mean()) <= 0.05
    report(
        "criterion 4 (e2e prediction)",
        ok,
        f"{len(samples)} samples, mean relative error {rel.mean() * 100:.2f}% (<= 5%)",
    )


def test_criterion_05_fov_overlap():
    p = Pose(0.4, -0.2, 0.3)
    identity_ok = fov_overlap(p, p, SQUARE_FOV) == 1.0
    disjoint_ok = all(
        fov_overlap(Pose(0, 0, 0), Pose(0, 0, SQUARE_FOV.fov_w + d), SQUARE_FOV) == 0.0
        for d in (0.0, 0.3)
    )

    rng = np.random.default_rng(2025)
    worst_mc = 0.0
    for _ in range(200):
        p1 = Pose(*rng.uniform(-1, 1, 2), rng.uniform(-math.pi, math.pi))
        p2 = Pose(
            p1.x + rng.uniform(-2, 2), p1.y + rng.uniform(-2, 2),
            p1.yaw + rng.uniform(-1.5, 1.5),
        )
        got = fov_overlap(p1, p2, SQUARE_FOV)
        want = monte_carlo_overlap(p1, p2, SQUARE_FOV, n=200_000, seed=int(rng.integers(1 << 31)))
        worst_mc = max(worst_mc, abs(got - want))

    worst_sym = worst_rigid = 0.0
    for _ in range(100):
        p1 = Pose(*rng.uniform(-1, 1, 2), rng.uniform(-math.pi, math.pi))
        p2 = Pose(*rng.uniform(-1, 1, 2), rng.uniform(-math.pi, math.pi))
        worst_kym = abs(fov_overlap(p1, p2, SQUARE_FOV) - fov_overlap(p2, p1, SQUARE_FOV))
        worst_sym = max(worst_sym, worst_kym)
        tx, ty, rot = rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi)
        c, s = math.cos(rot), math.sin(rot)
        moved = [
            Pose(c * q.x - s * q.y + tx, s * q.x + c * q.y + ty, q.yaw + rot) for q in (p1, p2)
        ]
        worst_rigid = max(
            worst_rigid,
            abs(fov_overlap(*moved, SQUARE_FOV) - fov_overlap(p1, p2, SQUARE_FOV)),
        )

    ok = identity_ok and disjoint_ok and worst_mc <= 0.02 and worst_sym <= 1e-9 and worst_rigid <= 1e-9
    report(
        "criterion 5 (FOV overlap)",
        ok,
        f"identity exact: {identity_ok}, disjoint exact: {disjoint_ok}, "
        f"MC max |err| {worst_mc:.4f} (<= 0.02), symmetry {worst_sym:.1e}, rigid {worst_rigid:.1e}",
    )


def test_criterion_06_frequency_optimizer():
    rng = np.random.default_rng(606)
    mismatches = 0
    violations = 0
    for _ in range(100):
        t_c = float(rng.uniform(0.2, 8.0)) if rng.random() > 0.1 else math.inf
        t_d = float(rng.uniform(0.5, 4.0))
        hz = float(rng.uniform(0.0, 6.0))
        got = optimize_frequencies(EMBEDDED, PROFILE, t_c, t_d, hz)
        if got != brute_force_optimum(t_c, t_d, hz):
            mismatches += 1
        feasible = any(
            t_c - pipeline_delay(PROFILE, FrequencyConfig(c, g), DelayCase.WORST) >= t_d
            for c, g in product(CPU_LEVELS_MHZ, GPU_LEVELS_MHZ)
        )
        if feasible and t_c - pipeline_delay(PROFILE, got, DelayCase.WORST) < t_d:
            violations += 1
    ok = mismatches == 0 and violations == 0
    report(
        "criterion 6 (frequency optimizer)",
        ok,
        f"100 instances: {mismatches} brute-force mismatches, {violations} constraint violations",
    )


def test_criterion_07_collision_predictor():
    rng = np.random.default_rng(707)
    mismatches = 0
    for _ in range(100):
        scan = random_scan(rng)
        vmax = float(rng.uniform(0.2, 1.0))
        wmax = float(rng.uniform(0.0, 1.5))
        got = min_reachable_distance(scan, vmax, wmax, horizon=2.0, samples=(5, 11))
        want = brute_force_reachable(scan, vmax, wmax, 2.0, (5, 11))
        if got != want:
            mismatches += 1

    identities = (
        time_to_collision(math.inf, 0.5) == math.inf
        and safe_time(math.inf, 0.4) == math.inf
        and time_to_collision(1.0, 0.5) == 2.0
        and safe_time(2.0, 0.15) == 2.0 - 0.15
        and time_to_collision(0.0, 0.5) == 0.0
        and safe_time(0.1, 0.2) == pytest.approx(-0.1)
    )
    clear = full_circle_scan([math.inf] * 16)
    clear_ok = min_reachable_distance(clear, 0.5, 1.0) == math.inf
    ok = mismatches == 0 and identities and bool(clear_ok)
    report(
        "criterion 7 (collision predictor)",
        ok,
        f"100 scans: {mismatches} oracle mismatches; algebraic identities incl. +inf: {identities}",
    )


def test_criterion_08_energy_regression(reference_runs):
    e_sp = reference_runs[Policy.SP].summary["total_energy_j"]
    e_spu = reference_runs[Policy.SP_UDVFS].summary["total_energy_j"]
    e_pnav = reference_runs[Policy.PNAV].summary["total_energy_j"]
    r_sp = e_pnav / e_sp
    r_spu = e_pnav / e_spu
    ok = r_sp <= 0.80 and r_spu <= 0.95
    report(
        "criterion 8 (energy regression)",
        ok,
        f"PNAV {e_pnav:.0f} J vs SP {e_sp:.0f} J (ratio {r_sp:.3f} <= 0.80) "
        f"and vs SP_UDVFS {e_spu:.0f} J (ratio {r_spu:.3f} <= 0.95)",
    )


def test_criterion_09_navigation_guard(reference_runs):
    sp = reference_runs[Policy.SP].summary
    pnav = reference_runs[Policy.PNAV].summary
    err_ratio = pnav["mean_position_error_m"] / sp["mean_position_error_m"]
    time_ratio = pnav["mean_finish_time_s"] / sp["mean_finish_time_s"]
    goals_ok = pnav["goals_reached"] == sp["goals_reached"] == 10
    ok = err_ratio <= 1.25 and time_ratio <= 1.10 and goals_ok
    report(
        "criterion 9 (navigation guard)",
        ok,
        f"position error ratio {err_ratio:.3f} (<= 1.25), "
        f"finish time ratio {time_ratio:.3f} (<= 1.10), goals {pnav['goals_reached']}/10",
    )


def test_criterion_10_determinism(calib, tmp_path):
    from pnav.cli import main, write_metrics_csv, write_json

    spec = corridor_spec(Policy.PNAV, seed=13, loops=1)
    blobs = []
    for name in ("one", "two"):
        result = run_scenario(spec, calib)
        csv = tmp_path / f"{name}.csv"
        js = tmp_path / f"{name}.json"
        write_metrics_csv(csv, result.metrics)
        write_json(js, result.summary)
        blobs.append((csv.read_bytes(), js.read_bytes()))
    run_ok = blobs[0] == blobs[1]

    rc_a = main(["calibrate", "--out", str(tmp_path / "ca"), "--samples", "2000", "--epochs", "300"])
    rc_b = main(["calibrate", "--out", str(tmp_path / "cb"), "--samples", "2000", "--epochs", "300"])
    import os

    calib_ok = rc_a == rc_b == 0 and all(
        (tmp_path / "ca" / n).read_bytes() == (tmp_path / "cb" / n).read_bytes()
        for n in os.listdir(tmp_path / "ca")
    )
    ok = run_ok and calib_ok
    report(
        "criterion 10 (determinism)",
        ok,
        f"scenario rerun byte-identical: {run_ok}, calibrate rerun byte-identical: {calib_ok}",
    )

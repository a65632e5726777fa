"""Command-line interface: calibrate models, run scenarios, compare policies.

Exit codes: 0 success, 1 runtime abort (e.g. unreachable goal), 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .collision import load_profile, save_profile, synthesize_profile
from .power import (
    calibrate_embedded_model,
    fit_plant,
    load_embedded_model,
    load_motor_model,
    load_plant,
    make_training_set,
    predict_embedded_power,
    regression_metrics,
    save_embedded_model,
    save_motor_model,
    save_plant,
    train_motor_model,
)
from .power.embedded import BOARD_WATT_ANCHORS, CALIBRATION_CPU_MHZ, FrequencyConfig
from .sim import (
    CalibrationBundle,
    MetricsSample,
    Policy,
    ScenarioAbort,
    ScenarioResult,
    parse_scenario,
    run_scenario,
)

CSV_HEADER = "# pnav-metrics v1"
CSV_COLUMNS = (
    "time_s,mode,f_cpu_mhz,f_gpu_mhz,motor_w,embedded_w,total_w,"
    "predicted_motor_w,predicted_total_w,position_error_m,orientation_error_rad,"
    "t_c_s,s_t_s"
)

PLANT_FILE = "motor_plant.txt"
MOTOR_MODEL_FILE = "motor_model.txt"
EMBEDDED_FILE = "embedded_model.txt"
TIMELINE_FILE = "timeline_profile.txt"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_metrics_csv(path, samples: list[MetricsSample]) -> None:
    lines = [CSV_HEADER, CSV_COLUMNS]
    for s in samples:
        lines.append(
            ",".join(
                (
                    _fmt(s.time_s),
                    s.mode.value,
                    str(s.freqs.f_cpu),
                    str(s.freqs.f_gpu),
                    _fmt(s.motor_w),
                    _fmt(s.embedded_w),
                    _fmt(s.total_w),
                    _fmt(s.predicted_motor_w),
                    _fmt(s.predicted_total_w),
                    _fmt(s.position_error_m),
                    _fmt(s.orientation_error_rad),
                    _fmt(s.t_c_s),
                    _fmt(s.s_t_s),
                )
            )
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_calibration(calib_dir) -> CalibrationBundle:
    paths = {name: os.path.join(calib_dir, name)
             for name in (PLANT_FILE, MOTOR_MODEL_FILE, EMBEDDED_FILE, TIMELINE_FILE)}
    missing = [p for p in paths.values() if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(
            f"calibration artifacts missing: {', '.join(missing)}; "
            f"run `pnav calibrate --out {calib_dir}` first"
        )
    return CalibrationBundle(
        plant=load_plant(paths[PLANT_FILE]),
        motor_model=load_motor_model(paths[MOTOR_MODEL_FILE]),
        embedded=load_embedded_model(paths[EMBEDDED_FILE]),
        profile=load_profile(paths[TIMELINE_FILE]),
    )


def cmd_calibrate(args) -> int:
    out_dir = args.out
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        print(f"error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return 1

    plant = fit_plant()
    save_plant(plant, os.path.join(out_dir, PLANT_FILE))

    embedded = calibrate_embedded_model()
    save_embedded_model(embedded, os.path.join(out_dir, EMBEDDED_FILE))
    print("embedded-model anchor residuals (W):")
    for f_gpu, watts in BOARD_WATT_ANCHORS:
        got = predict_embedded_power(embedded, FrequencyConfig(CALIBRATION_CPU_MHZ, f_gpu), 6.0)
        print(f"  {f_gpu:5d} MHz: board {watts:6.2f} predicted {got:9.5f} residual {got - watts:+.2e}")

    profile = synthesize_profile()
    save_profile(profile, os.path.join(out_dir, TIMELINE_FILE))

    X, y = make_training_set(args.samples, seed=args.seed, plant=plant)
    n_train = int(len(X) * 0.8)
    model = train_motor_model((X[:n_train], y[:n_train]), epochs=args.epochs, seed=args.seed)
    save_motor_model(model, os.path.join(out_dir, MOTOR_MODEL_FILE))
    held = regression_metrics(y[n_train:], model.predict_batch(X[n_train:]))
    print(
        f"motor model: {n_train} training rows, held-out R^2 {held['r2']:.4f}, "
        f"accuracy {held['accuracy'] * 100:.2f}%"
    )
    print(f"calibration artifacts written to {out_dir}")
    return 0


def cmd_run(args) -> int:
    calib = load_calibration(args.calib_dir)
    spec = parse_scenario(args.scenario, policy=Policy(args.policy), seed=args.seed)
    try:
        result = run_scenario(spec, calib)
    except ScenarioAbort as exc:
        print(f"scenario aborted: {exc}", file=sys.stderr)
        return 1
    write_metrics_csv(args.out, result.metrics)
    summary_path = args.summary or args.out + ".summary.json"
    write_json(summary_path, result.summary)
    s = result.summary
    print(
        f"{spec.policy.value}: {s['goals_reached']} goals in {s['sim_time_s']:.1f}s, "
        f"mean power {s['mean_power_w']:.2f} W, energy {s['total_energy_j']:.1f} J"
    )
    return 0


def _reduction(baseline: float, ours: float) -> float:
    return (baseline - ours) / baseline


def build_report(results: dict[str, ScenarioResult]) -> dict:
    report: dict = {"policies": sorted(results)}
    summaries = {name: r.summary for name, r in results.items()}
    report["summaries"] = summaries
    report["finish_times"] = {
        name: {
            "mean": s["mean_finish_time_s"],
            "min": min(s["finish_times_s"]) if s["finish_times_s"] else None,
            "max": max(s["finish_times_s"]) if s["finish_times_s"] else None,
        }
        for name, s in summaries.items()
    }
    report["errors"] = {
        name: {
            "position_m": s["mean_position_error_m"],
            "orientation_rad": s["mean_orientation_error_rad"],
        }
        for name, s in summaries.items()
    }
    report["ttc"] = {
        name: {"min": s["ttc_min_s"], "mean": s["ttc_mean_s"], "max": s["ttc_max_s"]}
        for name, s in summaries.items()
    }
    if Policy.PNAV.value in results:
        ours = summaries[Policy.PNAV.value]
        report["reductions_vs_pnav"] = {
            name: {
                "energy": _reduction(s["total_energy_j"], ours["total_energy_j"]),
                "mean_power": _reduction(s["mean_power_w"], ours["mean_power_w"]),
            }
            for name, s in summaries.items()
            if name != Policy.PNAV.value
        }
    return report


def cmd_compare(args) -> int:
    names = [p.strip() for p in args.policies.split(",") if p.strip()]
    if len(names) < 2:
        print("error: compare needs at least two policies", file=sys.stderr)
        return 2
    try:
        policies = [Policy(name) for name in names]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    calib = load_calibration(args.calib_dir)
    results: dict[str, ScenarioResult] = {}
    for policy in policies:
        spec = parse_scenario(args.scenario, policy=policy, seed=args.seed)
        try:
            result = run_scenario(spec, calib)
        except ScenarioAbort as exc:
            print(f"scenario aborted under {policy.value}: {exc}", file=sys.stderr)
            return 1
        results[policy.value] = result
        if args.csv_dir:
            os.makedirs(args.csv_dir, exist_ok=True)
            write_metrics_csv(
                os.path.join(args.csv_dir, f"metrics_{policy.value}.csv"), result.metrics
            )

    # all runs must share the identical world so differences are policy-only
    first = next(iter(results.values())).summary
    for r in results.values():
        s = r.summary
        assert (s["map"], s["start"], s["goals"], s["seed"]) == (
            first["map"], first["start"], first["goals"], first["seed"],
        )

    report = build_report(results)
    write_json(args.out, report)
    print(f"{'policy':12s} {'energy J':>10s} {'mean W':>8s} {'finish s':>9s} {'pos err m':>10s}")
    for name in names:
        s = results[name].summary
        print(
            f"{name:12s} {s['total_energy_j']:10.1f} {s['mean_power_w']:8.2f} "
            f"{s['mean_finish_time_s'] if s['mean_finish_time_s'] is not None else float('nan'):9.2f} "
            f"{s['mean_position_error_m']:10.4f}"
        )
    if "reductions_vs_pnav" in report:
        for base, red in sorted(report["reductions_vs_pnav"].items()):
            print(f"energy reduction vs {base}: {red['energy'] * 100:.1f}%")
    print(f"report written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnav",
        description="Power-aware navigation simulator and policy comparison harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="fit and write all model artifacts")
    cal.add_argument("--out", required=True, help="output directory for artifacts")
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--samples", type=int, default=10000, help="motor training rows")
    cal.add_argument("--epochs", type=int, default=2000)
    cal.set_defaults(func=cmd_calibrate)

    run = sub.add_parser("run", help="run one scenario under one policy")
    run.add_argument("--scenario", required=True)
    run.add_argument("--policy", required=True, choices=[p.value for p in Policy])
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", required=True, help="metrics CSV path")
    run.add_argument("--summary", default=None, help="summary JSON path")
    run.add_argument("--calib-dir", default="calibration")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run several policies on one scenario")
    cmp_.add_argument("--scenario", required=True)
    cmp_.add_argument("--policies", required=True, help="comma-separated policy names")
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--out", required=True, help="report JSON path")
    cmp_.add_argument("--csv-dir", default=None, help="also write per-policy metrics CSVs")
    cmp_.add_argument("--calib-dir", default="calibration")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Analytic motor-power plant: the ground truth the learned model is trained on.

The real robot's wheel currents are not available here, so an analytic plant
stands in. Its shape is idle draw + linear/quadratic terms in the commanded
speeds + surge terms for speed changes:

    P = c0 + c1*|v| + c2*v^2 + c3*|w| + c4*w^2 + c5*|v - v_prev| + c6*|w - w_prev|

The angular coefficients are solved exactly from two measured spin operating
points (92.1 W at 1.2 rad/s, 19.4 W at 0.4 rad/s); the linear coefficient from
a straight full-speed point (26 W at 0.5 m/s, the 2000 RPM mark) with the
quadratic share fixed. Idle draw is 2.0 W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Twist

# measured calibration anchors: (|w| rad/s, watts) spins and (v m/s, watts) straight
SPIN_ANCHORS = ((1.2, 92.1), (0.4, 19.4))
STRAIGHT_ANCHOR = (0.5, 26.0)
IDLE_WATTS = 2.0

# full motor speed 2000 RPM corresponds to the 0.5 m/s velocity cap
FULL_SPEED_MPS = 0.5


@dataclass(frozen=True)
class MotorCommandWindow:
    """Current and previous body velocity, the motor predictor's input."""

    current: Twist
    previous: Twist

    def features(self) -> tuple[float, float, float, float]:
        return (self.current.v, self.current.w, self.previous.v, self.previous.w)


@dataclass(frozen=True)
class MotorPlant:
    """Deterministic analytic motor power in watts."""

    idle: float
    lin: float
    lin_sq: float
    ang: float
    ang_sq: float
    lin_surge: float
    ang_surge: float

    def power(self, cmd: MotorCommandWindow) -> float:
        v, w = cmd.current.v, cmd.current.w
        return (
            self.idle
            + self.lin * abs(v)
            + self.lin_sq * v * v
            + self.ang * abs(w)
            + self.ang_sq * w * w
            + self.lin_surge * abs(v - cmd.previous.v)
            + self.ang_surge * abs(w - cmd.previous.w)
        )

    def power_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized power for rows of (v, w, v_prev, w_prev)."""
        X = np.asarray(X, dtype=float)
        v, w, pv, pw = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
        return (
            self.idle
            + self.lin * np.abs(v)
            + self.lin_sq * v * v
            + self.ang * np.abs(w)
            + self.ang_sq * w * w
            + self.lin_surge * np.abs(v - pv)
            + self.ang_surge * np.abs(w - pw)
        )

    # planner-facing predictor interface, shared with the learned model
    def predict(self, cmd: MotorCommandWindow) -> float:
        return self.power(cmd)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return self.power_batch(X)


def fit_plant(
    spin_anchors=SPIN_ANCHORS,
    straight_anchor=STRAIGHT_ANCHOR,
    idle: float = IDLE_WATTS,
    lin_sq: float = 16.0,
    lin_surge: float = 10.0,
    ang_surge: float = 5.0,
) -> MotorPlant:
    """Solve the plant coefficients exactly from the calibration anchors.

    Two spin anchors pin (c3, c4) via a 2x2 solve; the straight anchor pins c1
    once the quadratic share c2 is fixed. The surge coefficients are free
    (no anchor constrains transients) and default to mild values.
    """
    (w1, p1), (w2, p2) = spin_anchors
    det = w1 * w2 * w2 - w2 * w1 * w1
    if abs(det) < 1e-12:
        raise ValueError("spin anchors must have distinct angular speeds")
    r1, r2 = p1 - idle, p2 - idle
    ang = (r1 * w2 * w2 - r2 * w1 * w1) / det
    ang_sq = (r2 * w1 - r1 * w2) / det
    vs, ps = straight_anchor
    if vs <= 0:
        raise ValueError("straight anchor speed must be positive")
    lin = (ps - idle - lin_sq * vs * vs) / vs
    plant = MotorPlant(idle, lin, lin_sq, ang, ang_sq, lin_surge, ang_surge)
    for c in (plant.lin, plant.ang, plant.ang_sq):
        if c < 0:
            raise ValueError(f"calibration produced a negative coefficient: {plant}")
    return plant


def steady(v: float, w: float) -> MotorCommandWindow:
    """Command window for an unchanged velocity (no surge terms)."""
    t = Twist(v, w)
    return MotorCommandWindow(t, t)


PLANT_HEADER = "pnav-motor-plant v1"

_PLANT_FIELDS = ("idle", "lin", "lin_sq", "ang", "ang_sq", "lin_surge", "ang_surge")


def save_plant(plant: MotorPlant, path) -> None:
    lines = [PLANT_HEADER]
    lines += [f"{name} = {getattr(plant, name)!r}" for name in _PLANT_FIELDS]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_plant(path) -> MotorPlant:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != PLANT_HEADER:
        raise ValueError(f"{path}: not a motor plant file (missing '{PLANT_HEADER}')")
    values = {}
    for ln in lines[1:]:
        key, _, val = ln.partition("=")
        values[key.strip()] = float(val)
    return MotorPlant(**{name: values[name] for name in _PLANT_FIELDS})


def plant_motor_power(cmd: MotorCommandWindow, plant: MotorPlant | None = None) -> float:
    """Ground-truth motor watts for a command window."""
    return (plant or fit_plant()).power(cmd)


def make_training_set(
    n: int,
    seed: int,
    plant: MotorPlant | None = None,
    vmax: float = FULL_SPEED_MPS,
    wmax: float = 1.2,
    noise_frac: float = 0.02,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample command windows and noisy plant targets.

    60% of rows are uniform over the command domain with small step-to-step
    deltas, 10% steady-state commands, 5% near-idle commands, and 25% exact
    stops. The heavy stop share mirrors how much time the robot actually
    spends parked and pins the idle corner, where the |v| and |w| kinks would
    otherwise let a smooth net drift. Gaussian noise has sigma = noise_frac of
    each signal; targets are floored at zero.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    plant = plant or fit_plant()
    rng = np.random.default_rng(seed)
    n_uniform = int(n * 0.6)
    n_steady = int(n * 0.1)
    n_stopped = max(1, int(n * 0.25))
    n_idle = n - n_uniform - n_steady - n_stopped

    v = rng.uniform(0.0, vmax, n_uniform)
    w = rng.uniform(-wmax, wmax, n_uniform)
    pv = np.clip(v + rng.uniform(-0.1, 0.1, n_uniform), 0.0, vmax)
    pw = np.clip(w + rng.uniform(-0.3, 0.3, n_uniform), -wmax, wmax)
    moving = np.stack([v, w, pv, pw], axis=1)

    v = rng.uniform(0.0, vmax, n_steady)
    w = rng.uniform(-wmax, wmax, n_steady)
    steady_rows = np.stack([v, w, v, w], axis=1)

    v = rng.uniform(0.0, 0.08, n_idle)
    w = rng.uniform(-0.15, 0.15, n_idle)
    pv = np.clip(v + rng.uniform(-0.04, 0.04, n_idle), 0.0, vmax)
    pw = np.clip(w + rng.uniform(-0.1, 0.1, n_idle), -wmax, wmax)
    idle_rows = np.stack([v, w, pv, pw], axis=1)

    stopped_rows = np.zeros((n_stopped, 4))

    X = np.concatenate([moving, steady_rows, idle_rows, stopped_rows])[:n]
    X = X[rng.permutation(len(X))]  # interleave the strata so any split is fair
    y = plant.power_batch(X)
    if noise_frac > 0:
        y = np.maximum(0.0, y + rng.normal(0.0, noise_frac * y))
    return X, y

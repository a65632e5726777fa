"""Shared fixtures: calibration artifacts and the reference corridor scenario."""

import os

import numpy as np
import pytest

from pnav.collision import synthesize_profile
from pnav.core import OccupancyGrid
from pnav.power import (
    calibrate_embedded_model,
    fit_plant,
    make_training_set,
    train_motor_model,
)
from pnav.sim import CalibrationBundle, Policy, parse_scenario, run_scenario

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORRIDOR_SCN = os.path.join(REPO_ROOT, "scenarios", "corridor.scn")
CORRIDOR_MAP = os.path.join(REPO_ROOT, "scenarios", "corridor.map")


@pytest.fixture(scope="session")
def plant():
    return fit_plant()


@pytest.fixture(scope="session")
def motor_dataset(plant):
    return make_training_set(10000, seed=42, plant=plant)


@pytest.fixture(scope="session")
def motor_split(motor_dataset):
    X, y = motor_dataset
    n_train = int(len(X) * 0.8)
    return (X[:n_train], y[:n_train]), (X[n_train:], y[n_train:])


@pytest.fixture(scope="session")
def motor_model(motor_split):
    train, _ = motor_split
    return train_motor_model(train, seed=0)


@pytest.fixture(scope="session")
def calib(plant, motor_model):
    return CalibrationBundle(
        plant=plant,
        motor_model=motor_model,
        embedded=calibrate_embedded_model(),
        profile=synthesize_profile(),
    )


@pytest.fixture(scope="session")
def corridor_grid():
    return OccupancyGrid.load(CORRIDOR_MAP)


def corridor_spec(policy: Policy, seed: int = 7, loops: int | None = None):
    spec = parse_scenario(CORRIDOR_SCN, policy=policy, seed=seed)
    if loops is not None:
        from dataclasses import replace

        spec = replace(spec, loops=loops)
    return spec


@pytest.fixture(scope="session")
def reference_runs(calib):
    """The three 5-loop reference runs shared by the end-to-end criteria."""
    return {
        policy: run_scenario(corridor_spec(policy), calib)
        for policy in (Policy.SP, Policy.SP_UDVFS, Policy.PNAV)
    }

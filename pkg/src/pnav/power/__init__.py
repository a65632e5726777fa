"""Power prediction: motor plant, learned motor model, and embedded-board model."""

from .embedded import (
    BOARD_WATT_ANCHORS,
    CALIBRATION_CPU_MHZ,
    CPU_LEVELS_MHZ,
    DUTY_REFERENCE_HZ,
    GPU_LEVELS_MHZ,
    MAX_FREQUENCIES,
    MIN_FREQUENCIES,
    EmbeddedPowerModel,
    FrequencyConfig,
    PowerBreakdown,
    calibrate_embedded_model,
    detection_duty,
    load_embedded_model,
    predict_embedded_power,
    predict_total_power,
    save_embedded_model,
)
from .mlp import (
    MotorPowerModel,
    TrainingDivergedError,
    load_motor_model,
    mse_loss_and_grads,
    predict_motor_power,
    regression_metrics,
    save_motor_model,
    train_motor_model,
)
from .plant import (
    FULL_SPEED_MPS,
    MotorCommandWindow,
    MotorPlant,
    fit_plant,
    load_plant,
    make_training_set,
    plant_motor_power,
    save_plant,
    steady,
)

__all__ = [
    "BOARD_WATT_ANCHORS",
    "CALIBRATION_CPU_MHZ",
    "CPU_LEVELS_MHZ",
    "DUTY_REFERENCE_HZ",
    "GPU_LEVELS_MHZ",
    "MAX_FREQUENCIES",
    "MIN_FREQUENCIES",
    "EmbeddedPowerModel",
    "FrequencyConfig",
    "PowerBreakdown",
    "calibrate_embedded_model",
    "detection_duty",
    "load_embedded_model",
    "predict_embedded_power",
    "predict_total_power",
    "save_embedded_model",
    "MotorPowerModel",
    "TrainingDivergedError",
    "load_motor_model",
    "mse_loss_and_grads",
    "predict_motor_power",
    "regression_metrics",
    "save_motor_model",
    "train_motor_model",
    "FULL_SPEED_MPS",
    "MotorCommandWindow",
    "MotorPlant",
    "fit_plant",
    "load_plant",
    "make_training_set",
    "plant_motor_power",
    "save_plant",
    "steady",
]

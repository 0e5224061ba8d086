"""Python access to the yoto loss-weighting core."""

import json

from ._yoto import (
    ConfigError,
    DivergenceError,
    HPState,
    NumericalError,
    OptimizerConfig,
    OptimizerKind,
    ParamState,
    PreconditionError,
    ScheduleKind,
    adamw_yoto_step,
    central_fd,
    composite_loss,
    hp_gradient_empirical,
    init_hp_state,
    naive_exp_gradient,
    regularizer_gradient,
    regularizer_value,
    schedule_multiplier,
    sgdw_yoto_step,
    softmax_weights,
)
from . import _yoto


def gradcheck(trials=100, tol=1e-6, model_trials=50, model_tol=1e-5, seed=0):
    return json.loads(_yoto._gradcheck_json(trials, tol, model_trials, model_tol, seed))


def run_training(config_text, seed=0, overrides=()):
    """Train once from config text; returns the run summary with its trajectory."""
    return json.loads(_yoto._run_training_json(config_text, seed, list(overrides)))


def run_grid(config_text, overrides=()):
    return json.loads(_yoto._grid_json(config_text, list(overrides)))


def run_seed_study(config_text, overrides=()):
    return json.loads(_yoto._seed_study_json(config_text, list(overrides)))

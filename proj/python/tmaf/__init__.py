"""Trainable matrix activation functions.

Thin Python layer over the native ``_tmaf`` extension. Configs are plain
dicts (or JSON strings) with the same layout the ``tmaf`` command-line tool
reads.
"""

import json as _json

from ._tmaf import (
    Activation,
    ConfigError,
    DimensionError,
    IdxError,
    ModelFormatError,
    Network,
    NumericError,
    StepFunction,
    TmafError,
    check_gradients,
    cross_entropy_loss,
    diag_tmaf,
    gaussian_decile_breakpoints,
    leaky_relu,
    load_mnist,
    mse_loss,
    prelu,
    relu,
    top1_accuracy,
    tridiag_tmaf,
    uniform_grid_breakpoints,
)
from . import _tmaf

__all__ = [
    "Activation",
    "ConfigError",
    "DimensionError",
    "IdxError",
    "ModelFormatError",
    "Network",
    "NumericError",
    "StepFunction",
    "TmafError",
    "check_gradients",
    "cross_entropy_loss",
    "default_config",
    "diag_tmaf",
    "evaluate",
    "gaussian_decile_breakpoints",
    "gradcheck",
    "leaky_relu",
    "load_mnist",
    "mse_loss",
    "prelu",
    "relu",
    "resolve_config",
    "top1_accuracy",
    "train",
    "tridiag_tmaf",
    "uniform_grid_breakpoints",
]


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def default_config(experiment):
    """Default config for ``sine``, ``oscillatory``, ``mnist`` or ``custom-csv``."""
    return _json.loads(_tmaf.default_config(experiment))


def resolve_config(config):
    """Validate a config and return it with every default filled in."""
    return _json.loads(_tmaf.resolve_config(_as_json(config)))


def train(config):
    """Train per ``config``; writes metrics.csv, model.bin and the resolved config
    to its output directory and returns one dict per epoch."""
    return _tmaf.train(_as_json(config))


def evaluate(model_path, config, train_split=False):
    return _tmaf.evaluate(model_path, _as_json(config), train_split)


def gradcheck(config, tolerance=1e-6):
    return _tmaf.gradcheck(_as_json(config), tolerance)

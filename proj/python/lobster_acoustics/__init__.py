"""Lobster bioacoustic classification: Python access to the native core."""

import json as _json

from . import _core
from ._core import (
    ConvergenceError,
    DataError,
    LobsterError,
    Model,
    ValidationError,
    bandpass,
    benjamini_hochberg,
    mfcc,
    pca,
    pooled_mfcc,
    roc_auc,
)

__all__ = [
    "ConvergenceError", "DataError", "LobsterError", "Model", "ValidationError",
    "bandpass", "benjamini_hochberg", "bootstrap_auc_diff", "calibration", "confusion_and_rates",
    "default_config", "fit_model", "mcnemar", "mfcc", "pca", "pooled_mfcc", "reproduce_ranks",
    "roc_auc", "run_pipeline", "synthetic_dataset", "validate_config",
]


def synthetic_dataset(spec=None):
    return _core.synthetic_dataset(_json.dumps(spec) if spec else "")


def fit_model(family, params, X, y, seed=0, pca_components=0, standardize=True):
    return _core.fit_model(family, _json.dumps(params or {}), X, list(y), seed, pca_components, standardize)


def confusion_and_rates(y_true, y_pred, positive=1):
    return _json.loads(_core.confusion_and_rates(list(y_true), list(y_pred), positive))


def mcnemar(pred_a, pred_b, y_true):
    return _json.loads(_core.mcnemar(list(pred_a), list(pred_b), list(y_true)))


def bootstrap_auc_diff(scores_a, scores_b, y_true, n_boot=2000, seed=0):
    return _json.loads(_core.bootstrap_auc_diff(list(scores_a), list(scores_b), list(y_true), n_boot, seed))


def calibration(p, y_true, n_bins=10):
    return _json.loads(_core.calibration(list(p), list(y_true), n_bins))


def reproduce_ranks(fixtures, tie_rule="midrank_floor"):
    return _json.loads(_core.reproduce_ranks(str(fixtures), tie_rule))


def default_config():
    return _json.loads(_core.default_config())


def validate_config(config):
    return _json.loads(_core.validate_config(_json.dumps(config)))


def run_pipeline(config):
    return _json.loads(_core.run_pipeline(_json.dumps(config)))

import math
import os
from pathlib import Path

import numpy as np
import pytest

import lobster_acoustics as la

SOURCE = Path(os.environ.get("LOBSTER_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_mfcc_shapes_and_silence():
    frames = np.asarray(la.mfcc([0.0] * 22050, n_mfcc=40))
    assert frames.shape == (1 + (22050 - 2048) // 512, 40)
    assert frames[0, 0] == pytest.approx(math.sqrt(128) * math.log(1e-10), rel=1e-9)
    pooled = np.asarray(la.pooled_mfcc([0.0] * 22050, n_mfcc=50))
    assert pooled.shape == (50,)


def test_metrics():
    rates = la.confusion_and_rates([1, 1, 0, 0], [1, 0, 0, 1])
    assert rates["accuracy"] == pytest.approx(50.0)
    assert la.roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == pytest.approx(75.0)
    result = la.mcnemar([1] * 6 + [0] * 4, [0] * 6 + [0] * 4, [1] * 6 + [0] * 4)
    assert result["p_value"] == pytest.approx(0.03125)
    assert la.benjamini_hochberg([0.01, 0.02, 0.03, 0.04]) == pytest.approx([0.04] * 4)


def test_fit_and_predict():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-2, 1, (30, 3)), rng.normal(2, 1, (30, 3))])
    y = [0] * 30 + [1] * 30
    model = la.fit_model("knn", {"n_neighbors": 3}, X, y)
    proba = np.asarray(model.predict_proba(X))
    assert proba.shape == (60, 2)
    assert np.allclose(proba.sum(axis=1), 1.0)
    assert (np.asarray(model.predict(X)) == np.asarray(y)).mean() > 0.9


def test_pca_tev():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(50, 6))
    projected, components, ratio, tev = la.pca(X, 6)
    assert np.asarray(projected).shape == (50, 6)
    assert tev == pytest.approx(1.0)


def test_reproduce_ranks_fixtures():
    out = la.reproduce_ranks(SOURCE / "fixtures")
    assert out["mismatches"] == []
    assert set(out["tables"]) >= {"ml_avj", "ml_mf"}


def test_validation_error_maps():
    with pytest.raises(la.ValidationError):
        la.validate_config({"bogus": 1})
    assert issubclass(la.ValidationError, la.LobsterError)


def test_synthetic_dataset_labels():
    spec = {"n_per_class": 2}
    segs = la.synthetic_dataset(spec)
    assert len(segs) > 0
    assert {s["age"] for s in segs} <= {"adult", "juvenile"}
    assert all(len(s["samples"]) == s["sample_rate"] for s in segs)

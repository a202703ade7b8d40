import json

import numpy as np
import pytest

from rontrojan.classifiers import TieBreak, build_ensemble, gnb_train, knn_train, svm_train
from rontrojan.classifiers.serialize import dumps_model, load_model, loads_model, save_model
from rontrojan.dataset import apply_scaler, fit_scaler, split_by_chip


@pytest.fixture(scope="module")
def fitted(default_corpus):
    train, test = split_by_chip(default_corpus, 12, seed=1)
    scaler = fit_scaler(train)
    z = apply_scaler(scaler, train)
    models = {
        "knn": knn_train(z, 2),
        "svm": svm_train(z, 1.0, 0.1, "balanced", tie_break=TieBreak.PREFER_NEGATIVE),
        "gnb": gnb_train(z),
    }
    models["ensemble"] = build_ensemble(list(models.values()), TieBreak.PREFER_NEGATIVE)
    return models, scaler, scaler.transform(test.features)


@pytest.mark.parametrize("kind", ["knn", "svm", "gnb", "ensemble"])
def test_round_trip_is_bit_exact(fitted, tmp_path, kind):
    models, scaler, X = fitted
    model = models[kind]
    path = tmp_path / f"{kind}.json"
    save_model(path, model, scaler)
    again, scaler2 = load_model(path)
    assert scaler2 == scaler
    assert np.array_equal(again.score(X), model.score(X))
    assert np.array_equal(again.predict(X), model.predict(X))
    if kind != "knn":
        assert again.tie_break is model.tie_break


def test_document_is_versioned(fitted):
    models, _, _ = fitted
    doc = json.loads(dumps_model(models["gnb"]))
    assert doc["format"] == "rontrojan-model" and doc["version"] == 1
    assert "scaler" not in doc
    assert loads_model(dumps_model(models["gnb"]))[1] is None


def test_rejects_foreign_documents(fitted):
    models, _, _ = fitted
    doc = json.loads(dumps_model(models["knn"]))
    doc["version"] = 99
    with pytest.raises(ValueError, match="version"):
        loads_model(json.dumps(doc))
    with pytest.raises(ValueError):
        loads_model(json.dumps({"format": "other"}))
    doc["version"] = 1
    doc["model"]["kind"] = "forest"
    with pytest.raises(ValueError, match="forest"):
        loads_model(json.dumps(doc))

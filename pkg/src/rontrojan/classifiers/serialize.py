"""Versioned JSON documents for trained models (optionally bundled with a scaler).

Floats are written with ``repr`` precision, so decision values after a
round trip are bit-identical.
"""

from __future__ import annotations

import json
import os

import numpy as np

from rontrojan._io import atomic_write_text
from rontrojan.classifiers.base import TieBreak
from rontrojan.classifiers.ensemble import TrainedEnsemble
from rontrojan.classifiers.gnb import TrainedGnb
from rontrojan.classifiers.knn import TrainedKnn
from rontrojan.classifiers.svm import TrainedSvm
from rontrojan.dataset import Scaler

FORMAT = "rontrojan-model"
VERSION = 1


def _arr(a) -> list:
    return np.asarray(a).tolist()


def model_to_dict(model) -> dict:
    if isinstance(model, TrainedKnn):
        return {"kind": "knn", "k": model.k, "points": _arr(model.points),
                "labels": _arr(model.labels)}
    if isinstance(model, TrainedSvm):
        return {
            "kind": "svm",
            "gamma": model.gamma,
            "c_neg": model.c_neg,
            "c_pos": model.c_pos,
            "bias": model.bias,
            "tie_break": model.tie_break.value,
            "support_vectors": _arr(model.support_vectors),
            "dual_coef": _arr(model.dual_coef),
            "sv_labels": _arr(model.sv_labels),
            "n_features": model.n_features,
        }
    if isinstance(model, TrainedGnb):
        return {
            "kind": "gnb",
            "priors": _arr(model.priors),
            "means": _arr(model.means),
            "variances": _arr(model.variances),
            "var_floor": model.var_floor,
            "tie_break": model.tie_break.value,
        }
    if isinstance(model, TrainedEnsemble):
        return {
            "kind": "ensemble",
            "tie_break": model.tie_break.value,
            "members": [model_to_dict(m) for m in model.members],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _frozen(values, dtype=float, shape=None) -> np.ndarray:
    a = np.array(values, dtype=dtype)
    if shape is not None:
        a = a.reshape(shape)
    a.setflags(write=False)
    return a


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "knn":
        return TrainedKnn(int(d["k"]), _frozen(d["points"]), _frozen(d["labels"], np.int64))
    if kind == "svm":
        n_features = int(d["n_features"])
        return TrainedSvm(
            support_vectors=_frozen(d["support_vectors"], shape=(-1, n_features)),
            dual_coef=_frozen(d["dual_coef"]),
            sv_labels=_frozen(d["sv_labels"]),
            bias=float(d["bias"]),
            gamma=float(d["gamma"]),
            c_neg=float(d["c_neg"]),
            c_pos=float(d["c_pos"]),
            tie_break=TieBreak.parse(d["tie_break"]),
        )
    if kind == "gnb":
        return TrainedGnb(
            _frozen(d["priors"]),
            _frozen(d["means"]),
            _frozen(d["variances"]),
            var_floor=float(d["var_floor"]),
            tie_break=TieBreak.parse(d["tie_break"]),
        )
    if kind == "ensemble":
        return TrainedEnsemble(
            tuple(model_from_dict(m) for m in d["members"]),
            TieBreak.parse(d["tie_break"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def dumps_model(model, scaler: Scaler | None = None) -> str:
    doc = {"format": FORMAT, "version": VERSION, "model": model_to_dict(model)}
    if scaler is not None:
        doc["scaler"] = scaler.to_dict()
    return json.dumps(doc, indent=1) + "\n"


def loads_model(text: str):
    """Parse a model document; returns ``(model, scaler_or_None)``."""
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')!r}")
    scaler = Scaler.from_dict(doc["scaler"]) if "scaler" in doc else None
    return model_from_dict(doc["model"]), scaler


def save_model(path: str | os.PathLike, model, scaler: Scaler | None = None) -> None:
    atomic_write_text(path, dumps_model(model, scaler))


def load_model(path: str | os.PathLike):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())

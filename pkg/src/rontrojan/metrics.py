"""Confusion counts and the TPR/TNR/FPR/FNR/accuracy rates (Trojan = positive).

A rate whose denominator is zero is reported as 1.0 (its complement as
0.0) and named in ``RateMetrics.degenerate`` so it can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rontrojan.dataset import GOLDEN, TROJAN


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class RateMetrics:
    tpr: float
    tnr: float
    fpr: float
    fnr: float
    accuracy: float
    degenerate: tuple[str, ...] = ()

    def summary(self) -> str:
        return f"FPR {self.fpr:.3f} / Accuracy {self.accuracy:.3f}"

    def as_dict(self) -> dict[str, float]:
        return {"tpr": self.tpr, "tnr": self.tnr, "fpr": self.fpr,
                "fnr": self.fnr, "accuracy": self.accuracy}


def _label_array(values, name: str) -> np.ndarray:
    a = np.asarray(values)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all((a == GOLDEN) | (a == TROJAN)):
        raise ValueError(f"{name} must contain only -1/+1 labels")
    return a


def confusion(predictions, truth) -> ConfusionCounts:
    pred = _label_array(predictions, "predictions")
    true = _label_array(truth, "truth")
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions vs {true.shape[0]} labels")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction set")
    pos_pred = pred == TROJAN
    pos_true = true == TROJAN
    return ConfusionCounts(
        tp=int(np.sum(pos_pred & pos_true)),
        tn=int(np.sum(~pos_pred & ~pos_true)),
        fp=int(np.sum(pos_pred & ~pos_true)),
        fn=int(np.sum(~pos_pred & pos_true)),
    )


def rates(counts: ConfusionCounts) -> RateMetrics:
    total = counts.total
    if total == 0:
        raise ValueError("rates of an empty confusion table are undefined")
    degenerate = []
    pos = counts.tp + counts.fn
    neg = counts.tn + counts.fp
    if pos:
        tpr = counts.tp / pos
        fnr = counts.fn / pos
    else:
        tpr, fnr = 1.0, 0.0
        degenerate.append("no_positives")
    if neg:
        tnr = counts.tn / neg
        fpr = counts.fp / neg
    else:
        tnr, fpr = 1.0, 0.0
        degenerate.append("no_negatives")
    accuracy = (counts.tp + counts.tn) / total
    return RateMetrics(tpr, tnr, fpr, fnr, accuracy, tuple(degenerate))


def mean_rates(items) -> RateMetrics:
    """Unweighted mean of several RateMetrics; degenerate flags are unioned."""
    items = list(items)
    if not items:
        raise ValueError("no metrics to average")
    keys = ("tpr", "tnr", "fpr", "fnr", "accuracy")
    means = {k: float(np.mean([getattr(m, k) for m in items])) for k in keys}
    flags = sorted({f for m in items for f in m.degenerate})
    return RateMetrics(**means, degenerate=tuple(flags))

from __future__ import annotations

import math
from collections.abc import Sequence
from enum import Enum

import numpy as np

from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset


class TieBreak(str, Enum):
    """Label for an exact tie (SVM decision 0, GNB posterior 0.5, split 2-member vote)."""

    PREFER_POSITIVE = "prefer-positive"
    PREFER_NEGATIVE = "prefer-negative"

    @property
    def label(self) -> int:
        return TROJAN if self is TieBreak.PREFER_POSITIVE else GOLDEN

    @classmethod
    def parse(cls, value: str | TieBreak) -> TieBreak:
        if isinstance(value, TieBreak):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        if key in ("preferpositive", "positive"):
            return cls.PREFER_POSITIVE
        if key in ("prefernegative", "negative"):
            return cls.PREFER_NEGATIVE
        valid = ", ".join(t.value for t in cls)
        raise ValueError(f"unknown tie-break {value!r}; expected one of {valid}")


def sign_with_tie(values: np.ndarray, tie_break: TieBreak) -> np.ndarray:
    """Map real scores to ±1 labels, sending exact zeros to the tie-break label."""
    values = np.asarray(values, dtype=float)
    out = np.where(values > 0, TROJAN, GOLDEN).astype(np.int64)
    out[values == 0] = tie_break.label
    return out


def as_arrays(train: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(train.features, dtype=float), np.asarray(train.labels, dtype=np.int64)


def check_queries(X, n_features: int) -> np.ndarray:
    """Coerce to a 2-D query batch and check its width."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(
            f"dimension mismatch: model expects {n_features} features, got shape {X.shape}"
        )
    return X


def check_point(x, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n_features:
        raise ValueError(
            f"dimension mismatch: model expects {n_features} features, got shape {x.shape}"
        )
    return x


def euclidean_distance(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return math.sqrt(float(np.sum((x - y) ** 2)))


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact pairwise squared Euclidean distances (difference form, no Gram expansion)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, 2_000_000 // max(1, B.shape[0] * A.shape[1]))
    for start in range(0, A.shape[0], step):
        diff = A[start:start + step, None, :] - B[None, :, :]
        out[start:start + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out

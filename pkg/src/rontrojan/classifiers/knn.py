"""Brute-force k-nearest-neighbours with a deterministic even-k tie rule.

Neighbours are ordered by (Euclidean distance, training index). A split vote
is won by the class of the single nearest neighbour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rontrojan.classifiers.base import as_arrays, check_point, check_queries, squared_distances
from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset


@dataclass(frozen=True, eq=False)
class TrainedKnn:
    k: int
    points: np.ndarray
    labels: np.ndarray

    kind = "knn"

    def __post_init__(self):
        n = self.points.shape[0]
        if not 1 <= self.k <= n:
            raise ValueError(f"k must be in [1, {n}], got {self.k}")

    @property
    def n_features(self) -> int:
        return self.points.shape[1]

    def neighbor_order(self, X) -> np.ndarray:
        X = check_queries(X, self.n_features)
        d2 = squared_distances(X, self.points)
        return np.argsort(d2, axis=1, kind="stable")

    def predict(self, X) -> np.ndarray:
        order = self.neighbor_order(X)
        return vote(self.labels[order[:, : self.k]])

    def score(self, X) -> np.ndarray:
        """Fraction of Trojan votes among the k neighbours."""
        order = self.neighbor_order(X)
        return np.mean(self.labels[order[:, : self.k]] == TROJAN, axis=1)


def vote(neighbor_labels: np.ndarray) -> np.ndarray:
    """Majority of ±1 labels per row; columns are ordered nearest first."""
    neighbor_labels = np.atleast_2d(neighbor_labels)
    total = neighbor_labels.sum(axis=1)
    out = np.where(total > 0, TROJAN, GOLDEN).astype(np.int64)
    split = total == 0
    out[split] = neighbor_labels[split, 0]
    return out


def vote_all_k(neighbor_labels: np.ndarray, k_max: int) -> np.ndarray:
    """Predictions for every k in ``1..k_max`` at once, shape ``(k_max, n_queries)``."""
    running = np.cumsum(neighbor_labels[:, :k_max], axis=1).T
    out = np.where(running > 0, TROJAN, GOLDEN).astype(np.int64)
    nearest = np.broadcast_to(neighbor_labels[:, 0], out.shape)
    split = running == 0
    out[split] = nearest[split]
    return out


def knn_fit(X, y, k: int) -> TrainedKnn:
    X = np.array(X, dtype=float)
    y = np.array(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, d) and y must be (n,)")
    X.setflags(write=False)
    y.setflags(write=False)
    return TrainedKnn(int(k), X, y)


def knn_train(train: LabeledDataset, k: int) -> TrainedKnn:
    """Store the (already standardized) training points; KNN is lazy."""
    if isinstance(k, bool) or int(k) != k:
        raise ValueError(f"k must be an integer, got {k!r}")
    return knn_fit(*as_arrays(train), int(k))


def knn_classify(model: TrainedKnn, query) -> int:
    query = check_point(query, model.n_features)
    return int(model.predict(query[None, :])[0])

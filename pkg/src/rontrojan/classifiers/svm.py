"""RBF-kernel soft-margin SVM trained in the dual by SMO."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rontrojan.classifiers._smo import dual_objective, smo_solve
from rontrojan.classifiers.base import (
    TieBreak,
    as_arrays,
    check_point,
    check_queries,
    sign_with_tie,
    squared_distances,
)
from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset
from rontrojan.errors import ConvergenceError

DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 10_000


def rbf_kernel(x, y, gamma: float) -> float:
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return math.exp(-gamma * float(np.sum((x - y) ** 2)))


def rbf_matrix(A, B, gamma: float) -> np.ndarray:
    return np.exp(-gamma * squared_distances(A, B))


def balanced_class_weights(y) -> tuple[float, float]:
    """Inverse-frequency multipliers ``(w_golden, w_trojan) = n / (2 n_k)``."""
    y = np.asarray(y)
    n = y.shape[0]
    n_neg = int(np.sum(y == GOLDEN))
    n_pos = int(np.sum(y == TROJAN))
    if n_neg == 0 or n_pos == 0:
        raise ValueError("both classes are required to balance class weights")
    return n / (2.0 * n_neg), n / (2.0 * n_pos)


@dataclass(frozen=True, eq=False)
class TrainedSvm:
    """Fitted RBF SVM. ``decision(x) = sum_i dual_coef_i * sv_labels_i * k(sv_i, x) + bias``.

    ``alpha`` keeps the multiplier of every training point when the model
    came out of training; it is ``None`` for deserialized models.
    """

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    sv_labels: np.ndarray
    bias: float
    gamma: float
    c_neg: float
    c_pos: float
    tie_break: TieBreak = TieBreak.PREFER_POSITIVE
    alpha: np.ndarray | None = None
    n_iter: int = 0
    kkt_gap: float = 0.0

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = check_queries(X, self.n_features)
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], float(self.bias))
        K = rbf_matrix(X, self.support_vectors, self.gamma)
        return K @ (self.dual_coef * self.sv_labels) + self.bias

    def predict(self, X) -> np.ndarray:
        return sign_with_tie(self.decision(X), self.tie_break)

    score = decision


def _resolve_weights(y, class_weights) -> tuple[float, float]:
    if class_weights is None:
        return 1.0, 1.0
    if isinstance(class_weights, str):
        if class_weights != "balanced":
            raise ValueError(f"unknown class_weights {class_weights!r}")
        return balanced_class_weights(y)
    w_neg, w_pos = (float(w) for w in class_weights)
    if not (w_neg > 0 and w_pos > 0):
        raise ValueError("class weights must be positive")
    return w_neg, w_pos


def svm_fit(
    X,
    y,
    C: float,
    gamma: float,
    class_weights=None,
    *,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    tie_break: TieBreak = TieBreak.PREFER_POSITIVE,
    kernel: np.ndarray | None = None,
    track_objective: bool = False,
):
    """Array-level trainer; ``kernel`` may supply a precomputed Gram matrix.

    With ``track_objective`` the per-update dual objective trace is
    returned alongside the model.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if not (C > 0 and math.isfinite(C)):
        raise ValueError(f"C must be > 0, got {C!r}")
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    if not (np.any(y == TROJAN) and np.any(y == GOLDEN)):
        raise ValueError("SVM training needs both classes")
    if not set(np.unique(y).tolist()) <= {GOLDEN, TROJAN}:
        raise ValueError("labels must be -1/+1")
    w_neg, w_pos = _resolve_weights(y, class_weights)
    c_neg, c_pos = C * w_neg, C * w_pos
    Ci = np.where(y == TROJAN, c_pos, c_neg)

    K = rbf_matrix(X, X, gamma) if kernel is None else kernel
    n = y.shape[0]
    alpha, b, n_iter, gap, history = smo_solve(
        K, y.astype(float), Ci, eps=tol, max_iter=max_passes * n,
        track_objective=track_objective,
    )
    if gap >= tol:
        raise ConvergenceError(f"SMO stopped after {n_iter} pair updates without converging", gap)

    sv = alpha > 0
    alpha.setflags(write=False)
    model = TrainedSvm(
        support_vectors=X[sv].copy(),
        dual_coef=alpha[sv].copy(),
        sv_labels=y[sv].astype(float),
        bias=b,
        gamma=float(gamma),
        c_neg=c_neg,
        c_pos=c_pos,
        tie_break=TieBreak.parse(tie_break),
        alpha=alpha,
        n_iter=n_iter,
        kkt_gap=gap,
    )
    if track_objective:
        return model, history
    return model


def svm_train(
    train: LabeledDataset,
    C: float,
    gamma: float,
    class_weights=None,
    **kwargs,
) -> TrainedSvm:
    """Train on a standardized dataset.

    ``class_weights`` is ``None`` (C for both classes), ``"balanced"``
    (C * n / (2 n_k)), or a ``(w_golden, w_trojan)`` pair of multipliers.
    """
    return svm_fit(*as_arrays(train), C, gamma, class_weights, **kwargs)


def svm_decision(model: TrainedSvm, query) -> float:
    query = check_point(query, model.n_features)
    return float(model.decision(query[None, :])[0])


def svm_classify(model: TrainedSvm, query) -> int:
    return int(sign_with_tie(np.array([svm_decision(model, query)]), model.tie_break)[0])


def training_objective(model: TrainedSvm, X, y) -> float:
    """Dual objective of the stored multipliers over the training set ``(X, y)``."""
    if model.alpha is None:
        raise ValueError("model carries no training multipliers")
    K = rbf_matrix(X, X, model.gamma)
    return dual_objective(K, np.asarray(y, dtype=float), model.alpha)

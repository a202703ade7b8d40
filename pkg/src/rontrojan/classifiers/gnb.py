"""Gaussian naive Bayes with a MAP decision, evaluated in log space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rontrojan.classifiers.base import TieBreak, as_arrays, check_point, check_queries
from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset

VAR_FLOOR = 1e-9

# row order of the per-class arrays
CLASSES = (GOLDEN, TROJAN)


@dataclass(frozen=True, eq=False)
class TrainedGnb:
    """Per-class priors, feature means and (floored, maximum-likelihood) variances.

    Row 0 is the golden class, row 1 the Trojan class.
    """

    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    var_floor: float = VAR_FLOOR
    tie_break: TieBreak = TieBreak.PREFER_POSITIVE

    kind = "gnb"

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def log_joint(self, X) -> np.ndarray:
        """``log P(C_k) + sum_i log N(x_i; mu_ki, var_ki)``, shape ``(n, 2)``."""
        X = check_queries(X, self.n_features)
        out = np.empty((X.shape[0], 2))
        for k in range(2):
            var = self.variances[k]
            ll = -0.5 * np.log(2.0 * np.pi * var) - (X - self.means[k]) ** 2 / (2.0 * var)
            out[:, k] = np.log(self.priors[k]) + ll.sum(axis=1)
        return out

    def posteriors(self, X) -> np.ndarray:
        """Normalized class posteriors ``[P(golden|x), P(trojan|x)]`` per row."""
        s = self.log_joint(X)
        top = s.max(axis=1, keepdims=True)
        e = np.exp(s - top)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        s = self.log_joint(X)
        out = np.where(s[:, 1] > s[:, 0], TROJAN, GOLDEN).astype(np.int64)
        out[s[:, 1] == s[:, 0]] = self.tie_break.label
        return out

    def score(self, X) -> np.ndarray:
        return self.posteriors(X)[:, 1]


def gnb_fit(X, y, var_floor: float = VAR_FLOOR,
            tie_break: TieBreak = TieBreak.PREFER_POSITIVE) -> TrainedGnb:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    priors, means, variances = [], [], []
    for label in CLASSES:
        rows = X[y == label]
        if rows.shape[0] < 2:
            name = "golden" if label == GOLDEN else "trojan"
            raise ValueError(f"class {name} needs at least 2 samples, has {rows.shape[0]}")
        priors.append(rows.shape[0] / X.shape[0])
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), var_floor))
    arrays = [np.array(priors), np.array(means), np.array(variances)]
    for a in arrays:
        a.setflags(write=False)
    return TrainedGnb(*arrays, var_floor=var_floor, tie_break=TieBreak.parse(tie_break))


def gnb_train(train: LabeledDataset, var_floor: float = VAR_FLOOR,
              tie_break: TieBreak = TieBreak.PREFER_POSITIVE) -> TrainedGnb:
    return gnb_fit(*as_arrays(train), var_floor=var_floor, tie_break=tie_break)


def gnb_classify(model: TrainedGnb, query) -> tuple[int, float]:
    """Return the MAP label and its posterior probability."""
    query = check_point(query, model.n_features)
    label = int(model.predict(query[None, :])[0])
    post = model.posteriors(query[None, :])[0]
    return label, float(post[1] if label == TROJAN else post[0])

"""Hyperparameter selection: KNN k-sweep and exhaustive (C, gamma) grid search.

Both procedures score candidates on repeated chip-level fit/validation
resplits of the training set. The scaler is refit on every fit fold. All
candidates share the same folds, which depend only on the seed.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from rontrojan.classifiers.knn import knn_fit, vote_all_k
from rontrojan.classifiers.svm import svm_fit
from rontrojan.classifiers.base import squared_distances
from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset, apply_scaler, fit_scaler, split_by_chip
from rontrojan.errors import DataError
from rontrojan.metrics import confusion, mean_rates, rates
from rontrojan.seeding import derive_seed

DEFAULT_N_REPS = 10
DEFAULT_FIT_FRACTION = 0.75
DEFAULT_ACC_SLACK = 0.02
MAX_FOLD_ATTEMPTS = 100

DEFAULT_C_VALUES = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
DEFAULT_GAMMA_VALUES = (0.001, 0.01, 0.1, 1.0, 10.0)


@dataclass(frozen=True)
class SweepResult:
    param: object
    accuracy: float
    fpr: float
    fnr: float

    def __post_init__(self):
        for name in ("accuracy", "fpr", "fnr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class GridSpec:
    c_values: tuple[float, ...] = DEFAULT_C_VALUES
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_VALUES

    def __post_init__(self):
        for name in ("c_values", "gamma_values"):
            values = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, values)
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if any(not (math.isfinite(v) and v > 0) for v in values):
                raise ValueError(f"{name} must be strictly positive")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} must be strictly increasing")

    def cells(self) -> list[tuple[float, float]]:
        return [(c, g) for c in self.c_values for g in self.gamma_values]


@dataclass(frozen=True)
class Fold:
    fit: LabeledDataset
    val: LabeledDataset


def n_fit_chips(n_chips: int, fraction: float = DEFAULT_FIT_FRACTION) -> int:
    if n_chips < 2:
        raise DataError(f"need at least 2 chips to form validation folds, have {n_chips}")
    return min(max(1, math.floor(fraction * n_chips)), n_chips - 1)


def _has_both(d: LabeledDataset) -> bool:
    return bool(np.any(d.labels == TROJAN) and np.any(d.labels == GOLDEN))


def validation_folds(
    train: LabeledDataset,
    n_reps: int = DEFAULT_N_REPS,
    seed: int = 0,
    fit_fraction: float = DEFAULT_FIT_FRACTION,
    require_both_classes: bool = False,
) -> list[Fold]:
    """Standardized chip-level fit/validation resplits, one per repetition."""
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    n_fit = n_fit_chips(len(train.chip_index), fit_fraction)
    folds = []
    for rep in range(n_reps):
        for attempt in range(MAX_FOLD_ATTEMPTS):
            fit, val = split_by_chip(train, n_fit, derive_seed(seed, rep, attempt))
            if not require_both_classes or (_has_both(fit) and _has_both(val)):
                break
        else:
            raise DataError(
                f"no fold with both classes on each side after {MAX_FOLD_ATTEMPTS} attempts"
            )
        scaler = fit_scaler(fit)
        folds.append(Fold(apply_scaler(scaler, fit), apply_scaler(scaler, val)))
    return folds


def _summarize(param, fold_metrics) -> SweepResult:
    m = mean_rates(fold_metrics)
    return SweepResult(param, m.accuracy, m.fpr, m.fnr)


# --------------------------------------------------------------------- k sweep


def k_sweep(
    train: LabeledDataset,
    k_range: tuple[int, int] = (1, 40),
    n_reps: int = DEFAULT_N_REPS,
    seed: int = 0,
) -> list[SweepResult]:
    """Mean validation accuracy / FPR / FNR of KNN for every k in ``k_range`` (inclusive)."""
    k_lo, k_hi = (int(v) for v in k_range)
    if not 1 <= k_lo <= k_hi:
        raise ValueError(f"invalid k range [{k_lo}, {k_hi}]")
    folds = validation_folds(train, n_reps, seed)
    fold_size = min(len(f.fit) for f in folds)
    if k_hi > fold_size:
        raise ValueError(f"k upper bound {k_hi} exceeds the smallest fit fold ({fold_size} samples)")

    per_k: list[list] = [[] for _ in range(k_hi - k_lo + 1)]
    for fold in folds:
        model = knn_fit(fold.fit.features, fold.fit.labels, 1)
        order = model.neighbor_order(fold.val.features)
        preds = vote_all_k(model.labels[order], k_hi)
        for k in range(k_lo, k_hi + 1):
            per_k[k - k_lo].append(rates(confusion(preds[k - 1], fold.val.labels)))
    return [_summarize(k_lo + i, ms) for i, ms in enumerate(per_k)]


def select_k(results: Sequence[SweepResult], acc_slack: float = DEFAULT_ACC_SLACK) -> int:
    """Smallest k with the lowest FPR among those within ``acc_slack`` of the best accuracy."""
    if not results:
        raise ValueError("no sweep results")
    best_acc = max(r.accuracy for r in results)
    eligible = [r for r in results if r.accuracy >= best_acc - acc_slack - 1e-12]
    best_fpr = min(r.fpr for r in eligible)
    return int(min(r.param for r in eligible if r.fpr <= best_fpr + 1e-12))


# ----------------------------------------------------------------- grid search


def _cell_key(c: float, gamma: float, r: SweepResult):
    return (r.accuracy, -r.fpr, -c, -gamma)


def best_cell(cells: Sequence[tuple[float, float, SweepResult]]) -> tuple[float, float, SweepResult]:
    """Highest accuracy, then lowest FPR, then smaller C, then smaller gamma."""
    if not cells:
        raise ValueError("no grid cells")
    return max(cells, key=lambda cell: _cell_key(*cell))


def grid_evaluate(
    train: LabeledDataset,
    grid: GridSpec = GridSpec(),
    n_reps: int = DEFAULT_N_REPS,
    seed: int = 0,
    class_weights="balanced",
    cells: Sequence[tuple[float, float]] | None = None,
) -> list[tuple[float, float, SweepResult]]:
    """Score every (C, gamma) cell (or the given ``cells``, in that order)."""
    cells = grid.cells() if cells is None else [(float(c), float(g)) for c, g in cells]
    folds = validation_folds(train, n_reps, seed, require_both_classes=True)
    fold_metrics: dict[tuple[float, float], list] = {cell: [] for cell in cells}
    gammas = sorted({g for _, g in cells})
    for fold in folds:
        d2 = squared_distances(fold.fit.features, fold.fit.features)
        d2_val = squared_distances(fold.val.features, fold.fit.features)
        for gamma in gammas:
            K = np.exp(-gamma * d2)
            K_val = np.exp(-gamma * d2_val)
            for c, g in cells:
                if g != gamma:
                    continue
                model = svm_fit(fold.fit.features, fold.fit.labels, c, gamma,
                                class_weights, kernel=K)
                if model.support_vectors.shape[0]:
                    sv = model.alpha > 0
                    dec = K_val[:, sv] @ (model.dual_coef * model.sv_labels) + model.bias
                else:
                    dec = np.full(len(fold.val), model.bias)
                pred = np.where(dec > 0, TROJAN, GOLDEN)
                pred[dec == 0] = model.tie_break.label
                fold_metrics[(c, g)].append(rates(confusion(pred, fold.val.labels)))
    return [(c, g, _summarize((c, g), fold_metrics[(c, g)])) for c, g in cells]


def grid_search(
    train: LabeledDataset,
    grid: GridSpec = GridSpec(),
    n_reps: int = DEFAULT_N_REPS,
    seed: int = 0,
    class_weights="balanced",
) -> tuple[float, float, SweepResult]:
    return best_cell(grid_evaluate(train, grid, n_reps, seed, class_weights))


__all__ = [
    "GridSpec",
    "SweepResult",
    "best_cell",
    "grid_evaluate",
    "grid_search",
    "k_sweep",
    "select_k",
    "validation_folds",
]

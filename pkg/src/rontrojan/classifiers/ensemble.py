"""Unweighted majority-vote ensembles of 2 or 3 distinct classifier kinds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rontrojan.classifiers.base import TieBreak, check_point, check_queries
from rontrojan.dataset import GOLDEN, TROJAN

MEMBER_KINDS = ("knn", "svm", "gnb")

# The four combinations evaluated by default.
STANDARD_COMBINATIONS = (
    ("knn", "svm", "gnb"),
    ("knn", "svm"),
    ("knn", "gnb"),
    ("svm", "gnb"),
)


def combination_name(kinds) -> str:
    return "+".join(kinds)


def parse_combination(text: str) -> tuple[str, ...]:
    kinds = tuple(part.strip().lower() for part in text.split("+"))
    _check_kinds(kinds)
    return kinds


def _check_kinds(kinds) -> None:
    if len(kinds) not in (2, 3):
        raise ValueError(f"an ensemble needs 2 or 3 members, got {len(kinds)}")
    unknown = [k for k in kinds if k not in MEMBER_KINDS]
    if unknown:
        raise ValueError(f"unknown member kind(s) {unknown}; valid: {', '.join(MEMBER_KINDS)}")
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate member kinds in {'+'.join(kinds)}")


@dataclass(frozen=True, eq=False)
class TrainedEnsemble:
    members: tuple
    tie_break: TieBreak = TieBreak.PREFER_POSITIVE

    kind = "ensemble"

    def __post_init__(self):
        _check_kinds(tuple(m.kind for m in self.members))
        widths = {m.n_features for m in self.members}
        if len(widths) != 1:
            raise ValueError("ensemble members disagree on the feature space")

    @property
    def name(self) -> str:
        return combination_name(m.kind for m in self.members)

    @property
    def n_features(self) -> int:
        return self.members[0].n_features

    def votes(self, X) -> np.ndarray:
        X = check_queries(X, self.n_features)
        return np.stack([m.predict(X) for m in self.members], axis=1)

    def predict(self, X) -> np.ndarray:
        total = self.votes(X).sum(axis=1)
        out = np.where(total > 0, TROJAN, GOLDEN).astype(np.int64)
        out[total == 0] = self.tie_break.label
        return out

    def score(self, X) -> np.ndarray:
        """Fraction of members voting Trojan."""
        return np.mean(self.votes(X) == TROJAN, axis=1)


def build_ensemble(members, tie_break: TieBreak = TieBreak.PREFER_POSITIVE) -> TrainedEnsemble:
    return TrainedEnsemble(tuple(members), TieBreak.parse(tie_break))


def ensemble_classify(model: TrainedEnsemble, query) -> int:
    query = check_point(query, model.n_features)
    return int(model.predict(query[None, :])[0])

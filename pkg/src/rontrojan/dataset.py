"""Labeled RON frequency fingerprints: data model, CSV I/O, scaling and chip splits.

Samples are stored column-wise in numpy arrays; :class:`FrequencySample`
is the row view handed out when iterating a dataset.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from rontrojan._io import atomic_write_text
from rontrojan.errors import (
    DegenerateFeatureError,
    EmptyDatasetError,
    RowError,
    SchemaError,
)

GOLDEN = -1
TROJAN = 1

DEFAULT_N_FEATURES = 8
_META_COLUMNS = ("chip_id", "region_id", "sample_kind", "benchmark_id")


class SampleKind(str, Enum):
    GOLDEN = "golden"
    TROJAN = "trojan"


def expected_header(n_features: int = DEFAULT_N_FEATURES) -> list[str]:
    return list(_META_COLUMNS) + [f"f{i + 1}" for i in range(n_features)]


@dataclass(frozen=True)
class FrequencySample:
    """One averaged RO frequency fingerprint of one IC under one workload."""

    chip_id: str
    region_id: int
    kind: SampleKind
    benchmark_id: str | None
    features: tuple[float, ...]

    def __post_init__(self):
        if not 0 <= self.region_id <= 3:
            raise ValueError(f"region_id must be in 0..3, got {self.region_id}")
        if self.kind is SampleKind.GOLDEN and self.benchmark_id:
            raise ValueError("golden samples carry no benchmark_id")
        for i, f in enumerate(self.features):
            if not (math.isfinite(f) and f > 0):
                raise ValueError(f"feature {i} must be finite and positive, got {f!r}")

    @property
    def label(self) -> int:
        return TROJAN if self.kind is SampleKind.TROJAN else GOLDEN


class LabeledDataset:
    """Immutable collection of labeled samples with chip provenance.

    ``features`` is an ``(n_samples, n_features)`` float array; ``labels``
    holds -1 for golden and +1 for Trojan samples.
    """

    def __init__(
        self,
        features,
        chip_ids: Sequence[str],
        region_ids: Sequence[int],
        is_trojan: Sequence[bool],
        benchmark_ids: Sequence[str | None] | None = None,
        *,
        validate: bool = True,
    ):
        X = np.array(features, dtype=float, copy=True)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array")
        n = X.shape[0]
        trojan = np.asarray(is_trojan, dtype=bool).copy()
        regions = np.asarray(region_ids, dtype=np.int64).copy()
        chips = tuple(str(c) for c in chip_ids)
        if benchmark_ids is None:
            benchmark_ids = [None] * n
        bench = tuple(b if b else None for b in benchmark_ids)
        if not (len(chips) == len(regions) == len(trojan) == len(bench) == n):
            raise ValueError("all per-sample columns must have the same length")
        if validate and n:
            if not np.all(np.isfinite(X)) or not np.all(X > 0):
                raise ValueError("frequencies must be finite and strictly positive")
            if np.any((regions < 0) | (regions > 3)):
                raise ValueError("region_id must be in 0..3")

        for arr in (X, trojan, regions):
            arr.setflags(write=False)
        self.features = X
        self.is_trojan = trojan
        self.region_ids = regions
        self.chip_ids = chips
        self.benchmark_ids = bench
        labels = np.where(trojan, TROJAN, GOLDEN).astype(np.int64)
        labels.setflags(write=False)
        self.labels = labels

        index: dict[str, list[int]] = {}
        for i, c in enumerate(chips):
            index.setdefault(c, []).append(i)
        self.chip_index: dict[str, tuple[int, ...]] = {c: tuple(v) for c, v in index.items()}

    @classmethod
    def from_samples(cls, samples: Iterable[FrequencySample]) -> LabeledDataset:
        samples = list(samples)
        if not samples:
            raise EmptyDatasetError("no samples")
        widths = {len(s.features) for s in samples}
        if len(widths) != 1:
            raise ValueError(f"samples disagree on n_features: {sorted(widths)}")
        return cls(
            [s.features for s in samples],
            [s.chip_id for s in samples],
            [s.region_id for s in samples],
            [s.kind is SampleKind.TROJAN for s in samples],
            [s.benchmark_id for s in samples],
        )

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def chips(self) -> list[str]:
        """Distinct chip ids in order of first appearance."""
        return list(self.chip_index)

    def sample(self, i: int) -> FrequencySample:
        return FrequencySample(
            chip_id=self.chip_ids[i],
            region_id=int(self.region_ids[i]),
            kind=SampleKind.TROJAN if self.is_trojan[i] else SampleKind.GOLDEN,
            benchmark_id=self.benchmark_ids[i],
            features=tuple(float(v) for v in self.features[i]),
        )

    @property
    def samples(self) -> list[FrequencySample]:
        return [self.sample(i) for i in range(len(self))]

    def subset(self, indices) -> LabeledDataset:
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.features[idx],
            [self.chip_ids[i] for i in idx],
            self.region_ids[idx],
            self.is_trojan[idx],
            [self.benchmark_ids[i] for i in idx],
            validate=False,
        )

    def with_features(self, features) -> LabeledDataset:
        """Same samples and provenance with replaced feature values (no positivity check)."""
        features = np.asarray(features, dtype=float)
        if features.shape[0] != len(self):
            raise ValueError("row count mismatch")
        return LabeledDataset(
            features,
            self.chip_ids,
            self.region_ids,
            self.is_trojan,
            self.benchmark_ids,
            validate=False,
        )

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and self.chip_ids == other.chip_ids
            and np.array_equal(self.region_ids, other.region_ids)
            and np.array_equal(self.is_trojan, other.is_trojan)
            and self.benchmark_ids == other.benchmark_ids
        )

    __hash__ = None

    def __repr__(self):
        n_golden = int(np.sum(~self.is_trojan))
        return (
            f"LabeledDataset(n={len(self)}, chips={len(self.chip_index)}, "
            f"golden={n_golden}, trojan={len(self) - n_golden}, n_features={self.n_features})"
        )


# --------------------------------------------------------------------------- CSV


def _format_freq(value: float) -> str:
    return f"{value:.6g}"


def dumps_csv(data: LabeledDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(expected_header(data.n_features))
    for i in range(len(data)):
        writer.writerow(
            [
                data.chip_ids[i],
                int(data.region_ids[i]),
                "trojan" if data.is_trojan[i] else "golden",
                data.benchmark_ids[i] or "",
                *(_format_freq(v) for v in data.features[i]),
            ]
        )
    return buf.getvalue()


def save_csv(data: LabeledDataset, path: str | os.PathLike) -> None:
    """Write ``data`` in the dataset CSV schema (frequencies to 6 significant digits)."""
    atomic_write_text(path, dumps_csv(data))


def _check_header(header: list[str], n_features: int | None) -> int:
    header = [h.strip() for h in header]
    for i, col in enumerate(_META_COLUMNS):
        if i >= len(header) or header[i] != col:
            raise SchemaError(f"missing column {col!r}", column=col)
    freq_cols = header[len(_META_COLUMNS):]
    if n_features is None:
        n_features = 0
        while n_features < len(freq_cols) and freq_cols[n_features] == f"f{n_features + 1}":
            n_features += 1
        if n_features == 0:
            raise SchemaError("missing column 'f1'", column="f1")
    expected = [f"f{i + 1}" for i in range(n_features)]
    for want, got in zip(expected, freq_cols):
        if want != got:
            raise SchemaError(f"expected column {want!r}, found {got!r}", column=want)
    if len(freq_cols) < n_features:
        missing = expected[len(freq_cols)]
        raise SchemaError(f"missing column {missing!r}", column=missing)
    if len(freq_cols) > n_features:
        extra = freq_cols[n_features]
        raise SchemaError(f"unexpected column {extra!r}", column=extra)
    return n_features


def loads_csv(text: str, n_features: int | None = None) -> LabeledDataset:
    """Parse dataset CSV text. ``n_features=None`` infers the width from the header."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDatasetError("empty file") from None
    n_features = _check_header(header, n_features)
    width = len(_META_COLUMNS) + n_features

    feats, chips, regions, trojan, bench = [], [], [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise RowError(f"expected {width} fields, found {len(row)}", line)
        chip_id, region, kind, bench_id = (c.strip() for c in row[:4])
        if not chip_id:
            raise RowError("empty chip_id", line)
        try:
            region_id = int(region)
        except ValueError:
            raise RowError(f"region_id {region!r} is not an integer", line) from None
        if not 0 <= region_id <= 3:
            raise RowError(f"region_id {region_id} outside 0..3", line)
        kind = kind.lower()
        if kind not in ("golden", "trojan"):
            raise RowError(f"sample_kind {kind!r} is not golden/trojan", line)
        if kind == "golden" and bench_id:
            raise RowError("golden rows must have an empty benchmark_id", line)
        values = []
        for j, cell in enumerate(row[4:]):
            try:
                v = float(cell)
            except ValueError:
                raise RowError(f"f{j + 1} value {cell!r} is not numeric", line) from None
            if not (math.isfinite(v) and v > 0):
                raise RowError(f"f{j + 1} value {cell!r} is not a positive finite frequency", line)
            values.append(v)
        feats.append(values)
        chips.append(chip_id)
        regions.append(region_id)
        trojan.append(kind == "trojan")
        bench.append(bench_id or None)

    if not feats:
        raise EmptyDatasetError("no data rows")
    return LabeledDataset(np.array(feats, dtype=float), chips, regions, trojan, bench)


def load_csv(path: str | os.PathLike, n_features: int | None = None) -> LabeledDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_csv(fh.read(), n_features)


# ------------------------------------------------------------------ splitting


def split_by_chip(
    data: LabeledDataset, n_train_chips: int, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Put ``n_train_chips`` uniformly chosen chips in train and every other chip in test."""
    chips = data.chips
    if not 1 <= n_train_chips < len(chips):
        raise ValueError(
            f"n_train_chips must be in [1, {len(chips) - 1}] for {len(chips)} chips, "
            f"got {n_train_chips}"
        )
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(len(chips), size=n_train_chips, replace=False).tolist())
    train_idx, test_idx = [], []
    for c, name in enumerate(chips):
        (train_idx if c in chosen else test_idx).extend(data.chip_index[name])
    return data.subset(sorted(train_idx)), data.subset(sorted(test_idx))


# ----------------------------------------------------------------------- scaling


@dataclass(frozen=True)
class Scaler:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        if len(self.mean) != len(self.std):
            raise ValueError("mean and std lengths differ")
        for i, s in enumerate(self.std):
            if not (math.isfinite(s) and s > 0):
                raise DegenerateFeatureError(i)

    @property
    def n_features(self) -> int:
        return len(self.mean)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n_features:
            raise ValueError(
                f"dimension mismatch: scaler has {self.n_features} features, data has {X.shape[-1]}"
            )
        return (X - np.asarray(self.mean)) / np.asarray(self.std)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> Scaler:
        return cls(tuple(float(v) for v in d["mean"]), tuple(float(v) for v in d["std"]))


def fit_scaler(train: LabeledDataset) -> Scaler:
    """Per-feature sample mean and sample standard deviation (ddof=1)."""
    if len(train) < 2:
        raise EmptyDatasetError("need at least two samples to fit a scaler")
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0, ddof=1)
    for i, s in enumerate(std):
        # relative threshold: identical values can leave rounding residue
        if not s > 1e-12 * max(abs(mean[i]), 1.0):
            raise DegenerateFeatureError(i)
    return Scaler(tuple(mean.tolist()), tuple(std.tolist()))


def apply_scaler(scaler: Scaler, data: LabeledDataset) -> LabeledDataset:
    return data.with_features(scaler.transform(data.features))

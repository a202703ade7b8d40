"""Trial harness and result tables.

For each training size and trial, the corpus is split by chip, the scaler
is fit on the training chips, every needed member model is trained once,
and each classifier configuration is scored on the held-out chips. KNN and
SVM hyperparameters are tuned once per size on the first trial's training
split (or per trial when asked) and shared by every configuration that
uses that member, ensembles included.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from rontrojan.classifiers.base import TieBreak
from rontrojan.classifiers.ensemble import MEMBER_KINDS, parse_combination
from rontrojan.classifiers.gnb import gnb_train
from rontrojan.classifiers.knn import knn_train
from rontrojan.classifiers.svm import svm_train
from rontrojan.dataset import LabeledDataset, apply_scaler, fit_scaler, split_by_chip
from rontrojan.metrics import ConfusionCounts, RateMetrics, confusion, mean_rates, rates
from rontrojan.seeding import derive_seed
from rontrojan import tuning

DEFAULT_SIZES = (6, 12, 24)
DEFAULT_TRIALS = 20
DEFAULT_K_MAX = 40

# Reference figures of the PCA + convex-hull approach, quoted in report footnotes.
BASELINE_PCA_HULL_FPR = 0.50
BASELINE_PCA_HULL_ACCURACY = 0.80

_SPLIT_STREAM = 1
_TUNE_STREAM = 2
_KIND_INDEX = {kind: i for i, kind in enumerate(MEMBER_KINDS)}

CSV_COLUMNS = ["classifier", "size", "trial", "tp", "tn", "fp", "fn",
               "tpr", "tnr", "fpr", "fnr", "accuracy"]
METRIC_ROWS = (("TNR", "tnr"), ("FPR", "fpr"), ("FNR", "fnr"), ("TPR", "tpr"),
               ("Accuracy", "accuracy"))


@dataclass(frozen=True)
class ClassifierSpec:
    """One classifier configuration. Unset hyperparameters are tuned."""

    kind: str
    members: tuple[str, ...] = ()
    k: int | None = None
    C: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == "ensemble":
            object.__setattr__(self, "members", parse_combination("+".join(self.members)))
        elif self.kind in MEMBER_KINDS:
            if self.members:
                raise ValueError(f"{self.kind} takes no members")
        else:
            raise ValueError(f"unknown classifier kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "ensemble":
            return "ensemble:" + "+".join(self.members)
        return self.kind

    @property
    def needs(self) -> tuple[str, ...]:
        return self.members if self.kind == "ensemble" else (self.kind,)


def valid_classifier_tokens() -> list[str]:
    return list(MEMBER_KINDS) + ["ensemble:<a>+<b>[+<c>] with members from knn, svm, gnb"]


def parse_classifier(token: str, **hyper) -> ClassifierSpec:
    """Parse ``knn``, ``svm``, ``gnb`` or ``ensemble:svm+knn+gnb``."""
    token = token.strip().lower()
    if token.startswith("ensemble:"):
        return ClassifierSpec("ensemble", parse_combination(token.split(":", 1)[1]), **hyper)
    if token in MEMBER_KINDS:
        return ClassifierSpec(token, **hyper)
    raise ValueError(
        f"unknown classifier {token!r}; valid tokens: {', '.join(valid_classifier_tokens())}"
    )


def standard_configurations(**hyper) -> list[ClassifierSpec]:
    """The three single classifiers and the four voting combinations."""
    specs = [ClassifierSpec(kind, **hyper) for kind in ("knn", "svm", "gnb")]
    for combo in (("svm", "knn", "gnb"), ("svm", "knn"), ("knn", "gnb"), ("svm", "gnb")):
        specs.append(ClassifierSpec("ensemble", combo, **hyper))
    return specs


@dataclass(frozen=True)
class TrialRecord:
    classifier: str
    size: int
    trial: int
    counts: ConfusionCounts
    metrics: RateMetrics

    @property
    def flagged(self) -> bool:
        return bool(self.metrics.degenerate)


@dataclass
class TrialReport:
    classifiers: tuple[str, ...]
    sizes: tuple[int, ...]
    n_trials: int
    seed: int | None
    means: dict[str, dict[int, RateMetrics]]
    trials: list[TrialRecord] = field(default_factory=list)
    hyperparameters: dict[str, dict[int, dict]] = field(default_factory=dict)

    def metric(self, classifier: str, size: int, name: str) -> float:
        return getattr(self.means[classifier][size], name)


# ----------------------------------------------------------------- harness


def trial_split(data: LabeledDataset, size: int, trial: int, seed: int):
    """The chip split used for ``(size, trial)``; shared by every classifier."""
    return split_by_chip(data, size, derive_seed(seed, _SPLIT_STREAM, size, trial))


def _tune(kind: str, train: LabeledDataset, size: int, seed: int, opts: dict,
          trial: int = 0) -> dict:
    tune_seed = derive_seed(seed, _TUNE_STREAM, _KIND_INDEX[kind], size, trial)
    if kind == "knn":
        folds_min = min(len(f.fit) for f in tuning.validation_folds(train, opts["n_reps"], tune_seed))
        k_hi = min(opts["k_max"], folds_min)
        sweep = tuning.k_sweep(train, (1, k_hi), opts["n_reps"], tune_seed)
        return {"k": tuning.select_k(sweep, opts["acc_slack"])}
    if kind == "svm":
        c, g, _ = tuning.grid_search(train, opts["grid"], opts["n_reps"], tune_seed,
                                     opts["class_weights"])
        return {"C": c, "gamma": g}
    return {}


def _fixed_hyper(kind: str, specs: Sequence[ClassifierSpec]) -> dict | None:
    """Hyperparameters pinned by the specs for a member kind, or None to tune."""
    if kind == "knn":
        ks = {s.k for s in specs if kind in s.needs and s.k is not None}
        if len(ks) > 1:
            raise ValueError(f"conflicting fixed k values {sorted(ks)}")
        return {"k": ks.pop()} if ks else None
    if kind == "svm":
        pairs = {(s.C, s.gamma) for s in specs if kind in s.needs and s.C is not None}
        if len(pairs) > 1:
            raise ValueError("conflicting fixed C/gamma values")
        if pairs:
            c, g = pairs.pop()
            if g is None:
                raise ValueError("a fixed C needs a fixed gamma")
            return {"C": c, "gamma": g}
        return None
    return {}


def _train_member(kind: str, train: LabeledDataset, hyper: dict, opts: dict):
    tie = opts["tie_break"]
    if kind == "knn":
        return knn_train(train, min(hyper["k"], len(train)))
    if kind == "svm":
        return svm_train(train, hyper["C"], hyper["gamma"], opts["class_weights"], tie_break=tie)
    return gnb_train(train, tie_break=tie)


def run_trials(
    data: LabeledDataset,
    classifiers: Sequence[ClassifierSpec | str],
    sizes: Sequence[int] = DEFAULT_SIZES,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    *,
    tie_break: TieBreak | str = TieBreak.PREFER_POSITIVE,
    n_reps: int = tuning.DEFAULT_N_REPS,
    k_max: int = DEFAULT_K_MAX,
    acc_slack: float = tuning.DEFAULT_ACC_SLACK,
    grid: tuning.GridSpec = tuning.GridSpec(),
    class_weights="balanced",
    retune_per_trial: bool = False,
    workers: int = 1,
) -> TrialReport:
    """Repeated chip-split train/evaluate runs for each classifier and training size."""
    specs = [parse_classifier(c) if isinstance(c, str) else c for c in classifiers]
    if not specs:
        raise ValueError("no classifiers given")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate classifier configurations in {names}")
    sizes = tuple(int(s) for s in sizes)
    if not sizes:
        raise ValueError("no training sizes given")
    n_chips = len(data.chip_index)
    for s in sizes:
        if not 1 <= s < n_chips:
            raise ValueError(f"training size {s} must be in [1, {n_chips - 1}] for {n_chips} chips")
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")

    opts = {
        "tie_break": TieBreak.parse(tie_break),
        "n_reps": n_reps,
        "k_max": k_max,
        "acc_slack": acc_slack,
        "grid": grid,
        "class_weights": class_weights,
    }
    kinds = [k for k in MEMBER_KINDS if any(k in s.needs for s in specs)]
    fixed = {k: _fixed_hyper(k, specs) for k in kinds}

    tuned: dict[tuple[str, int], dict] = {}
    for size in sizes:
        first_train, _ = trial_split(data, size, 0, seed)
        for kind in kinds:
            if fixed[kind] is not None:
                tuned[(kind, size)] = fixed[kind]
            elif not retune_per_trial:
                tuned[(kind, size)] = _tune(kind, first_train, size, seed, opts)

    def one_trial(size: int, trial: int) -> list[TrialRecord]:
        train, test = trial_split(data, size, trial, seed)
        scaler = fit_scaler(train)
        train_s, test_s = apply_scaler(scaler, train), apply_scaler(scaler, test)
        preds = {}
        for kind in kinds:
            hyper = tuned.get((kind, size))
            if hyper is None:
                hyper = _tune(kind, train, size, seed, opts, trial)
            preds[kind] = _train_member(kind, train_s, hyper, opts).predict(test_s.features)
        records = []
        for spec in specs:
            if spec.kind == "ensemble":
                total = np.sum([preds[m] for m in spec.members], axis=0)
                pred = np.where(total > 0, 1, -1)
                pred[total == 0] = opts["tie_break"].label
            else:
                pred = preds[spec.kind]
            counts = confusion(pred, test.labels)
            records.append(TrialRecord(spec.name, size, trial, counts, rates(counts)))
        return records

    jobs = [(size, trial) for size in sizes for trial in range(n_trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: one_trial(*job), jobs))
    else:
        results = [one_trial(*job) for job in jobs]

    records = [r for batch in results for r in batch]
    means = {
        name: {
            size: mean_rates(r.metrics for r in records if r.classifier == name and r.size == size)
            for size in sizes
        }
        for name in names
    }
    hyper_report = {}
    for spec in specs:
        hyper_report[spec.name] = {
            size: {k: v for kind in spec.needs for k, v in (tuned.get((kind, size)) or {}).items()}
            for size in sizes
        }
    records.sort(key=lambda r: (names.index(r.classifier), sizes.index(r.size), r.trial))
    return TrialReport(tuple(names), sizes, n_trials, seed, means, records, hyper_report)


# ------------------------------------------------------------------ reporting


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def to_markdown(report: TrialReport) -> str:
    if not report.classifiers:
        raise ValueError("report has no classifiers")
    lines = [f"# Classifier results ({report.n_trials} trials per training size)", ""]
    header = "| Metric | " + " | ".join(f"{s} Samples" for s in report.sizes) + " |"
    rule = "|---|" + "---|" * len(report.sizes)
    for name in report.classifiers:
        lines += [f"## {name}", "", header, rule]
        for label, attr in METRIC_ROWS:
            cells = " | ".join(_fmt(getattr(report.means[name][s], attr)) for s in report.sizes)
            lines.append(f"| {label} | {cells} |")
        lines.append("")
    flagged = sum(1 for r in report.trials if r.flagged)
    if flagged:
        lines.append(
            f"{flagged} trial(s) had a class missing from the test chips; "
            "their vacuous rates were counted as 1.0 / 0.0."
        )
        lines.append("")
    lines.append(
        f"Reference: PCA + convex-hull classification, FPR ~{BASELINE_PCA_HULL_FPR:.2f} "
        f"at >{BASELINE_PCA_HULL_ACCURACY:.2f} accuracy."
    )
    return "\n".join(lines) + "\n"


def to_csv(report: TrialReport) -> str:
    if not report.classifiers:
        raise ValueError("report has no classifiers")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.trials:
        m = r.metrics
        writer.writerow([r.classifier, r.size, r.trial, r.counts.tp, r.counts.tn, r.counts.fp,
                         r.counts.fn, repr(m.tpr), repr(m.tnr), repr(m.fpr), repr(m.fnr),
                         repr(m.accuracy)])
    return buf.getvalue()


def emit_report(report: TrialReport, format: str = "markdown") -> str:
    """Render a report as metric-by-size markdown tables or long-form per-trial CSV."""
    if format == "markdown":
        return to_markdown(report)
    if format == "csv":
        return to_csv(report)
    raise ValueError(f"unknown report format {format!r}; expected 'markdown' or 'csv'")


def report_from_csv(text: str) -> TrialReport:
    """Rebuild a report from :func:`to_csv` output (the seed is not recoverable)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
    records, names, sizes = [], [], []
    for row in reader:
        counts = ConfusionCounts(int(row["tp"]), int(row["tn"]), int(row["fp"]), int(row["fn"]))
        metrics = rates(counts)
        stored = RateMetrics(float(row["tpr"]), float(row["tnr"]), float(row["fpr"]),
                             float(row["fnr"]), float(row["accuracy"]), metrics.degenerate)
        rec = TrialRecord(row["classifier"], int(row["size"]), int(row["trial"]), counts, stored)
        records.append(rec)
        if rec.classifier not in names:
            names.append(rec.classifier)
        if rec.size not in sizes:
            sizes.append(rec.size)
    if not records:
        raise ValueError("no trial rows")
    trials = {r.trial for r in records}
    means = {
        name: {s: mean_rates(r.metrics for r in records if r.classifier == name and r.size == s)
               for s in sizes}
        for name in names
    }
    return TrialReport(tuple(names), tuple(sizes), len(trials), None, means, records)

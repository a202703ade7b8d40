"""Command-line entry point: ``rontrojan <subcommand> [flags]``.

Exit codes: 0 success, 1 internal or convergence error, 2 usage or
configuration error. Output files are written atomically, so an error
never leaves a partial file behind. ``--config FILE`` pre-populates flags
from ``key=value`` lines (keys are flag names without dashes, with ``-``
or ``_``); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from rontrojan import __version__
from rontrojan._io import atomic_write_text
from rontrojan.classifiers.base import TieBreak
from rontrojan.classifiers.ensemble import build_ensemble
from rontrojan.classifiers.gnb import gnb_train
from rontrojan.classifiers.knn import knn_train
from rontrojan.classifiers.serialize import load_model, save_model
from rontrojan.classifiers.svm import svm_train
from rontrojan.dataset import TROJAN, apply_scaler, fit_scaler, load_csv, save_csv
from rontrojan.errors import ConvergenceError, RonTrojanError
from rontrojan.evaluation import (
    DEFAULT_K_MAX,
    DEFAULT_SIZES,
    DEFAULT_TRIALS,
    emit_report,
    parse_classifier,
    report_from_csv,
    run_trials,
    standard_configurations,
)
from rontrojan.synth import SynthConfig, generate, parse_key_values
from rontrojan import tuning

log = logging.getLogger("rontrojan")


class UsageError(Exception):
    """Invalid flags or configuration; maps to exit code 2."""


# Values used when a model is trained without tuning.
DEFAULT_K = 2
DEFAULT_C = 1.0
DEFAULT_GAMMA = 0.1

_SYNTH_FLAGS = {
    "n_chips": "chips",
    "n_ros": "ros",
    "f_nominal": "f_nominal",
    "sigma_chip_rel": "sigma_chip",
    "sigma_ro_rel": "sigma_ro",
    "sigma_meas_rel": "sigma_meas",
    "n_meas_avg": "n_meas",
    "n_golden_per_chip": "golden",
    "n_trojan_per_chip": "trojans",
    "trojan_drop_rel_min": "drop_min",
    "trojan_drop_rel_max": "drop_max",
    "locality_decay": "locality_decay",
}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


# ----------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    base = SynthConfig.from_file(args.synth_config) if args.synth_config else SynthConfig()
    changes = {}
    for field_name, dest in _SYNTH_FLAGS.items():
        value = getattr(args, dest)
        if value is not None:
            changes[field_name] = value
    config = base.replace(**changes)
    try:
        config.validate()
    except ValueError as exc:
        bad = str(exc).split(" ", 1)[0]
        flag = _flag(_SYNTH_FLAGS.get(bad, bad))
        raise UsageError(f"invalid {flag}: {exc}") from None
    data = generate(config, args.seed)
    save_csv(data, args.out)
    log.info("wrote %d samples from %d chips to %s", len(data), config.n_chips, args.out)
    return 0


def _load_dataset(path):
    try:
        return load_csv(path)
    except FileNotFoundError:
        raise UsageError(f"dataset not found: {path}") from None
    except (RonTrojanError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _train_kind(kind: str, train, args):
    tie = args.tie_break
    if kind == "knn":
        k = args.k
        if k is None:
            k = DEFAULT_K
            if args.tune:
                sweep = tuning.k_sweep(train["raw"], (1, args.k_max), args.reps, args.seed)
                k = tuning.select_k(sweep)
        return knn_train(train["scaled"], k)
    if kind == "svm":
        C = args.C if args.C is not None else DEFAULT_C
        gamma = args.gamma if args.gamma is not None else DEFAULT_GAMMA
        if args.tune and args.C is None and args.gamma is None:
            C, gamma, _ = tuning.grid_search(train["raw"], tuning.GridSpec(), args.reps, args.seed,
                                             args.class_weights)
        return svm_train(train["scaled"], C, gamma, args.class_weights, tie_break=tie)
    return gnb_train(train["scaled"], tie_break=tie)


def cmd_train(args) -> int:
    spec = _parse_spec(args.classifier)
    data = _load_dataset(args.data)
    scaler = fit_scaler(data)
    train = {"raw": data, "scaled": apply_scaler(scaler, data)}
    if spec.kind == "ensemble":
        model = build_ensemble([_train_kind(k, train, args) for k in spec.members], args.tie_break)
    else:
        model = _train_kind(spec.kind, train, args)
    save_model(args.out, model, scaler)
    log.info("saved %s model to %s", spec.name, args.out)
    return 0


def cmd_classify(args) -> int:
    try:
        model, scaler = load_model(args.model)
    except FileNotFoundError:
        raise UsageError(f"model not found: {args.model}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{args.model}: not a valid model file ({exc})") from None
    data = _load_dataset(args.data)
    if data.n_features != model.n_features:
        raise UsageError(
            f"feature-count mismatch: model expects {model.n_features}, dataset has {data.n_features}"
        )
    X = scaler.transform(data.features) if scaler is not None else data.features
    labels = model.predict(X)
    scores = model.score(X)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["chip_id", "region_id", "predicted_label", "score"])
    for i in range(len(data)):
        writer.writerow([data.chip_ids[i], int(data.region_ids[i]),
                         "trojan" if labels[i] == TROJAN else "golden", repr(float(scores[i]))])
    _write_output(args.out, buf.getvalue())
    return 0


def _sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param", "accuracy", "fpr", "fnr"])
    for param, r in rows:
        writer.writerow([param, repr(r.accuracy), repr(r.fpr), repr(r.fnr)])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    data = _load_dataset(args.data)
    if not 1 <= args.k_min <= args.k_max:
        raise UsageError(f"invalid k range --k-min {args.k_min} --k-max {args.k_max}")
    results = tuning.k_sweep(data, (args.k_min, args.k_max), args.reps, args.seed)
    _write_output(args.out, _sweep_csv((r.param, r) for r in results))
    log.info("selected k = %d", tuning.select_k(results, args.acc_slack))
    return 0


def cmd_grid(args) -> int:
    data = _load_dataset(args.data)
    try:
        grid = tuning.GridSpec(args.c_values, args.gamma_values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cells = tuning.grid_evaluate(data, grid, args.reps, args.seed, args.class_weights)
    _write_output(args.out, _sweep_csv((f"C={c:g};gamma={g:g}", r) for c, g, r in cells))
    c, g, _ = tuning.best_cell(cells)
    log.info("selected C = %g, gamma = %g", c, g)
    return 0


def _parse_spec(token: str, **hyper):
    try:
        return parse_classifier(token, **hyper)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_bench(args) -> int:
    hyper = {"k": args.k, "C": args.C, "gamma": args.gamma}
    if (args.C is None) != (args.gamma is None):
        raise UsageError("--C and --gamma must be given together")
    tokens = [t for t in args.classifiers.split(",") if t.strip()]
    if tokens == ["all"]:
        specs = standard_configurations(**hyper)
    else:
        specs = [_parse_spec(t, **hyper) for t in tokens]
    if not specs:
        raise UsageError("--classifiers is empty")
    data = _load_dataset(args.data)
    n_chips = len(data.chip_index)
    too_big = [s for s in args.sizes if not 1 <= s < n_chips]
    if too_big:
        raise UsageError(f"dataset has {n_chips} chips; sizes {too_big} leave no test chips")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    try:
        grid = tuning.GridSpec(args.c_values, args.gamma_values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_trials(
        data, specs, args.sizes, args.trials, args.seed,
        tie_break=args.tie_break, n_reps=args.reps, k_max=args.k_max, grid=grid,
        class_weights=args.class_weights, retune_per_trial=args.retune_per_trial,
        workers=args.threads,
    )
    markdown = emit_report(report, "markdown")
    table = emit_report(report, "csv")
    if args.out_csv:
        atomic_write_text(args.out_csv, table)
    _write_output(args.out_md, markdown)
    return 0


def cmd_report(args) -> int:
    try:
        text = Path(args.csv).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"report CSV not found: {args.csv}") from None
    try:
        report = report_from_csv(text)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{args.csv}: {exc}") from None
    _write_output(args.out, emit_report(report, args.format))
    return 0


def _write_output(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


# ------------------------------------------------------------------ parser


def _class_weights(text: str):
    text = text.strip().lower()
    if text == "balanced":
        return "balanced"
    if text == "none":
        return None
    raise argparse.ArgumentTypeError("expected 'balanced' or 'none'")


def _tie_break(text: str) -> TieBreak:
    try:
        return TieBreak.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p, seed=True):
    p.add_argument("--config", metavar="FILE", help="key=value file pre-populating flags")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _add_tuning(p):
    p.add_argument("--reps", type=int, default=tuning.DEFAULT_N_REPS,
                   help="validation resplits per tuning candidate")
    p.add_argument("--class-weights", type=_class_weights, default="balanced",
                   help="SVM per-class penalty: balanced or none")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="rontrojan",
        description="Hardware Trojan detection from ring-oscillator frequency fingerprints.",
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--synth-config", metavar="FILE", help="SynthConfig key=value file")
    defaults = SynthConfig()
    for field_name, dest in _SYNTH_FLAGS.items():
        default = getattr(defaults, field_name)
        p.add_argument(_flag(dest), dest=dest, type=type(default), default=None,
                       help=f"{field_name} (default {default:g})")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and save it with its scaler",
                       formatter_class=fmt)
    _add_common(p)
    _add_tuning(p)
    p.add_argument("--data", required=True, help="training dataset CSV")
    p.add_argument("--classifier", default="knn",
                   help="knn, svm, gnb or ensemble:<a>+<b>[+<c>]")
    p.add_argument("--k", type=int, default=None, help=f"KNN k (default {DEFAULT_K})")
    p.add_argument("--C", type=float, default=None, help=f"SVM C (default {DEFAULT_C:g})")
    p.add_argument("--gamma", type=float, default=None,
                   help=f"RBF gamma (default {DEFAULT_GAMMA:g})")
    p.add_argument("--tune", action="store_true",
                   help="tune unset KNN/SVM hyperparameters on the training data")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX, help="largest k tried by --tune")
    p.add_argument("--tie-break", type=_tie_break, default=TieBreak.PREFER_POSITIVE,
                   help="label for exact ties: prefer-positive or prefer-negative")
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="label a dataset with a saved model", formatter_class=fmt)
    _add_common(p, seed=False)
    p.add_argument("--model", required=True, help="model file from 'train'")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--out", default="-", help="prediction CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="KNN k sweep as CSV", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--k-min", type=int, default=1, help="smallest k")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX, help="largest k")
    p.add_argument("--reps", type=int, default=tuning.DEFAULT_N_REPS,
                   help="validation resplits per k")
    p.add_argument("--acc-slack", type=float, default=tuning.DEFAULT_ACC_SLACK,
                   help="accuracy slack used to report the selected k")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", help="SVM (C, gamma) grid search as CSV", formatter_class=fmt)
    _add_common(p)
    _add_tuning(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--c-values", type=_float_list, default=tuning.DEFAULT_C_VALUES,
                   help="comma-separated C values")
    p.add_argument("--gamma-values", type=_float_list, default=tuning.DEFAULT_GAMMA_VALUES,
                   help="comma-separated gamma values")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="repeated-trial benchmark with metric-by-size tables",
                       formatter_class=fmt)
    _add_common(p)
    _add_tuning(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--classifiers", default="all",
                   help="comma-separated tokens (knn, svm, gnb, ensemble:svm+knn+gnb, ...) or 'all'")
    p.add_argument("--sizes", type=_int_list, default=DEFAULT_SIZES,
                   help="training sizes in chips")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="trials per size")
    p.add_argument("--k", type=int, default=None, help="fix KNN k instead of tuning")
    p.add_argument("--C", type=float, default=None, help="fix SVM C instead of tuning")
    p.add_argument("--gamma", type=float, default=None, help="fix RBF gamma instead of tuning")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX, help="largest k in the sweep")
    p.add_argument("--c-values", type=_float_list, default=tuning.DEFAULT_C_VALUES,
                   help="grid C values")
    p.add_argument("--gamma-values", type=_float_list, default=tuning.DEFAULT_GAMMA_VALUES,
                   help="grid gamma values")
    p.add_argument("--retune-per-trial", action="store_true",
                   help="tune on every trial instead of once per size")
    p.add_argument("--tie-break", type=_tie_break, default=TieBreak.PREFER_POSITIVE,
                   help="label for exact ties: prefer-positive or prefer-negative")
    p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    p.add_argument("--out-md", default="-", help="markdown report path ('-' for stdout)")
    p.add_argument("--out-csv", default=None, help="long-form per-trial CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="render a per-trial CSV as tables", formatter_class=fmt)
    _add_common(p, seed=False)
    p.add_argument("--csv", required=True, help="per-trial CSV written by 'bench'")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown",
                   help="output format")
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn ``--config FILE`` entries into flags placed before the explicit ones."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        values = parse_key_values(Path(known.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {known.config}") from None
    except ValueError as exc:
        raise UsageError(f"{known.config}: {exc}") from None
    if not argv or argv[0].startswith("-"):
        return argv
    extra = []
    for key, value in values.items():
        flag = _flag(key)
        if value.lower() in ("true", "yes", "on"):
            extra.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            extra += [flag, value]
    # explicit flags come later and win
    return [argv[0], *extra, *argv[1:]]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
    except UsageError as exc:
        print(f"rontrojan: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    np.seterr(over="ignore", under="ignore")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rontrojan {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"rontrojan {args.command}: {exc}", file=sys.stderr)
        return 1
    except (RonTrojanError, ValueError) as exc:
        print(f"rontrojan {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"rontrojan {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

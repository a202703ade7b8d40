import pytest

from rontrojan.classifiers import gnb_train, knn_train
from rontrojan.dataset import apply_scaler, fit_scaler
from rontrojan.evaluation import (
    ClassifierSpec,
    TrialRecord,
    TrialReport,
    emit_report,
    parse_classifier,
    report_from_csv,
    run_trials,
    standard_configurations,
    trial_split,
)
from rontrojan.metrics import ConfusionCounts, RateMetrics, confusion, rates
from rontrojan.synth import SynthConfig, generate


@pytest.fixture(scope="module")
def bench(default_corpus):
    return run_trials(default_corpus, standard_configurations(), n_trials=3, seed=4, n_reps=3)


def test_single_trial_equals_manual_pipeline(default_corpus):
    report = run_trials(default_corpus, [ClassifierSpec("knn", k=2), "gnb"], sizes=(12,),
                        n_trials=1, seed=21)
    train, test = trial_split(default_corpus, 12, 0, 21)
    scaler = fit_scaler(train)
    z_train, z_test = apply_scaler(scaler, train), apply_scaler(scaler, test)
    for name, model in (("knn", knn_train(z_train, 2)), ("gnb", gnb_train(z_train))):
        counts = confusion(model.predict(z_test.features), test.labels)
        assert report.trials[[r.classifier for r in report.trials].index(name)].counts == counts
        assert report.means[name][12] == rates(counts)


def test_default_protocol_shape(bench):
    assert bench.sizes == (6, 12, 24)
    assert len(bench.classifiers) == 7
    for name in bench.classifiers:
        assert set(bench.means[name]) == {6, 12, 24}
        for m in bench.means[name].values():
            assert all(0 <= v <= 1 for v in m.as_dict().values())
    assert len(bench.trials) == 7 * 3 * 3
    for r in bench.trials:
        c, m = r.counts, r.metrics
        assert c.total == 25 * (32 - r.size)
        assert abs(m.tpr + m.fnr - 1) <= 1e-12 and abs(m.tnr + m.fpr - 1) <= 1e-12


def test_hyperparameters_recorded(bench):
    hp = bench.hyperparameters
    assert set(hp["knn"][6]) == {"k"}
    assert set(hp["svm"][24]) == {"C", "gamma"}
    assert hp["gnb"][12] == {}
    assert hp["ensemble:svm+knn+gnb"][6] == {**hp["knn"][6], **hp["svm"][6]}


def test_classifier_order_does_not_matter(default_corpus):
    specs = [parse_classifier(t) for t in ("knn", "gnb", "ensemble:knn+gnb")]
    a = run_trials(default_corpus, specs, sizes=(6, 12), n_trials=2, seed=5, n_reps=2)
    b = run_trials(default_corpus, specs[::-1], sizes=(6, 12), n_trials=2, seed=5, n_reps=2)
    for name in a.classifiers:
        assert a.means[name] == b.means[name]


def test_threads_do_not_change_results(default_corpus):
    kw = dict(sizes=(6,), n_trials=4, seed=6, n_reps=2)
    specs = ["knn", "svm", "ensemble:svm+knn"]
    a = run_trials(default_corpus, specs, workers=1, **kw)
    b = run_trials(default_corpus, specs, workers=4, **kw)
    assert a.trials == b.trials and a.means == b.means


def test_deterministic(default_corpus):
    a = run_trials(default_corpus, ["gnb", "knn"], sizes=(6,), n_trials=2, seed=3, n_reps=2)
    b = run_trials(default_corpus, ["gnb", "knn"], sizes=(6,), n_trials=2, seed=3, n_reps=2)
    assert emit_report(a, "csv") == emit_report(b, "csv")


def test_per_trial_retuning_runs(default_corpus):
    report = run_trials(default_corpus, ["knn"], sizes=(6,), n_trials=2, seed=1, n_reps=2,
                        retune_per_trial=True)
    assert len(report.trials) == 2


@pytest.mark.parametrize("kwargs", [dict(sizes=(32,)), dict(sizes=(0,)), dict(n_trials=0)])
def test_argument_errors(default_corpus, kwargs):
    with pytest.raises(ValueError):
        run_trials(default_corpus, ["knn"], **kwargs)


def test_no_classifiers(default_corpus):
    with pytest.raises(ValueError):
        run_trials(default_corpus, [])


def test_classifier_tokens():
    assert parse_classifier("ensemble:svm+knn+gnb").name == "ensemble:svm+knn+gnb"
    assert parse_classifier("SVM").name == "svm"
    with pytest.raises(ValueError, match="valid tokens"):
        parse_classifier("forest")
    with pytest.raises(ValueError):
        parse_classifier("ensemble:knn")
    names = [s.name for s in standard_configurations()]
    assert names == ["knn", "svm", "gnb", "ensemble:svm+knn+gnb", "ensemble:svm+knn",
                     "ensemble:knn+gnb", "ensemble:svm+gnb"]


def test_high_signal_svm_fpr_does_not_grow():
    data = generate(SynthConfig(trojan_drop_rel_min=0.02, trojan_drop_rel_max=0.03), seed=2)
    report = run_trials(data, ["svm"], sizes=(6, 24), n_trials=20, seed=0)
    assert report.metric("svm", 24, "fpr") <= report.metric("svm", 6, "fpr")


# --------------------------------------------------------------- reporting


def _fabricated() -> TrialReport:
    def row(fpr, acc):
        return RateMetrics(tpr=0.9, tnr=1 - fpr, fpr=fpr, fnr=0.1, accuracy=acc)

    means = {
        "knn": {6: row(0.3, 0.9), 12: row(0.185, 0.93), 24: row(0.094, 0.945)},
        "svm": {6: row(0.555, 0.940), 12: row(0.355, 0.946), 24: row(0.071, 0.974)},
    }
    return TrialReport(("knn", "svm"), (6, 12, 24), 20, 0, means)


def test_markdown_layout():
    text = emit_report(_fabricated(), "markdown")
    assert "## knn" in text and "## svm" in text
    assert "| Metric | 6 Samples | 12 Samples | 24 Samples |" in text
    assert "| FPR | 0.300 | 0.185 | 0.094 |" in text
    assert "| Accuracy | 0.940 | 0.946 | 0.974 |" in text
    rows = [line.split("|")[1].strip() for line in text.splitlines()
            if line.startswith("| ") and "Metric" not in line]
    assert rows[:5] == ["TNR", "FPR", "FNR", "TPR", "Accuracy"]
    assert "FPR ~0.50" in text


def test_csv_round_trip_to_markdown(bench):
    text = emit_report(bench, "csv")
    assert text.splitlines()[0] == "classifier,size,trial,tp,tn,fp,fn,tpr,tnr,fpr,fnr,accuracy"
    again = report_from_csv(text)
    assert emit_report(again, "markdown") == emit_report(bench, "markdown")
    assert emit_report(again, "csv") == text


def test_flagged_trials_are_noted():
    counts = ConfusionCounts(tp=5, tn=0, fp=0, fn=1)
    rec = TrialRecord("knn", 6, 0, counts, rates(counts))
    report = TrialReport(("knn",), (6,), 1, 0, {"knn": {6: rates(counts)}}, [rec])
    assert rec.flagged
    assert "1 trial(s)" in emit_report(report, "markdown")


def test_report_errors():
    empty = TrialReport((), (6,), 1, 0, {})
    with pytest.raises(ValueError):
        emit_report(empty, "markdown")
    with pytest.raises(ValueError):
        emit_report(_fabricated(), "html")
    with pytest.raises(ValueError):
        report_from_csv("a,b\n1,2\n")

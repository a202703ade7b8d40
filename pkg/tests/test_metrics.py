from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rontrojan.dataset import GOLDEN, TROJAN
from rontrojan.metrics import ConfusionCounts, confusion, mean_rates, rates

T, F = TROJAN, GOLDEN


def test_perfect_predictor():
    truth = [T] * 5 + [F] * 5
    assert confusion(truth, truth) == ConfusionCounts(tp=5, tn=5, fp=0, fn=0)


def test_inverted_predictor():
    truth = [T] * 5 + [F] * 5
    assert confusion([-t for t in truth], truth) == ConfusionCounts(tp=0, tn=0, fp=5, fn=5)


def test_hand_count():
    truth = [T, T, F, F, F]
    pred = [T, F, T, F, F]
    assert confusion(pred, truth) == ConfusionCounts(tp=1, tn=2, fp=1, fn=1)


@pytest.mark.parametrize("pred,truth", [([T], [T, F]), ([], []), ([0], [T])])
def test_confusion_errors(pred, truth):
    with pytest.raises(ValueError):
        confusion(pred, truth)


def test_rate_arithmetic():
    m = rates(ConfusionCounts(tp=9, fn=1, tn=8, fp=2))
    assert (m.tpr, m.fnr, m.tnr, m.fpr) == (0.9, 0.1, 0.8, 0.2)
    assert m.accuracy == 0.85
    assert m.degenerate == ()


def test_zero_false_positives():
    assert rates(ConfusionCounts(tp=1, tn=4, fp=0, fn=0)).fpr == 0.0


def test_zero_denominators_are_flagged():
    m = rates(ConfusionCounts(tp=3, tn=0, fp=0, fn=1))
    assert (m.tnr, m.fpr) == (1.0, 0.0)
    assert m.degenerate == ("no_negatives",)
    m = rates(ConfusionCounts(tp=0, tn=2, fp=1, fn=0))
    assert (m.tpr, m.fnr) == (1.0, 0.0)
    assert m.degenerate == ("no_positives",)


def test_empty_table_rejected():
    with pytest.raises(ValueError):
        rates(ConfusionCounts(0, 0, 0, 0))
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


def test_summary_format():
    m = rates(ConfusionCounts(tp=0, tn=0, fp=0, fn=0) + ConfusionCounts(tp=1, tn=0, fp=0, fn=0))
    assert m.summary() == "FPR 0.000 / Accuracy 1.000"
    row = type(m)(tpr=0.0, tnr=0.906, fpr=0.094, fnr=0.0, accuracy=0.945)
    assert row.summary() == "FPR 0.094 / Accuracy 0.945"


counts = st.builds(ConfusionCounts, *(st.integers(0, 10_000) for _ in range(4))).filter(
    lambda c: c.total > 0
)


@given(counts)
def test_identities_against_exact_fractions(c):
    m = rates(c)
    pos, neg = c.tp + c.fn, c.tn + c.fp
    if pos:
        assert m.tpr == float(Fraction(c.tp, pos))
        assert abs(m.tpr + m.fnr - 1) <= 1e-12
    if neg:
        assert m.fpr == float(Fraction(c.fp, neg))
        assert abs(m.tnr + m.fpr - 1) <= 1e-12
    assert m.accuracy == float(Fraction(c.tp + c.tn, c.total))
    assert abs(m.accuracy - (1 - (c.fp + c.fn) / c.total)) <= 1e-12


@given(st.lists(st.sampled_from([T, F]), min_size=1, max_size=60), st.data())
def test_perfect_predictor_dominates(truth, data):
    other = data.draw(st.lists(st.sampled_from([T, F]), min_size=len(truth), max_size=len(truth)))
    best = rates(confusion(truth, truth))
    m = rates(confusion(other, truth))
    assert best.accuracy >= m.accuracy and best.tpr >= m.tpr and best.tnr >= m.tnr


def test_mean_rates():
    a = rates(ConfusionCounts(1, 1, 0, 0))
    b = rates(ConfusionCounts(1, 0, 0, 1))
    m = mean_rates([a, b])
    assert m.accuracy == 0.75
    assert m.degenerate == ("no_negatives",)
    with pytest.raises(ValueError):
        mean_rates([])
    assert np.isclose(m.tpr + m.fnr, 1.0)

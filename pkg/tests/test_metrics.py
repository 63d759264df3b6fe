import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import (
    cohen_kappa_score,
    matthews_corrcoef,
    precision_recall_fscore_support,
)

from lectometer.errors import DegenerateInputError, ShapeError
from lectometer.metrics import ConfusionMatrix, confusion, mae, metric_suite


def cm(rows, labels=None):
    return ConfusionMatrix(labels or tuple(range(len(rows))), tuple(map(tuple, rows)))


def expand(counts):
    """Label vectors (truth, pred) that produce a given confusion matrix."""
    truth, pred = [], []
    for i, row in enumerate(counts):
        for j, c in enumerate(row):
            truth += [i] * c
            pred += [j] * c
    return truth, pred


class TestConfusion:
    def test_diagonal(self):
        m = confusion(list("aabc"), list("aabc"), "abc")
        assert m.counts == ((2, 0, 0), (0, 1, 0), (0, 0, 1))

    def test_rows_are_actual(self):
        m = confusion(["H"] * 10, ["L"] * 10, ["H", "L"])
        assert m.counts == ((0, 0), (10, 0))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            confusion([1], [1, 2], [1, 2])

    def test_unknown_label(self):
        with pytest.raises(ShapeError):
            confusion([3], [1], [1, 2])


class TestSuite:
    def test_reconstructed_expressions(self):
        s = metric_suite(cm([[64, 4], [13, 19]]))
        assert s.accuracy == pytest.approx(0.830, abs=1e-3)
        assert s.precision_weighted == pytest.approx(0.829, abs=1e-3)
        assert s.f1_weighted == pytest.approx(0.821, abs=1e-3)
        assert s.mcc == pytest.approx(0.593, abs=1e-3)
        assert s.kappa == pytest.approx(0.578, abs=1e-3)
        assert s.error == pytest.approx(0.170, abs=1e-3)

    def test_identity(self):
        s = metric_suite(cm([[50, 0], [0, 50]]))
        assert (s.accuracy, s.kappa, s.mcc, s.error) == (1.0, 1.0, 1.0, 0.0)

    def test_uniform(self):
        s = metric_suite(cm([[25, 25], [25, 25]]))
        assert (s.accuracy, s.kappa, s.mcc) == (0.5, 0.0, 0.0)

    def test_empty(self):
        with pytest.raises(DegenerateInputError):
            metric_suite(cm([[0, 0], [0, 0]]))

    def test_single_populated_class(self):
        s = metric_suite(cm([[7, 0], [0, 0]]))
        assert (s.accuracy, s.kappa, s.mcc) == (1.0, 1.0, 1.0)

    def test_zero_predicted_column_has_zero_precision(self):
        s = metric_suite(cm([[5, 0], [5, 0]]))
        assert s.precision_weighted == pytest.approx(0.5 * 0.5)
        assert s.mcc == 0.0 and s.kappa == 0.0

    def test_absent_class_dropped(self):
        a = metric_suite(cm([[3, 1, 0], [2, 4, 0], [0, 0, 0]]))
        b = metric_suite(cm([[3, 1], [2, 4]]))
        assert a == b

    def test_non_square(self):
        with pytest.raises(ShapeError):
            ConfusionMatrix((0, 1), ((1, 2),))


matrices = st.integers(2, 4).flatmap(
    lambda k: st.lists(st.lists(st.integers(0, 30), min_size=k, max_size=k), min_size=k, max_size=k)
).filter(lambda rows: sum(map(sum, rows)) > 0)


@settings(max_examples=1000, deadline=None)
@given(matrices)
def test_identities(rows):
    s = metric_suite(cm(rows))
    assert s.error == 1.0 - s.accuracy
    assert s.recall_weighted == s.accuracy
    assert -1.0 <= s.mcc <= 1.0
    assert s.kappa <= 1.0


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_matches_sklearn(rows):
    truth, pred = expand(rows)
    s = metric_suite(cm(rows))
    present = sorted(set(truth) | set(pred))
    p, r, f, _ = precision_recall_fscore_support(
        truth, pred, labels=present, average="weighted", zero_division=0)
    assert s.precision_weighted == pytest.approx(p, abs=1e-12)
    assert s.recall_weighted == pytest.approx(r, abs=1e-12)
    assert s.f1_weighted == pytest.approx(f, abs=1e-12)
    if truth != pred:
        assert s.mcc == pytest.approx(matthews_corrcoef(truth, pred), abs=1e-12)
        if len(set(truth)) > 1 or len(set(pred)) > 1:
            assert s.kappa == pytest.approx(cohen_kappa_score(truth, pred), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(matrices, st.randoms(use_true_random=False))
def test_relabel_invariance(rows, rnd):
    k = len(rows)
    perm = list(range(k))
    rnd.shuffle(perm)
    permuted = [[rows[perm[i]][perm[j]] for j in range(k)] for i in range(k)]
    a, b = metric_suite(cm(rows)), metric_suite(cm(permuted))
    assert a.kappa == pytest.approx(b.kappa, abs=1e-12)
    assert a.mcc == pytest.approx(b.mcc, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_perfect_iff_diagonal(rows):
    s = metric_suite(cm(rows))
    diagonal = all(rows[i][j] == 0 for i in range(len(rows)) for j in range(len(rows)) if i != j)
    assert (s.kappa == 1.0 and s.mcc == 1.0) == diagonal


class TestMae:
    def test_equal(self):
        assert mae([1, 2, 3], [1, 2, 3]) == 0.0

    def test_example(self):
        assert mae([1, 2], [2, 4]) == 1.5

    def test_mismatch(self):
        with pytest.raises(ShapeError):
            mae([1], [1, 2])

    def test_empty(self):
        with pytest.raises(ShapeError):
            mae([], [])

    @settings(max_examples=1000)
    @given(st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), min_size=1, max_size=30))
    def test_properties(self, pairs):
        x, y = [p[0] for p in pairs], [p[1] for p in pairs]
        assert mae(x, x) == 0.0
        assert mae(x, y) == mae(y, x) >= 0
        assert (mae(x, y) == 0) == (x == y)
        assert mae(x, y) == pytest.approx(np.mean(np.abs(np.array(x) - np.array(y))))

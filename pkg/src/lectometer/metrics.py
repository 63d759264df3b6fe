"""Confusion matrices and the classification metric suite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import DegenerateInputError, RangeError, ShapeError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns are predicted classes."""

    labels: tuple
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        k = len(self.labels)
        counts = tuple(tuple(int(v) for v in row) for row in self.counts)
        if len(counts) != k or any(len(r) != k for r in counts):
            raise ShapeError("confusion matrix must be square and match its labels")
        if any(v < 0 for r in counts for v in r):
            raise RangeError("counts must be non-negative")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", counts)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64).reshape(len(self.labels), len(self.labels))

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))

    def to_dict(self) -> dict:
        return {"labels": [str(lab) for lab in self.labels], "counts": [list(r) for r in self.counts]}


def confusion(pred: Sequence[Hashable], truth: Sequence[Hashable], classes: Sequence[Hashable]) -> ConfusionMatrix:
    if len(pred) != len(truth):
        raise ShapeError(f"{len(pred)} predictions for {len(truth)} truth labels")
    index = {c: i for i, c in enumerate(classes)}
    grid = [[0] * len(classes) for _ in classes]
    for p, t in zip(pred, truth):
        if p not in index or t not in index:
            raise ShapeError(f"label {p if p not in index else t!r} is not one of {list(classes)}")
        grid[index[t]][index[p]] += 1
    return ConfusionMatrix(tuple(classes), tuple(map(tuple, grid)))


@dataclass(frozen=True)
class MetricSuite:
    accuracy: float
    recall_weighted: float
    precision_weighted: float
    f1_weighted: float
    mcc: float
    kappa: float
    error: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def metric_suite(m: ConfusionMatrix) -> MetricSuite:
    """Accuracy, support-weighted precision/recall/F1, multiclass MCC,
    Cohen's kappa and error for one confusion matrix.

    Classes absent from both truth and predictions are dropped first.
    Degenerate chance terms (a single populated class) resolve to 1 for
    perfect agreement and 0 otherwise.
    """
    c = m.array.astype(np.float64)
    n = c.sum()
    if n <= 0:
        raise DegenerateInputError("confusion matrix is empty")
    keep = (c.sum(axis=0) + c.sum(axis=1)) > 0
    c = c[np.ix_(keep, keep)]

    actual = c.sum(axis=1)
    predicted = c.sum(axis=0)
    tp = np.diag(c)
    correct = tp.sum()
    accuracy = correct / n

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    weights = actual / n
    precision_w = float(np.dot(weights, precision))
    # weight_k * recall_k == tp_k / n; summing that form keeps the
    # recall == accuracy identity exact in floating point
    recall_w = float(tp.sum() / n)
    f1_w = float(np.dot(weights, f1))

    perfect = correct == n
    # Gorodkin's R_K
    cov_tp = correct * n - float(np.dot(actual, predicted))
    cov_pp = n * n - float(np.dot(predicted, predicted))
    cov_tt = n * n - float(np.dot(actual, actual))
    if perfect:
        mcc = 1.0
    elif cov_pp > 0 and cov_tt > 0:
        mcc = cov_tp / math.sqrt(cov_pp * cov_tt)
    else:
        mcc = 0.0

    p_e = float(np.dot(actual, predicted)) / (n * n)
    if perfect:
        kappa = 1.0
    elif p_e < 1.0:
        kappa = (accuracy - p_e) / (1.0 - p_e)
    else:
        kappa = 0.0

    accuracy = float(accuracy)
    return MetricSuite(
        accuracy=accuracy,
        recall_weighted=recall_w,
        precision_weighted=precision_w,
        f1_weighted=f1_w,
        mcc=float(max(-1.0, min(1.0, mcc))),
        kappa=float(kappa),
        error=1.0 - accuracy,
    )


def mae(pred: Sequence[float], truth: Sequence[float]) -> float:
    if len(pred) != len(truth):
        raise ShapeError(f"{len(pred)} predictions for {len(truth)} truth values")
    if not pred:
        raise ShapeError("mean absolute error of empty sequences")
    return math.fsum(abs(p - t) for p, t in zip(pred, truth)) / len(pred)

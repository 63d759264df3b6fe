"""Evaluation of system output against multi-annotator Likert ratings.

Ground truth is the per-item prevailing mode of the annotators' ratings:
binarized (1-2 low, 3-4 high) for the five modalities and raw 1-4 for the
overall rating. Machine output is compared with that ground truth, humans
are compared with each other by leave-one-out, and the two groups' error
distributions are tested with chi-square plus Holm correction.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .errors import CoverageError, RangeError
from .fusion import FrameScore
from .metrics import ConfusionMatrix, MetricSuite, confusion, mae, metric_suite
from .observation import AnnotationSet
from .stats import chi_square_independence, holm_bonferroni


class Quality(IntEnum):
    LOW = 0
    HIGH = 1


# evaluated modality -> annotation column, in reporting order
MODALITY_FIELDS = {
    "expression": "expression",
    "activity": "activity",
    "speech": "speech",
    "hand": "hand",
    "pose": "head",
    "overall": "overall",
}
BINARY_CLASSES = (Quality.HIGH, Quality.LOW)
LIKERT_CLASSES = (1, 2, 3, 4)


def binarize_likert(rating: int) -> Quality:
    if rating not in (1, 2, 3, 4):
        raise RangeError(f"Likert rating {rating!r} outside 1..4")
    return Quality.HIGH if rating >= 3 else Quality.LOW


def prevailing_mode(values: Sequence[Hashable]):
    """Most frequent value; ties go to the smallest (lowest quality) value."""
    if not values:
        raise ValueError("prevailing mode of an empty list")
    counts = Counter(values)
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


def machine_to_likert(total: int) -> int:
    """Map a 0-5 frame total onto the annotators' 1-4 scale."""
    if total not in range(6):
        raise RangeError(f"frame total {total!r} outside 0..5")
    return (1, 2, 2, 3, 3, 4)[total]


def _ratings(ann: AnnotationSet, column: str) -> list[tuple[str, str, int]]:
    """(annotator, item, rating) triples for one annotation column."""
    if column == "speech":
        return [(r.annotator_id, r.item_id, r.speech) for r in ann.audio_items]
    return [(r.annotator_id, r.item_id, getattr(r, column)) for r in ann.frame_items]


def _label(column: str, rating: int):
    return rating if column == "overall" else binarize_likert(rating)


@dataclass(frozen=True)
class GroundTruth:
    """Per evaluated modality: item id -> consensus label."""

    labels: Mapping[str, Mapping[str, object]]

    def items(self, modality: str) -> list[str]:
        return sorted(self.labels.get(modality, {}), key=_item_key)

    def __getitem__(self, modality: str) -> Mapping[str, object]:
        return self.labels[modality]


def _item_key(item_id: str):
    # numeric ids sort numerically, others lexically after them
    try:
        return (0, int(item_id), "")
    except ValueError:
        return (1, 0, item_id)


def build_ground_truth(
    ann: AnnotationSet,
    frame_items: Optional[Iterable[str]] = None,
    audio_items: Optional[Iterable[str]] = None,
) -> GroundTruth:
    """Consensus label per item and modality.

    ``frame_items`` / ``audio_items`` name items that must be covered; any of
    them without a single rating is a coverage error.
    """
    labels: dict[str, dict[str, object]] = {}
    for modality, column in MODALITY_FIELDS.items():
        per_item: dict[str, list] = {}
        for _, item, rating in _ratings(ann, column):
            per_item.setdefault(item, []).append(_label(column, rating))
        expected = audio_items if column == "speech" else frame_items
        if expected is not None:
            empty = sorted((i for i in expected if i not in per_item), key=_item_key)
            if empty:
                raise CoverageError(f"{modality} items without ratings: {', '.join(empty)}", empty)
        if per_item:
            labels[modality] = {item: prevailing_mode(v) for item, v in per_item.items()}
    return GroundTruth(labels)


@dataclass(frozen=True)
class LooResult:
    per_annotator: dict[str, float]
    mean: float


def loo_agreement(ann: AnnotationSet, field: str) -> LooResult:
    """Leave-one-out agreement among annotators on one annotation column.

    Each annotator in turn is scored (MAE) against the prevailing mode of all
    the others. Binary columns are compared after binarization, ``overall``
    on the raw 1-4 scale.
    """
    column = MODALITY_FIELDS.get(field, field)
    table: dict[str, dict[str, int]] = {}
    for a, item, rating in _ratings(ann, column):
        table.setdefault(a, {})[item] = rating
    annotators = sorted(table)
    if len(annotators) < 2:
        raise CoverageError("leave-one-out needs at least two annotators")
    items = sorted({i for r in table.values() for i in r}, key=_item_key)
    missing = [f"{a}:{i}" for a in annotators for i in items if i not in table[a]]
    if missing:
        raise CoverageError(f"annotators missing items: {', '.join(missing)}", missing)

    maes = {}
    for a in annotators:
        others = [b for b in annotators if b != a]
        truth = [prevailing_mode([_label(column, table[b][i]) for b in others]) for i in items]
        own = [_label(column, table[a][i]) for i in items]
        maes[a] = mae([int(v) for v in own], [int(v) for v in truth])
    return LooResult(maes, math.fsum(maes.values()) / len(maes))


@dataclass(frozen=True)
class ComparisonRow:
    modality: str
    human_mae_mean: float
    human_mae_sd: float
    machine_mae_mean: float
    machine_mae_sd: float
    chi2_stat: float
    dof: int
    p_raw: float
    p_adjusted: float
    significant: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    mean = math.fsum(values) / len(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


def error_contingency(human_errors: Sequence[float], machine_errors: Sequence[float]) -> list[list[int]]:
    """Group x distinct-error-value count table."""
    values = sorted(set(human_errors) | set(machine_errors))
    h, m = Counter(human_errors), Counter(machine_errors)
    return [[h[v] for v in values], [m[v] for v in values]]


def _machine_label(modality: str, value: int):
    return machine_to_likert(value) if modality == "overall" else Quality(int(value))


def compare_human_machine(
    machine_preds: Mapping[str, Mapping[str, int]],
    annotations: AnnotationSet,
    ground_truth: GroundTruth,
    alpha: float = 0.05,
) -> list[ComparisonRow]:
    """Human-vs-machine absolute-error comparison per modality.

    ``machine_preds`` maps modality -> item id -> machine output: a 0/1
    sub-score, or the 0-5 frame total for ``overall`` (mapped onto 1-4).
    Human errors are pooled over all annotator ratings.
    """
    partial = []
    for modality, column in MODALITY_FIELDS.items():
        if modality not in ground_truth.labels:
            continue
        truth = ground_truth[modality]
        preds = machine_preds.get(modality, {})
        missing = [i for i in ground_truth.items(modality) if i not in preds]
        if missing:
            raise CoverageError(
                f"no machine output for {modality} items: {', '.join(missing)}", missing
            )
        machine_err = [
            abs(int(_machine_label(modality, preds[i])) - int(truth[i]))
            for i in ground_truth.items(modality)
        ]
        human_err = [
            abs(int(_label(column, r)) - int(truth[item]))
            for _, item, r in _ratings(annotations, column)
        ]
        table = error_contingency(human_err, machine_err)
        if len(table[0]) < 2:
            stat, dof, p = 0.0, 0, 1.0
        else:
            stat, dof, p = chi_square_independence(table)
        partial.append((modality, _mean_sd(human_err), _mean_sd(machine_err), stat, dof, p))

    adjusted, reject = holm_bonferroni([row[5] for row in partial], alpha)
    return [
        ComparisonRow(mod, hm, hs, mm, ms, stat, dof, p, adj, rej)
        for (mod, (hm, hs), (mm, ms), stat, dof, p), adj, rej in zip(partial, adjusted, reject)
    ]


# ---------------------------------------------------------- whole protocol

@dataclass(frozen=True)
class ModalityEvaluation:
    modality: str
    machine_confusion: ConfusionMatrix
    machine_suite: MetricSuite
    machine_mae: float
    human_confusion: ConfusionMatrix
    human_suite: MetricSuite


def machine_predictions(
    frames: Sequence[FrameScore],
    annotations: AnnotationSet,
    alignment: Optional[Mapping[str, int]] = None,
) -> dict[str, dict[str, int]]:
    """Look up the machine output for every annotated item.

    Without an alignment map, item ids are read as frame indices.
    """
    by_frame = {f.frame_idx: f for f in frames}
    items = {r.item_id for r in annotations.frame_items} | {r.item_id for r in annotations.audio_items}
    if alignment is not None:
        unrated = sorted((i for i in alignment if i not in items), key=_item_key)
        if unrated:
            raise CoverageError(f"items missing from annotations: {', '.join(unrated)}", unrated)
    unmatched = []
    frame_of: dict[str, int] = {}
    for item in sorted(items, key=_item_key):
        if alignment is not None:
            idx = alignment.get(item)
        else:
            try:
                idx = int(item)
            except ValueError:
                idx = None
        if idx is None or idx not in by_frame:
            unmatched.append(item)
        else:
            frame_of[item] = idx
    if unmatched:
        raise CoverageError(f"items without a matching report frame: {', '.join(unmatched)}", unmatched)

    out: dict[str, dict[str, int]] = {m: {} for m in MODALITY_FIELDS}
    for item, idx in frame_of.items():
        f = by_frame[idx]
        for modality in ("expression", "activity", "speech", "hand", "pose"):
            out[modality][item] = getattr(f.parts, modality)
        out["overall"][item] = f.total
    return out


def evaluate(
    frames: Sequence[FrameScore],
    annotations: AnnotationSet,
    alignment: Optional[Mapping[str, int]] = None,
    alpha: float = 0.05,
) -> dict:
    """Run the complete protocol and return a JSON-ready result."""
    gt = build_ground_truth(annotations)
    preds = machine_predictions(frames, annotations, alignment)
    modalities = {}
    for modality, column in MODALITY_FIELDS.items():
        if modality not in gt.labels:
            continue
        classes = LIKERT_CLASSES if modality == "overall" else BINARY_CLASSES
        items = gt.items(modality)
        truth = [gt[modality][i] for i in items]
        mpred = [_machine_label(modality, preds[modality][i]) for i in items]
        mconf = confusion(mpred, truth, classes)
        ratings = _ratings(annotations, column)
        hconf = confusion(
            [_label(column, r) for _, _, r in ratings],
            [gt[modality][item] for _, item, _ in ratings],
            classes,
        )
        modalities[modality] = ModalityEvaluation(
            modality, mconf, metric_suite(mconf), mae([int(v) for v in mpred], [int(v) for v in truth]),
            hconf, metric_suite(hconf),
        )
    loo = {m: loo_agreement(annotations, m) for m in modalities}
    rows = compare_human_machine(preds, annotations, gt, alpha)

    def conf_dict(c: ConfusionMatrix) -> dict:
        labels = [lab.name.capitalize() if isinstance(lab, Quality) else str(lab) for lab in c.labels]
        return {"labels": labels, "counts": [list(r) for r in c.counts]}

    return {
        "alpha": alpha,
        "item_counts": {m: len(gt.items(m)) for m in modalities},
        "annotators": annotations.annotators(),
        "machine": {
            m: {"metrics": e.machine_suite.to_dict(), "mae": e.machine_mae,
                "confusion": conf_dict(e.machine_confusion)}
            for m, e in modalities.items()
        },
        "human": {
            m: {"metrics": e.human_suite.to_dict(), "confusion": conf_dict(e.human_confusion)}
            for m, e in modalities.items()
        },
        "leave_one_out": {
            m: {"per_annotator": r.per_annotator, "mean_mae": r.mean} for m, r in loo.items()
        },
        "comparison": [r.to_dict() for r in rows],
    }


def render_evaluation_text(result: dict) -> str:
    names = list(result["machine"])
    lines = ["Machine vs ground truth", ""]
    header = f"{'measure':<12}" + "".join(f"{n:>12}" for n in names)
    lines.append(header)
    for key, title in (
        ("accuracy", "accuracy"), ("recall_weighted", "recall"),
        ("precision_weighted", "precision"), ("f1_weighted", "f1"),
        ("mcc", "mcc"), ("kappa", "kappa"), ("error", "error"),
    ):
        lines.append(f"{title:<12}" + "".join(
            f"{result['machine'][n]['metrics'][key]:>12.3f}" for n in names))
    lines.append(f"{'mae':<12}" + "".join(f"{result['machine'][n]['mae']:>12.3f}" for n in names))
    lines += ["", "Leave-one-out annotator agreement (mean MAE)", ""]
    for n, r in result["leave_one_out"].items():
        lines.append(f"{n:<12}{r['mean_mae']:>12.3f}")
    lines += ["", f"Human vs machine absolute error (alpha={result['alpha']})", ""]
    lines.append(f"{'modality':<12}{'human M (SD)':>18}{'machine M (SD)':>18}{'chi2':>10}{'p':>9}{'p_adj':>9}")
    for row in result["comparison"]:
        star = "*" if row["significant"] else ""
        lines.append(
            f"{row['modality']:<12}"
            f"{row['human_mae_mean']:>9.2f} ({row['human_mae_sd']:.3f})"
            f"{row['machine_mae_mean']:>9.2f} ({row['machine_mae_sd']:.3f})"
            f"{row['chi2_stat']:>10.3f}{row['p_raw']:>9.3f}{row['p_adjusted']:>9.3f}{star}"
        )
    return "\n".join(lines) + "\n"

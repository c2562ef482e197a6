"""Detection evaluation engine: matching, precision/recall, AP, mAP,
confusion matrix with a background pseudo-class, and dataset-level reports.

Conventions fixed here (and relied on by the tests):
  - greedy matching processes predictions in descending confidence, ties
    broken by lower prediction index; a prediction claims the unclaimed
    ground truth with the highest IoU, ties broken by lower GT index;
  - AP uses all-point interpolation (precision envelope from the right,
    integrated over recall);
  - the confusion matrix is row = truth, column = prediction, with the
    background class as the last index; the background/background cell
    stays 0 by construction;
  - accuracy is trace / total of the detection confusion matrix.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import Detection, GroundTruth, iou

MAP50_THRESHOLDS: tuple[float, ...] = (0.50,)
MAP50_95_THRESHOLDS: tuple[float, ...] = (
    0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95,
)


@dataclass(frozen=True)
class Assignment:
    """Outcome for one prediction: TP with the GT it claimed, or FP."""

    pred_index: int
    matched_gt_index: int | None
    outcome: str  # "TP" or "FP"


@dataclass(frozen=True)
class MatchResult:
    assignments: tuple[Assignment, ...]  # in descending-confidence processing order
    fn_count: int

    def tp_count(self) -> int:
        return sum(1 for a in self.assignments if a.outcome == "TP")

    def fp_count(self) -> int:
        return sum(1 for a in self.assignments if a.outcome == "FP")


def match_detections(
    preds: Sequence[Detection],
    gts: Sequence[GroundTruth],
    iou_threshold: float,
) -> MatchResult:
    """Greedily match predictions to ground truths of the same class.

    A prediction is a TP iff some unclaimed GT of the same class overlaps
    it with IoU >= iou_threshold; each GT can be claimed once. Unmatched
    GTs are counted as false negatives.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1]: {iou_threshold}")
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    claimed = [False] * len(gts)
    assignments = []
    for pi in order:
        pred = preds[pi]
        best_gt = None
        best_iou = 0.0
        for gi, gt in enumerate(gts):
            if claimed[gi] or gt.class_id != pred.class_id:
                continue
            overlap = iou(pred.bbox, gt.bbox)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_gt = gi
        if best_gt is not None:
            claimed[best_gt] = True
            assignments.append(Assignment(pi, best_gt, "TP"))
        else:
            assignments.append(Assignment(pi, None, "FP"))
    fn = claimed.count(False)
    return MatchResult(tuple(assignments), fn)


def precision_recall(match: MatchResult) -> tuple[float, float]:
    """Precision and recall from a match result.

    0/0 is defined as 0 for precision (no predictions) and as 1 for
    recall (nothing to find, nothing missed).
    """
    tp = match.tp_count()
    fp = match.fp_count()
    fn = match.fn_count
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 1.0
    return precision, recall


def average_precision(ranked: Sequence[tuple[float, bool]], num_gt: int) -> float:
    """All-point interpolated AP for one class at one IoU threshold.

    `ranked` holds (confidence, is_tp) pairs; they are re-sorted by
    descending confidence (stable, so caller order breaks ties). The
    precision curve is replaced by its running maximum from the right and
    integrated over recall.

    Defined as 1.0 for num_gt == 0 with no predictions (an absent class
    predicted absent), 0.0 for num_gt == 0 with any prediction.
    """
    if num_gt < 0:
        raise ValueError("num_gt must be >= 0")
    if num_gt == 0:
        return 1.0 if len(ranked) == 0 else 0.0
    if not ranked:
        return 0.0
    order = sorted(range(len(ranked)), key=lambda i: -ranked[i][0])
    tps = np.array([1.0 if ranked[i][1] else 0.0 for i in order])
    cum_tp = np.cumsum(tps)
    ranks = np.arange(1, len(tps) + 1)
    precision = cum_tp / ranks
    recall = cum_tp / num_gt
    # envelope: running max of precision from the right
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


@dataclass
class ClassApInput:
    """Per-class AP inputs: the class GT count and, per IoU threshold,
    the (confidence, is_tp) list for every prediction of the class."""

    num_gt: int
    ranked_by_threshold: dict[float, list[tuple[float, bool]]] = field(default_factory=dict)


def mean_ap(
    per_class_inputs: Mapping[int, ClassApInput],
    iou_thresholds: Sequence[float],
) -> float:
    """Mean over classes of AP per threshold, then mean over thresholds.

    Classes with zero ground truths across the dataset are excluded from
    the class mean. An empty class set after exclusion yields 0.0 with a
    RuntimeWarning.
    """
    eligible = {c: inp for c, inp in per_class_inputs.items() if inp.num_gt > 0}
    if not eligible:
        warnings.warn("mean_ap: no class has ground truths; reporting 0", RuntimeWarning)
        return 0.0
    per_threshold = []
    for t in iou_thresholds:
        aps = [
            average_precision(inp.ranked_by_threshold.get(t, []), inp.num_gt)
            for _, inp in sorted(eligible.items())
        ]
        per_threshold.append(sum(aps) / len(aps))
    return sum(per_threshold) / len(per_threshold)


class ConfusionMatrix:
    """Square count matrix over classes plus a trailing background row/column.

    Row index is the true class, column index the predicted class.
    """

    def __init__(self, class_ids: Sequence[int]):
        self.class_ids = tuple(sorted(class_ids))
        self._index = {c: i for i, c in enumerate(self.class_ids)}
        n = len(self.class_ids) + 1
        self.counts = np.zeros((n, n), dtype=np.int64)

    @property
    def background_index(self) -> int:
        return len(self.class_ids)

    def _idx(self, class_id: int | None) -> int:
        if class_id is None:
            return self.background_index
        return self._index[class_id]

    def add(self, truth: int | None, pred: int | None, count: int = 1) -> None:
        if truth is None and pred is None:
            raise ValueError("background/background is not a countable event")
        self.counts[self._idx(truth), self._idx(pred)] += count

    def merge(self, other: "ConfusionMatrix") -> None:
        if other.class_ids != self.class_ids:
            raise ValueError("cannot merge confusion matrices over different classes")
        self.counts += other.counts

    def total(self) -> int:
        return int(self.counts.sum())

    def trace(self) -> int:
        return int(np.trace(self.counts))

    def labels(self, class_names: Mapping[int, str] | None = None) -> list[str]:
        names = class_names or {}
        return [names.get(c, f"class_{c}") for c in self.class_ids] + ["background"]


def confusion_matrix(
    preds: Sequence[Detection],
    gts: Sequence[GroundTruth],
    iou_threshold: float,
    confidence_floor: float = 0.25,
    class_ids: Sequence[int] | None = None,
) -> ConfusionMatrix:
    """Detection confusion matrix at an operating point.

    Predictions below `confidence_floor` are dropped, then matched with
    the same class-aware greedy rule as match_detections, which makes
    the matrix total equal TP + FP + FN at the same settings: matched
    pairs land on the diagonal, unmatched predictions count against
    background-as-truth, unmatched GTs against background-as-prediction.
    """
    if not 0.0 <= confidence_floor <= 1.0:
        raise ValueError(f"confidence_floor must be in [0, 1]: {confidence_floor}")
    if class_ids is None:
        class_ids = sorted({p.class_id for p in preds} | {g.class_id for g in gts})
    matrix = ConfusionMatrix(class_ids)
    kept = [p for p in preds if p.confidence >= confidence_floor]
    match = match_detections(kept, gts, iou_threshold)
    claimed: set[int] = set()
    for a in match.assignments:
        if a.outcome == "TP":
            claimed.add(a.matched_gt_index)
            matrix.add(gts[a.matched_gt_index].class_id, kept[a.pred_index].class_id)
        else:
            matrix.add(None, kept[a.pred_index].class_id)
    for gi, gt in enumerate(gts):
        if gi not in claimed:
            matrix.add(gt.class_id, None)
    return matrix


def accuracy(matrix: ConfusionMatrix) -> float:
    """Trace over total counts; 0.0 with a RuntimeWarning for an empty matrix."""
    total = matrix.total()
    if total == 0:
        warnings.warn("accuracy: empty confusion matrix; reporting 0", RuntimeWarning)
        return 0.0
    return matrix.trace() / total


@dataclass(frozen=True)
class ClassRow:
    """One line of the summary table, either a real class or the 'all' row."""

    class_id: int | None
    name: str
    images: int
    instances: int
    precision: float
    recall: float
    map50: float
    map50_95: float


@dataclass
class MetricsReport:
    all_row: ClassRow
    class_rows: dict[int, ClassRow]
    confusion: ConfusionMatrix
    accuracy: float
    # full-precision AP per class per IoU threshold; rendering only ever
    # shows the rounded mAP50/mAP50-95 columns
    per_class_ap: dict[int, dict[float, float]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def rows(self) -> list[ClassRow]:
        return [self.all_row] + [self.class_rows[c] for c in sorted(self.class_rows)]


def evaluate_detections(
    preds_by_image: Mapping[str, Sequence[Detection]],
    gts_by_image: Mapping[str, Sequence[GroundTruth]],
    iou_thresholds: Sequence[float] = MAP50_95_THRESHOLDS,
    pr_iou_threshold: float = 0.5,
    confidence_floor: float = 0.25,
    class_names: Mapping[int, str] | None = None,
) -> MetricsReport:
    """Full dataset evaluation producing the summary-table report.

    Image order follows `gts_by_image`; images present only in
    `preds_by_image` are rejected upstream (see the eval loader).
    Precision/recall and the confusion matrix use `pr_iou_threshold`
    (the confidence floor applies to the confusion matrix only).
    """
    image_ids = list(gts_by_image.keys())
    class_ids = sorted(
        {g.class_id for gts in gts_by_image.values() for g in gts}
        | {p.class_id for preds in preds_by_image.values() for p in preds}
    )
    names = dict(class_names or {})

    tp: dict[int, int] = defaultdict(int)
    fp: dict[int, int] = defaultdict(int)
    gt_count: dict[int, int] = defaultdict(int)
    images_with_class: dict[int, set[str]] = defaultdict(set)
    ap_inputs = {c: ClassApInput(num_gt=0) for c in class_ids}
    confusion = ConfusionMatrix(class_ids)
    # the mAP50 column is always at 0.5, whatever thresholds were requested
    match_thresholds = list(dict.fromkeys([*iou_thresholds, 0.5]))

    for image_id in image_ids:
        gts = list(gts_by_image.get(image_id, ()))
        preds = list(preds_by_image.get(image_id, ()))
        for g in gts:
            gt_count[g.class_id] += 1
            images_with_class[g.class_id].add(image_id)
        for t in match_thresholds:
            match = match_detections(preds, gts, t)
            for a in match.assignments:
                pred = preds[a.pred_index]
                ranked = ap_inputs[pred.class_id].ranked_by_threshold.setdefault(t, [])
                ranked.append((pred.confidence, a.outcome == "TP"))
        pr_match = match_detections(preds, gts, pr_iou_threshold)
        for a in pr_match.assignments:
            pred = preds[a.pred_index]
            if a.outcome == "TP":
                tp[pred.class_id] += 1
            else:
                fp[pred.class_id] += 1
        confusion.merge(
            confusion_matrix(preds, gts, pr_iou_threshold, confidence_floor, class_ids)
        )

    for c in class_ids:
        ap_inputs[c].num_gt = gt_count[c]
        # stable sort by descending confidence; accumulation order breaks ties
        for t, ranked in ap_inputs[c].ranked_by_threshold.items():
            ranked.sort(key=lambda pair: -pair[0])

    report_warnings: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        map50 = mean_ap(ap_inputs, MAP50_THRESHOLDS)
        map50_95 = mean_ap(ap_inputs, iou_thresholds)
        acc = accuracy(confusion)
        report_warnings.extend(str(w.message) for w in caught)

    class_rows = {}
    per_class_ap: dict[int, dict[float, float]] = {}
    for c in class_ids:
        fn_c = gt_count[c] - tp[c]
        p_c = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] > 0 else 0.0
        r_c = tp[c] / (tp[c] + fn_c) if tp[c] + fn_c > 0 else 1.0
        ap50_c = average_precision(
            ap_inputs[c].ranked_by_threshold.get(0.5, []), gt_count[c]
        )
        per_class_ap[c] = {
            t: average_precision(ap_inputs[c].ranked_by_threshold.get(t, []), gt_count[c])
            for t in match_thresholds
        }
        ap_all_c = [per_class_ap[c][t] for t in iou_thresholds]
        class_rows[c] = ClassRow(
            class_id=c,
            name=names.get(c, f"class_{c}"),
            images=len(images_with_class[c]),
            instances=gt_count[c],
            precision=p_c,
            recall=r_c,
            map50=ap50_c,
            map50_95=sum(ap_all_c) / len(ap_all_c) if ap_all_c else 0.0,
        )

    total_tp = sum(tp.values())
    total_fp = sum(fp.values())
    total_gt = sum(gt_count.values())
    total_fn = total_gt - total_tp
    all_row = ClassRow(
        class_id=None,
        name="all",
        images=len(image_ids),
        instances=total_gt,
        precision=total_tp / (total_tp + total_fp) if total_tp + total_fp > 0 else 0.0,
        recall=total_tp / (total_tp + total_fn) if total_tp + total_fn > 0 else 1.0,
        map50=map50,
        map50_95=map50_95,
    )
    return MetricsReport(
        all_row=all_row,
        class_rows=class_rows,
        confusion=confusion,
        accuracy=acc,
        per_class_ap=per_class_ap,
        warnings=report_warnings,
    )

"""Detection metrics from the ground up
=======================================

Boxes, IoU, greedy matching, average precision, and the summary table.
"""

from roadwatch import (
    BBox,
    ClassRow,
    Detection,
    GroundTruth,
    average_precision,
    confusion_matrix,
    format_summary_row,
    iou,
    match_detections,
    precision_recall,
)
from roadwatch.metrics import accuracy

# Two overlapping boxes: the right half of `a` is the left half of `b`.
a = BBox(0, 0, 10, 10)
b = BBox(5, 0, 15, 10)
print("IoU(a, b) =", iou(a, b))  # 1/3

# A tiny scene: two ground truths, three predictions.
gts = [
    GroundTruth(bbox=BBox(0, 0, 10, 10), class_id=0),
    GroundTruth(bbox=BBox(20, 0, 30, 10), class_id=0),
]
preds = [
    Detection(bbox=BBox(0, 0, 10, 10), class_id=0, confidence=0.9),   # hit
    Detection(bbox=BBox(50, 0, 60, 10), class_id=0, confidence=0.8),  # miss
    Detection(bbox=BBox(21, 0, 31, 10), class_id=0, confidence=0.7),  # hit
]

match = match_detections(preds, gts, iou_threshold=0.5)
for assignment in match.assignments:
    print(f"prediction {assignment.pred_index}: {assignment.outcome}")
print("false negatives:", match.fn_count)
print("precision, recall:", precision_recall(match))

# Average precision works on the ranked (confidence, is_tp) list.
ranked = [(0.9, True), (0.8, False), (0.7, True)]
print("AP =", average_precision(ranked, num_gt=2))  # 5/6

# The confusion matrix adds a background pseudo-class for unmatched items.
matrix = confusion_matrix(preds, gts, iou_threshold=0.5, confidence_floor=0.25)
print("confusion counts (rows = truth, cols = prediction):")
print(matrix.counts)
print("accuracy =", accuracy(matrix))

# The summary table renderer reproduces the familiar detector row layout.
row = ClassRow(
    class_id=None, name="all", images=64, instances=68,
    precision=0.961, recall=0.838, map50=0.926, map50_95=0.582,
)
print(format_summary_row(row))

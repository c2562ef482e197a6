"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles in plain
Python, in a different shape from the library code (no numpy, no shared
helpers), so a bug cannot hide on both sides of a comparison.
"""

from __future__ import annotations

from fractions import Fraction


def pixel_grid_iou(box_a, box_b, cell: float = 1.0) -> float:
    """IoU by enumerating grid cells whose centers fall inside each box.

    Boxes are (x_min, y_min, x_max, y_max). Exact for boxes whose edges
    are multiples of `cell`; an approximation otherwise.
    """
    xs = [box_a[0], box_a[2], box_b[0], box_b[2]]
    ys = [box_a[1], box_a[3], box_b[1], box_b[3]]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    inter = 0
    union = 0
    nx = int(round((x1 - x0) / cell))
    ny = int(round((y1 - y0) / cell))
    for i in range(nx):
        cx = x0 + (i + 0.5) * cell
        for j in range(ny):
            cy = y0 + (j + 0.5) * cell
            in_a = box_a[0] < cx < box_a[2] and box_a[1] < cy < box_a[3]
            in_b = box_b[0] < cx < box_b[2] and box_b[1] < cy < box_b[3]
            if in_a and in_b:
                inter += 1
            if in_a or in_b:
                union += 1
    return inter / union if union else 0.0


def analytic_iou(box_a, box_b) -> float:
    """Closed-form IoU, written independently of the library version."""
    w = min(box_a[2], box_b[2]) - max(box_a[0], box_b[0])
    h = min(box_a[3], box_b[3]) - max(box_a[1], box_b[1])
    if w <= 0 or h <= 0:
        inter = 0.0
    else:
        inter = w * h
    area_a = (box_a[2] - box_a[0]) * (box_a[3] - box_a[1])
    area_b = (box_b[2] - box_b[0]) * (box_b[3] - box_b[1])
    denom = area_a + area_b - inter
    return inter / denom if denom > 0 else 0.0


def step_curve_ap(ranked, num_gt) -> float:
    """All-point interpolated AP by explicit step-curve integration.

    ranked: (confidence, is_tp) pairs in any order. O(n^2) on purpose:
    the precision envelope is recomputed per point as a suffix maximum.
    """
    if num_gt == 0:
        return 1.0 if not ranked else 0.0
    if not ranked:
        return 0.0
    items = sorted(enumerate(ranked), key=lambda pair: (-pair[1][0], pair[0]))
    points = []
    tp_so_far = 0
    for rank, (_, (_conf, is_tp)) in enumerate(items, start=1):
        if is_tp:
            tp_so_far += 1
        points.append((Fraction(tp_so_far, num_gt), Fraction(tp_so_far, rank)))
    area = Fraction(0)
    prev_recall = Fraction(0)
    for k, (recall_k, _) in enumerate(points):
        envelope = max(precision for _, precision in points[k:])
        area += (recall_k - prev_recall) * envelope
        prev_recall = recall_k
    return float(area)


def greedy_match_reference(preds, gts, iou_threshold):
    """Greedy matching by repeated max extraction over the full cross
    product of (prediction, ground truth) candidate pairs.

    preds: (confidence, class_id, box) triples; gts: (class_id, box) pairs.
    Returns (tp_pred_indices mapped to gt index, fp_pred_indices, fn_count).
    Priority: higher confidence first, then lower pred index; a prediction
    takes the highest-IoU eligible ground truth, then lower gt index.
    """
    candidates = []
    for pi, (conf, cls, pbox) in enumerate(preds):
        for gi, (gcls, gbox) in enumerate(gts):
            if cls != gcls:
                continue
            overlap = analytic_iou(pbox, gbox)
            if overlap >= iou_threshold:
                candidates.append((pi, gi, conf, overlap))
    taken_preds: dict[int, int] = {}
    taken_gts: set[int] = set()
    while True:
        best = None
        for pi, gi, conf, overlap in candidates:
            if pi in taken_preds or gi in taken_gts:
                continue
            key = (-conf, pi, -overlap, gi)
            if best is None or key < best[0]:
                best = (key, pi, gi)
        if best is None:
            break
        _, pi, gi = best
        taken_preds[pi] = gi
        taken_gts.add(gi)
    fp = [pi for pi in range(len(preds)) if pi not in taken_preds]
    fn = len(gts) - len(taken_gts)
    return taken_preds, fp, fn


def plain_levenshtein(a: str, b: str, zero_pairs) -> int:
    """Full-matrix weighted Levenshtein; zero_pairs is a set of frozensets
    of characters whose substitution is free."""
    rows = len(a) + 1
    cols = len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            if a[i - 1] == b[j - 1] or frozenset((a[i - 1], b[j - 1])) in zero_pairs:
                sub = 0
            else:
                sub = 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + sub)
    return d[rows - 1][cols - 1]


DEFAULT_ZERO_PAIRS = {
    frozenset(("O", "0")),
    frozenset(("I", "1")),
    frozenset(("B", "8")),
    frozenset(("S", "5")),
    frozenset(("Z", "2")),
}

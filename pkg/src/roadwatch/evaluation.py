"""Offline evaluation: load ground truth and predictions, score, render.

Both input files share one line-delimited schema,
{"image_id", "class_id", "bbox": [x_min, y_min, x_max, y_max]}, with
"confidence" required for predictions and forbidden for ground truth.
Rendered numbers are rounded half-to-even to 3 decimals at render time
only; the MetricsReport object keeps full precision.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

from .errors import SchemaError, UnknownImageId
from .geometry import BBox, Detection, GroundTruth
from .metrics import (
    MAP50_95_THRESHOLDS,
    ClassRow,
    MetricsReport,
    evaluate_detections,
)


def load_ground_truth(path: str | Path) -> dict[str, list[GroundTruth]]:
    """Ground truth rows grouped by image, in file order."""
    gts: dict[str, list[GroundTruth]] = {}
    for lineno, row in _iter_rows(path):
        if "confidence" in row:
            raise SchemaError("confidence is forbidden in ground truth", line=lineno)
        image_id, class_id, bbox = _common_fields(row, lineno, {"image_id", "class_id", "bbox"})
        gts.setdefault(image_id, []).append(GroundTruth(bbox=bbox, class_id=class_id))
    return gts


def load_predictions(
    path: str | Path, known_images: set[str]
) -> dict[str, list[Detection]]:
    """Prediction rows grouped by image; image ids must exist in the GT."""
    preds: dict[str, list[Detection]] = {}
    for lineno, row in _iter_rows(path):
        image_id, class_id, bbox = _common_fields(
            row, lineno, {"image_id", "class_id", "bbox", "confidence"}
        )
        confidence = row.get("confidence")
        if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
            raise SchemaError("confidence must be a number", line=lineno)
        if not 0.0 <= confidence <= 1.0:
            raise SchemaError(f"confidence outside [0, 1]: {confidence}", line=lineno)
        if image_id not in known_images:
            raise UnknownImageId(
                f"prediction line {lineno} references unknown image {image_id!r}"
            )
        preds.setdefault(image_id, []).append(
            Detection(bbox=bbox, class_id=class_id, confidence=float(confidence))
        )
    return preds


def _iter_rows(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}", line=lineno) from exc
        if not isinstance(row, dict):
            raise SchemaError("row is not an object", line=lineno)
        yield lineno, row


def _common_fields(row: dict, lineno: int, allowed: set[str]) -> tuple[str, int, BBox]:
    unknown = set(row) - allowed
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}", line=lineno)
    image_id = row.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        raise SchemaError("image_id must be a non-empty string", line=lineno)
    class_id = row.get("class_id")
    if not isinstance(class_id, int) or isinstance(class_id, bool):
        raise SchemaError("class_id must be an integer", line=lineno)
    bbox = row.get("bbox")
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise SchemaError("bbox must be [x_min, y_min, x_max, y_max]", line=lineno)
    try:
        box = BBox(*(float(v) for v in bbox))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad bbox: {exc}", line=lineno) from exc
    return image_id, class_id, box


def load_class_names(path: str | Path) -> dict[int, str]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise SchemaError("class name table must be an object")
    return {int(k): str(v) for k, v in raw.items()}


def run_eval(
    gt_path: str | Path,
    pred_path: str | Path,
    iou_thresholds: Sequence[float] = MAP50_95_THRESHOLDS,
    confidence_floor: float = 0.25,
    class_names: Mapping[int, str] | None = None,
) -> MetricsReport:
    """Score a prediction file against a ground-truth file."""
    gts = load_ground_truth(gt_path)
    preds = load_predictions(pred_path, set(gts))
    if class_names:
        referenced = {g.class_id for rows in gts.values() for g in rows}
        referenced |= {p.class_id for rows in preds.values() for p in rows}
        missing = referenced - set(class_names)
        if missing:
            raise SchemaError(f"class ids missing from the class table: {sorted(missing)}")
    return evaluate_detections(
        preds_by_image=preds,
        gts_by_image=gts,
        iou_thresholds=iou_thresholds,
        pr_iou_threshold=0.5,
        confidence_floor=confidence_floor,
        class_names=class_names,
    )


SUMMARY_HEADER = "Class Images Instances Box(P R mAP50 mAP50-95)"


def format_summary_row(row: ClassRow) -> str:
    """One summary line, fields single-space separated, ratios at 3 decimals."""
    return (
        f"{row.name} {row.images} {row.instances} "
        f"{row.precision:.3f} {row.recall:.3f} {row.map50:.3f} {row.map50_95:.3f}"
    )


def render_report(report: MetricsReport, fmt: str = "text") -> str:
    if fmt == "text":
        return _render_text(report)
    if fmt == "csv":
        return _render_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")


def _render_text(report: MetricsReport) -> str:
    lines = [SUMMARY_HEADER]
    lines.extend(format_summary_row(row) for row in report.rows())
    lines.append("")
    lines.append("Confusion matrix (rows = truth, columns = prediction):")
    labels = report.confusion.labels(
        {c: row.name for c, row in report.class_rows.items()}
    )
    lines.append("\t".join(["truth\\pred"] + labels))
    for i, label in enumerate(labels):
        counts = [str(int(v)) for v in report.confusion.counts[i]]
        lines.append("\t".join([label] + counts))
    lines.append("")
    lines.append(f"Accuracy: {report.accuracy * 100:.1f}%")
    for warning in report.warnings:
        lines.append(f"Warning: {warning}")
    return "\n".join(lines) + "\n"


def _render_csv(report: MetricsReport) -> str:
    lines = ["class,images,instances,precision,recall,map50,map50_95"]
    for row in report.rows():
        lines.append(
            f"{row.name},{row.images},{row.instances},"
            f"{row.precision:.3f},{row.recall:.3f},{row.map50:.3f},{row.map50_95:.3f}"
        )
    lines.append("")
    labels = report.confusion.labels(
        {c: row.name for c, row in report.class_rows.items()}
    )
    lines.append(",".join(["truth/pred"] + labels))
    for i, label in enumerate(labels):
        counts = [str(int(v)) for v in report.confusion.counts[i]]
        lines.append(",".join([label] + counts))
    lines.append("")
    lines.append(f"accuracy,{report.accuracy * 100:.1f}%")
    return "\n".join(lines) + "\n"

import json
from pathlib import Path

import pytest

from roadwatch.errors import SchemaError, UnknownImageId
from roadwatch.evaluation import (
    SUMMARY_HEADER,
    format_summary_row,
    load_ground_truth,
    load_predictions,
    render_report,
    run_eval,
)
from roadwatch.metrics import ClassRow

import eval_oracle

DATA = Path(__file__).parent / "data"
GT_PATH = DATA / "eval_gt.jsonl"
PRED_PATH = DATA / "eval_pred.jsonl"


# ------------------------------------------------------------- file loading


def test_gt_rejects_confidence(tmp_path):
    path = tmp_path / "gt.jsonl"
    path.write_text(
        json.dumps(
            {"image_id": "a", "class_id": 0, "bbox": [0, 0, 1, 1], "confidence": 0.5}
        )
        + "\n"
    )
    with pytest.raises(SchemaError, match="forbidden"):
        load_ground_truth(path)


def test_predictions_require_confidence(tmp_path):
    path = tmp_path / "pred.jsonl"
    path.write_text(json.dumps({"image_id": "a", "class_id": 0, "bbox": [0, 0, 1, 1]}) + "\n")
    with pytest.raises(SchemaError):
        load_predictions(path, {"a"})


def test_predictions_unknown_image_rejected(tmp_path):
    path = tmp_path / "pred.jsonl"
    path.write_text(
        json.dumps(
            {"image_id": "ghost", "class_id": 0, "bbox": [0, 0, 1, 1], "confidence": 0.5}
        )
        + "\n"
    )
    with pytest.raises(UnknownImageId):
        load_predictions(path, {"a"})


def test_class_table_must_cover_referenced_ids(tmp_path):
    gt = tmp_path / "gt.jsonl"
    gt.write_text(json.dumps({"image_id": "a", "class_id": 3, "bbox": [0, 0, 1, 1]}) + "\n")
    pred = tmp_path / "pred.jsonl"
    pred.write_text("")
    with pytest.raises(SchemaError, match="class ids missing"):
        run_eval(gt, pred, class_names={0: "plate"})


# ---------------------------------------------------------------- rendering


def test_summary_row_rendering_matches_published_aggregates():
    row = ClassRow(
        class_id=None,
        name="all",
        images=64,
        instances=68,
        precision=0.961,
        recall=0.838,
        map50=0.926,
        map50_95=0.582,
    )
    assert format_summary_row(row) == "all 64 68 0.961 0.838 0.926 0.582"


def test_render_rounds_half_to_even_at_three_decimals():
    row = ClassRow(
        class_id=0,
        name="c",
        images=1,
        instances=1,
        precision=0.1875,  # exactly representable; 187.5 thousandths -> 188
        recall=0.3125,  # 312.5 thousandths -> 312
        map50=0.0,
        map50_95=0.0,
    )
    assert format_summary_row(row) == "c 1 1 0.188 0.312 0.000 0.000"


def test_report_text_layout(tmp_path):
    report = run_eval(GT_PATH, PRED_PATH)
    text = render_report(report, "text")
    lines = text.splitlines()
    assert lines[0] == SUMMARY_HEADER
    assert lines[1].startswith("all ")
    assert "Confusion matrix (rows = truth, columns = prediction):" in text
    assert text.rstrip().splitlines()[-1].startswith("Accuracy: ")


def test_report_csv_layout():
    report = run_eval(GT_PATH, PRED_PATH)
    csv = render_report(report, "csv")
    assert csv.splitlines()[0] == "class,images,instances,precision,recall,map50,map50_95"
    assert csv.splitlines()[1].startswith("all,")


def test_eval_is_a_pure_function_of_its_inputs():
    first = render_report(run_eval(GT_PATH, PRED_PATH), "text")
    second = render_report(run_eval(GT_PATH, PRED_PATH), "text")
    assert first == second


# --------------------------------------------------------------- behaviour


def test_empty_predictions_give_zero_precision_recall_map(tmp_path):
    gt = tmp_path / "gt.jsonl"
    gt.write_text(
        "".join(
            json.dumps({"image_id": f"i{k}", "class_id": 0, "bbox": [0, 0, 10, 10]}) + "\n"
            for k in range(3)
        )
    )
    pred = tmp_path / "pred.jsonl"
    pred.write_text("")
    report = run_eval(gt, pred)
    assert report.all_row.precision == 0.0
    assert report.all_row.recall == 0.0
    assert report.all_row.map50 == 0.0
    assert report.all_row.instances == 3


def test_perfect_predictions_score_one(tmp_path):
    gt_rows = [
        {"image_id": "a", "class_id": 0, "bbox": [0, 0, 10, 10]},
        {"image_id": "b", "class_id": 1, "bbox": [5, 5, 25, 25]},
    ]
    pred_rows = [
        {**row, "confidence": 0.9 - i * 0.1} for i, row in enumerate(gt_rows)
    ]
    gt = tmp_path / "gt.jsonl"
    gt.write_text("".join(json.dumps(r) + "\n" for r in gt_rows))
    pred = tmp_path / "pred.jsonl"
    pred.write_text("".join(json.dumps(r) + "\n" for r in pred_rows))
    report = run_eval(gt, pred)
    assert report.all_row.precision == 1.0
    assert report.all_row.recall == 1.0
    assert report.all_row.map50 == 1.0
    assert report.all_row.map50_95 == 1.0
    assert report.accuracy == 1.0


# ------------------------------------------------- oracle cross-validation


def test_shipped_fixture_matches_independent_oracle():
    report = run_eval(GT_PATH, PRED_PATH)
    expected = eval_oracle.score(GT_PATH, PRED_PATH)

    tol = 1e-9
    assert report.all_row.images == expected["all"]["images"] == 12
    assert report.all_row.instances == expected["all"]["instances"]
    assert report.all_row.precision == pytest.approx(expected["all"]["precision"], abs=tol)
    assert report.all_row.recall == pytest.approx(expected["all"]["recall"], abs=tol)
    assert report.all_row.map50 == pytest.approx(expected["all"]["map50"], abs=tol)
    assert report.all_row.map50_95 == pytest.approx(expected["all"]["map50_95"], abs=tol)
    assert report.accuracy == pytest.approx(expected["accuracy"], abs=tol)

    for c, row in report.class_rows.items():
        oracle_row = expected["per_class"][c]
        assert row.images == oracle_row["images"]
        assert row.instances == oracle_row["instances"]
        assert row.precision == pytest.approx(oracle_row["precision"], abs=tol)
        assert row.recall == pytest.approx(oracle_row["recall"], abs=tol)
        assert row.map50 == pytest.approx(oracle_row["ap50"], abs=tol)
        assert row.map50_95 == pytest.approx(oracle_row["ap50_95"], abs=tol)

    assert report.confusion.counts.tolist() == expected["confusion"]


def test_fixture_is_nontrivial():
    report = run_eval(GT_PATH, PRED_PATH)
    # sanity: the fixture must exercise hits, misses and false alarms
    assert 0.0 < report.all_row.precision < 1.0
    assert 0.0 < report.all_row.recall < 1.0
    assert 0.0 < report.accuracy < 1.0
    assert len(report.class_rows) == 2


def test_all_reported_ratios_stay_in_range():
    report = run_eval(GT_PATH, PRED_PATH)
    for row in report.rows():
        for value in (row.precision, row.recall, row.map50, row.map50_95):
            assert 0.0 <= value <= 1.0
    assert 0.0 <= report.accuracy <= 1.0
    for per_threshold in report.per_class_ap.values():
        for value in per_threshold.values():
            assert 0.0 <= value <= 1.0

import dataclasses
import json

import pytest

from roadwatch.config import PipelineConfig
from roadwatch.eventlog import read_event_log
from roadwatch.pipeline import run_pipeline

from scenarios import (
    EMBEDDING_DIM,
    appearance_block,
    build_random_load,
    build_switch_scenario,
    gap_block,
    manifest_row,
    plate_fixture_row,
    write_jsonl,
    write_suspect_watchlist,
)


def base_config(root, **overrides) -> PipelineConfig:
    values = dict(
        manifest_path=str(root / "manifest.jsonl"),
        fixture_path=str(root / "fixture.jsonl"),
        event_log_path=str(root / "events.log"),
        embedding_dim=EMBEDDING_DIM,
    )
    values.update(overrides)
    return PipelineConfig(**values).validate()


def test_empty_fixture_yields_frame_processed_only(tmp_path):
    write_jsonl(
        tmp_path / "manifest.jsonl", [manifest_row(f"f{i}", i * 100) for i in range(5)]
    )
    write_jsonl(tmp_path / "fixture.jsonl", [])
    result = run_pipeline(base_config(tmp_path))
    assert result.frames_processed == 5
    assert result.alert_count == 0
    loaded = read_event_log(result.event_log_path)
    assert [r.kind for r in loaded.records] == ["frame_processed"] * 5
    assert [r.seq for r in loaded.records] == [1, 2, 3, 4, 5]


def test_every_frame_produces_exactly_one_frame_processed(tmp_path):
    config = build_random_load(tmp_path, frames=60)
    result = run_pipeline(config)
    loaded = read_event_log(result.event_log_path)
    processed = [r for r in loaded.records if r.kind == "frame_processed"]
    assert len(processed) == 60
    assert result.frames_processed == 60


def test_track_lifecycle_events(tmp_path):
    manifest, fixture = appearance_block(
        ["a0", "a1", "a2"], 0, plate_text="MH12AB1234", with_face=False
    )
    gap_manifest, _ = gap_block([f"g{i}" for i in range(7)], 300)
    write_jsonl(tmp_path / "manifest.jsonl", manifest + gap_manifest)
    write_jsonl(tmp_path / "fixture.jsonl", fixture)
    result = run_pipeline(base_config(tmp_path))
    loaded = read_event_log(result.event_log_path)
    kinds = [r.kind for r in loaded.records]
    assert kinds.count("track_opened") == 1
    assert kinds.count("track_closed") == 1
    assert kinds.count("plate_read") == 3
    opened = next(r for r in loaded.records if r.kind == "track_opened")
    closed = next(r for r in loaded.records if r.kind == "track_closed")
    assert opened.payload["track_id"] == closed.payload["track_id"]
    assert closed.payload["consensus_plate"] == "MH12AB1234"
    # retirement happens on the 6th empty frame (age_missed > max_age=5)
    assert closed.payload["frame_span"] == [1, 3]


def test_unreadable_plate_text_still_tracks_but_logs_no_read(tmp_path):
    write_jsonl(tmp_path / "manifest.jsonl", [manifest_row("f0", 0)])
    write_jsonl(
        tmp_path / "fixture.jsonl", [plate_fixture_row("f0", raw_text="@@ @@")]
    )
    result = run_pipeline(base_config(tmp_path))
    loaded = read_event_log(result.event_log_path)
    kinds = [r.kind for r in loaded.records]
    assert "track_opened" in kinds
    assert "plate_read" not in kinds


def test_vehicle_switch_scenario_raises_exactly_one_alert(tmp_path):
    config = build_switch_scenario(tmp_path, appearances=[0])
    result = run_pipeline(config)
    loaded = read_event_log(result.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert len(alerts) == 1
    assert result.alert_count == 1
    payload = alerts[0].payload
    assert payload["kind"] == "VEHICLE_SWITCH"
    assert payload["severity"] == "high"
    assert payload["evidence"]["consensus_plate"] == "KA01F555"
    assert payload["evidence"]["face"]["entry_id"] == "f1"
    # face was seen and bound to the vehicle track
    face_events = [r for r in loaded.records if r.kind == "face_matched"]
    assert face_events and all(r.payload["track_id"] is not None for r in face_events)


def test_vehicle_switch_debounce_within_and_beyond_cooldown(tmp_path):
    # second appearance 10 s after the first (inside the 30 s window),
    # third 40 s after (outside): exactly two alerts
    config = build_switch_scenario(tmp_path, appearances=[0, 10_000, 40_000])
    result = run_pipeline(config)
    loaded = read_event_log(result.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert [a.payload["kind"] for a in alerts] == ["VEHICLE_SWITCH", "VEHICLE_SWITCH"]
    assert result.alert_count == 2
    first, second = (a.payload["created_at_ms"] for a in alerts)
    assert second - first > config.cooldown_ms


def test_confirmed_suspect_when_plate_is_linked_and_watchlisted(tmp_path):
    manifest, fixture = appearance_block(
        [f"a{i}" for i in range(3)], 0, plate_text="MH 12 AB 1234", with_face=True
    )
    gap_manifest, _ = gap_block([f"g{i}" for i in range(7)], 1000)
    write_jsonl(tmp_path / "manifest.jsonl", manifest + gap_manifest)
    write_jsonl(tmp_path / "fixture.jsonl", fixture)
    watchlist_path = tmp_path / "watchlist.json"
    write_suspect_watchlist(watchlist_path)
    document = json.loads(watchlist_path.read_text())
    document["plates"] = [{"id": "p1", "plate": "MH12AB1234", "label": "bolo"}]
    watchlist_path.write_text(json.dumps(document))
    config = base_config(tmp_path, watchlist_path=str(watchlist_path))
    run_pipeline(config)
    loaded = read_event_log(config.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert [a.payload["kind"] for a in alerts] == ["CONFIRMED_SUSPECT"]
    assert alerts[0].payload["severity"] == "critical"


def test_watchlisted_plate_without_face(tmp_path):
    manifest, fixture = appearance_block(
        [f"a{i}" for i in range(3)], 0, plate_text="KA01F555", with_face=False
    )
    gap_manifest, _ = gap_block([f"g{i}" for i in range(7)], 1000)
    write_jsonl(tmp_path / "manifest.jsonl", manifest + gap_manifest)
    write_jsonl(tmp_path / "fixture.jsonl", fixture)
    watchlist_path = tmp_path / "watchlist.json"
    watchlist_path.write_text(
        json.dumps(
            {
                "plates": [{"id": "p1", "plate": "KA01F555", "label": ""}],
                "faces": [],
            }
        )
    )
    config = base_config(tmp_path, watchlist_path=str(watchlist_path))
    run_pipeline(config)
    loaded = read_event_log(config.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert [a.payload["kind"] for a in alerts] == ["WATCHLISTED_PLATE"]


def test_fuzzy_plate_reading_still_hits_watchlist(tmp_path):
    # OCR consistently reads 5 as S; the confusable table absorbs it
    manifest, fixture = appearance_block(
        [f"a{i}" for i in range(3)], 0, plate_text="KA01FSS5", with_face=False
    )
    gap_manifest, _ = gap_block([f"g{i}" for i in range(7)], 1000)
    write_jsonl(tmp_path / "manifest.jsonl", manifest + gap_manifest)
    write_jsonl(tmp_path / "fixture.jsonl", fixture)
    watchlist_path = tmp_path / "watchlist.json"
    watchlist_path.write_text(
        json.dumps(
            {"plates": [{"id": "p1", "plate": "KA01F555", "label": ""}], "faces": []}
        )
    )
    config = base_config(tmp_path, watchlist_path=str(watchlist_path))
    run_pipeline(config)
    loaded = read_event_log(config.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert [a.payload["kind"] for a in alerts] == ["WATCHLISTED_PLATE"]
    assert alerts[0].payload["evidence"]["plate_decision"]["kind"] == "Exact"


def test_checkpoint_fires_while_vehicle_still_in_view(tmp_path):
    # 12 visible frames with checkpoint interval 10: alert on the 10th frame
    manifest, fixture = appearance_block(
        [f"a{i}" for i in range(12)], 0, plate_text="KA01F555", with_face=True
    )
    write_jsonl(tmp_path / "manifest.jsonl", manifest)
    write_jsonl(tmp_path / "fixture.jsonl", fixture)
    watchlist_path = write_suspect_watchlist(tmp_path / "watchlist.json")
    config = base_config(tmp_path, watchlist_path=str(watchlist_path))
    run_pipeline(config)
    loaded = read_event_log(config.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert len(alerts) == 1
    assert alerts[0].payload["created_at_ms"] == 900  # 10th frame at 100 ms steps
    # the end-of-stream flush does not duplicate it (debounce)
    assert alerts[0].payload["kind"] == "VEHICLE_SWITCH"


def test_person_only_face_fires_vehicle_switch(tmp_path):
    from scenarios import face_fixture_row

    write_jsonl(tmp_path / "manifest.jsonl", [manifest_row("f0", 0)])
    write_jsonl(tmp_path / "fixture.jsonl", [face_fixture_row("f0")])
    watchlist_path = write_suspect_watchlist(tmp_path / "watchlist.json")
    config = base_config(tmp_path, watchlist_path=str(watchlist_path))
    run_pipeline(config)
    loaded = read_event_log(config.event_log_path)
    alerts = [r for r in loaded.records if r.kind == "alert"]
    assert len(alerts) == 1
    assert alerts[0].payload["kind"] == "VEHICLE_SWITCH"
    assert alerts[0].payload["track_id"] is None


def test_run_is_deterministic_across_runs_and_capacities(tmp_path):
    config = build_random_load(tmp_path, frames=200)
    digests = set()
    for capacity in (1, 8, 64):
        for _ in range(2):
            cfg = dataclasses.replace(config, queue_capacity=capacity)
            run_pipeline(cfg)
            digests.add((tmp_path / "events.log").read_bytes())
    assert len(digests) == 1


def test_backend_error_names_the_stage(tmp_path):
    write_jsonl(tmp_path / "manifest.jsonl", [manifest_row("f0", 0)])
    write_jsonl(tmp_path / "fixture.jsonl", [])
    config = base_config(tmp_path)

    class ExplodingBackend:
        def detect_plates(self, frame):
            raise RuntimeError("boom")

        def detect_faces(self, frame):
            return []

    import roadwatch.pipeline as pipeline_module

    original = pipeline_module.build_backend
    pipeline_module.build_backend = lambda cfg: ExplodingBackend()
    try:
        with pytest.raises(RuntimeError, match="plate-branch"):
            run_pipeline(config)
    finally:
        pipeline_module.build_backend = original

"""The full staged pipeline over a scripted scene
=================================================

Builds a manifest + stub detector fixture in a temp directory, runs the
threaded pipeline twice, and shows that the event log is byte-identical.
"""

import json
import tempfile
from pathlib import Path

from roadwatch import PipelineConfig, read_event_log, run_pipeline

root = Path(tempfile.mkdtemp(prefix="roadwatch-demo-"))

# Nine frames: the vehicle (plate KA01F555, suspect face above it) is
# visible for three, then gone long enough for its track to retire.
manifest = []
fixture = []
for i in range(9):
    frame_id = f"f{i}"
    manifest.append(
        {"frame_id": frame_id, "camera_id": "cam1", "timestamp_ms": i * 100,
         "image_path": f"frames/{frame_id}.jpg"}
    )
    if i < 3:
        fixture.append(
            {"frame_id": frame_id, "kind": "plate", "bbox": [100, 100, 300, 200],
             "confidence": 0.9, "raw_text": " ka 01 f 555 ", "text_confidence": 0.8}
        )
        fixture.append(
            {"frame_id": frame_id, "kind": "face", "bbox": [150, 120, 200, 170],
             "confidence": 0.85, "embedding": [0.5, -0.25, 0.125, 1.0]}
        )

(root / "manifest.jsonl").write_text("".join(json.dumps(r) + "\n" for r in manifest))
(root / "fixture.jsonl").write_text("".join(json.dumps(r) + "\n" for r in fixture))
(root / "watchlist.json").write_text(json.dumps({
    "plates": [],
    "faces": [{"id": "f1", "person_name": "Suspect One",
               "embedding": [0.5, -0.25, 0.125, 1.0],
               "linked_plates": ["MH12AB1234"]}],
}))

config = PipelineConfig(
    manifest_path=str(root / "manifest.jsonl"),
    fixture_path=str(root / "fixture.jsonl"),
    event_log_path=str(root / "events.log"),
    watchlist_path=str(root / "watchlist.json"),
    embedding_dim=4,
).validate()

result = run_pipeline(config)
print("frames processed:", result.frames_processed)
print("alerts:", result.alert_count)

first_bytes = Path(config.event_log_path).read_bytes()
run_pipeline(config)
print("byte-identical on re-run:", Path(config.event_log_path).read_bytes() == first_bytes)

print("\nevent log:")
for record in read_event_log(config.event_log_path).records:
    summary = record.payload.get("kind", "")
    print(f"  seq {record.seq:2d} t={record.logical_time_ms:4d} {record.kind} {summary}")

"""Tracks, consensus plates and the alert rule table
====================================================

Drives the sequential frame processor directly with synthetic detections:
a watchlisted face rides a vehicle whose plate is not registered to them,
the motivating "suspect switched vehicles" case.
"""

from roadwatch import (
    BBox,
    Detection,
    Embedding,
    FrameRef,
    PipelineConfig,
    PlateReading,
    WatchlistStore,
)
from roadwatch.backends import FaceObservation
from roadwatch.pipeline import FrameProcessor

EMBEDDING = [0.5, -0.25, 0.125, 1.0]

watchlists = WatchlistStore(embedding_dim=4)
watchlists.add_face("Suspect One", EMBEDDING, linked_plates=["MH12AB1234"])

config = PipelineConfig(embedding_dim=4).validate()
processor = FrameProcessor(config, watchlists)

vehicle_box = BBox(100, 100, 300, 200)
face_box = BBox(150, 120, 200, 170)  # center sits inside the vehicle box

# The suspect's car (well, somebody's car: plate KA01F555) drives through.
for index in range(3):
    frame = FrameRef(
        frame_id=f"f{index}", camera_id="cam1", timestamp_ms=index * 100, image_path=""
    )
    readings = [
        PlateReading(
            detection=Detection(bbox=vehicle_box, class_id=0, confidence=0.9),
            raw_text="KA 01 F 555",
            text_confidence=0.8,
        )
    ]
    observations = [
        FaceObservation(
            detection=Detection(bbox=face_box, class_id=1, confidence=0.85),
            embedding=Embedding.of(EMBEDDING),
        )
    ]
    for record in processor.process_frame(frame, readings, observations):
        print(f"seq {record.seq:2d}  {record.kind}")

# End of stream: close out the live track, which runs the final fusion.
for record in processor.finish(time_ms=300):
    print(f"seq {record.seq:2d}  {record.kind}")

alert = processor.alerts[0]
print()
print("alert kind:    ", alert.kind)          # VEHICLE_SWITCH
print("severity:      ", alert.severity)      # high
print("consensus plate:", alert.evidence["consensus_plate"])
print("matched face:  ", alert.evidence["face"])

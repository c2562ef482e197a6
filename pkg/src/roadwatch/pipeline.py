"""Pipeline orchestration: frames in, event records out.

FrameProcessor is the sequential heart: it owns all tracker and alert
state, consumes one frame's detections at a time, and emits event
records in a fixed order. run_pipeline wraps it in staged worker threads
connected by bounded queues: the plate and face branches run in parallel
per frame, and a sequencer recombines their outputs in ingestion order,
so the event log is byte-identical regardless of queue capacity or
thread scheduling. All timestamps come from the manifest; wall clock
never reaches a payload.

Per-frame record order: track_opened, plate_read, face_matched, alert,
track_closed, frame_processed.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

from .backends import DetectorBackend, FaceObservation, FrameRef, OnnxBackend, PlateReading, load_stub_fixture
from .config import PipelineConfig
from .errors import EmptyAfterNormalization, TooLong
from .eventlog import EventLogRecord
from .faces import match_gallery
from .fusion import (
    Alert,
    AlertDebouncer,
    VehicleEvent,
    fuse,
)
from .manifest import load_manifest
from .plates import (
    CanonicalPlate,
    ConfusableTable,
    PlateMatchDecision,
    canonicalize,
    plate_match,
)
from .tracking import Track, VehicleTracker, consensus_plate
from .watchlist import WatchlistStore


class FrameProcessor:
    """Sequential tracker/fusion state machine.

    One tracker per camera (tracks never cross cameras; association is in
    image space), one shared track-id sequence, one alert debouncer.
    Watchlist snapshots are taken per use, so store mutations apply from
    the next frame or fusion checkpoint onward.
    """

    def __init__(self, config: PipelineConfig, watchlists: WatchlistStore):
        self._config = config
        self._watchlists = watchlists
        self._confusables = ConfusableTable(config.confusables())
        self._trackers: dict[str, VehicleTracker] = {}
        self._track_ids = iter(range(1, 1 << 62))
        self._debouncer = AlertDebouncer(cooldown_ms=config.cooldown_ms)
        self._camera_of_track: dict[int, str] = {}
        self._next_event_seq = 1
        self.alerts: list[Alert] = []
        self.frames_processed = 0
        self.finished = False

    def _tracker(self, camera_id: str) -> VehicleTracker:
        tracker = self._trackers.get(camera_id)
        if tracker is None:
            tracker = VehicleTracker(
                iou_assoc=self._config.iou_assoc,
                max_age=self._config.max_age,
                id_source=self._track_ids,
            )
            self._trackers[camera_id] = tracker
        return tracker

    def _record(self, kind: str, time_ms: int, payload: dict) -> EventLogRecord:
        record = EventLogRecord(
            seq=self._next_event_seq, kind=kind, logical_time_ms=time_ms, payload=payload
        )
        self._next_event_seq += 1
        return record

    def process_frame(
        self,
        frame: FrameRef,
        plate_readings: Sequence[PlateReading],
        face_observations: Sequence[FaceObservation],
    ) -> list[EventLogRecord]:
        if self.finished:
            raise RuntimeError("pipeline already finalized")
        self.frames_processed += 1
        frame_index = self.frames_processed
        time_ms = frame.timestamp_ms
        records: list[EventLogRecord] = []

        tracker = self._tracker(frame.camera_id)
        detections = [r.detection for r in plate_readings]
        step = tracker.step(detections, frame_index)
        track_by_det: dict[int, Track] = {di: t for t, di in step.matched}
        for track, di in step.opened:
            track_by_det[di] = track
            self._camera_of_track[track.track_id] = frame.camera_id

        for track, _ in step.opened:
            records.append(
                self._record(
                    "track_opened",
                    time_ms,
                    {
                        "track_id": track.track_id,
                        "frame_id": frame.frame_id,
                        "camera_id": frame.camera_id,
                        "bbox": track.last_bbox.as_list(),
                    },
                )
            )

        # plate branch results: attach readable text to the owning track
        for di, reading in enumerate(plate_readings):
            track = track_by_det[di]
            try:
                plate = canonicalize(reading.raw_text)
            except (EmptyAfterNormalization, TooLong):
                continue  # unreadable text still contributed its box to tracking
            track.observe_plate(plate, reading.text_confidence)
            records.append(
                self._record(
                    "plate_read",
                    time_ms,
                    {
                        "track_id": track.track_id,
                        "frame_id": frame.frame_id,
                        "raw_text": reading.raw_text,
                        "canonical": plate.text,
                        "text_confidence": reading.text_confidence,
                        "bbox": reading.detection.bbox.as_list(),
                    },
                )
            )

        # face branch results: bind to a vehicle box, match the gallery
        gallery = self._watchlists.faces()
        alerts_pending: list[Alert] = []
        for observation in face_observations:
            cx, cy = observation.detection.bbox.center()
            containing = [
                t for t in step.updated_tracks() if t.last_bbox.contains_point(cx, cy)
            ]
            bound = min(containing, key=lambda t: t.track_id) if containing else None
            if not gallery:
                continue
            result = match_gallery(
                observation.embedding,
                gallery,
                tau_face=self._config.tau_face,
                metric=self._config.face_metric,
            )
            if not result.matched:
                continue
            entry = gallery[result.best_index]
            records.append(
                self._record(
                    "face_matched",
                    time_ms,
                    {
                        "frame_id": frame.frame_id,
                        "camera_id": frame.camera_id,
                        "track_id": bound.track_id if bound else None,
                        "entry_id": entry.entry_id,
                        "person_name": entry.person_name,
                        "distance": result.best_distance,
                    },
                )
            )
            if bound is not None:
                bound.observe_face(entry.entry_id, result.best_distance)
            else:
                # person-only event: a known face with no vehicle under it
                event = VehicleEvent(
                    track_id=None,
                    camera_id=frame.camera_id,
                    frame_span=(frame_index, frame_index),
                    consensus_plate=None,
                    plate_decision=PlateMatchDecision.NONE,
                    face_result=(entry.entry_id, result.best_distance),
                )
                candidate = self._fuse_event(event, time_ms)
                if candidate is not None:
                    alerts_pending.append(candidate)

        # fusion checkpoints: periodic for live tracks, final for retiring ones
        for track in step.updated_tracks():
            if track.frames_seen % self._config.checkpoint_interval == 0:
                candidate = self._checkpoint(track, frame.camera_id, time_ms)
                if candidate is not None:
                    alerts_pending.append(candidate)
        for track in step.retired:
            candidate = self._checkpoint(track, frame.camera_id, time_ms)
            if candidate is not None:
                alerts_pending.append(candidate)

        for alert in alerts_pending:
            records.append(self._record("alert", time_ms, alert.to_payload()))

        for track in step.retired:
            records.append(self._track_closed_record(track, time_ms))

        records.append(
            self._record(
                "frame_processed",
                time_ms,
                {
                    "frame_id": frame.frame_id,
                    "camera_id": frame.camera_id,
                    "plate_count": len(plate_readings),
                    "face_count": len(face_observations),
                    "open_tracks": sum(len(t.tracks) for t in self._trackers.values()),
                },
            )
        )
        return records

    def finish(self, time_ms: int) -> list[EventLogRecord]:
        """Close out every live track at end of stream: final fusion plus
        track_closed records. Idempotent."""
        if self.finished:
            return []
        self.finished = True
        records: list[EventLogRecord] = []
        for camera_id in sorted(self._trackers):
            tracker = self._trackers[camera_id]
            for track in sorted(tracker.tracks, key=lambda t: t.track_id):
                candidate = self._checkpoint(track, camera_id, time_ms)
                if candidate is not None:
                    records.append(self._record("alert", time_ms, candidate.to_payload()))
                records.append(self._track_closed_record(track, time_ms))
            tracker.tracks = []
        return records

    def _track_closed_record(self, track: Track, time_ms: int) -> EventLogRecord:
        consensus = consensus_plate(track.plate_history)
        return self._record(
            "track_closed",
            time_ms,
            {
                "track_id": track.track_id,
                "camera_id": self._camera_of_track.get(track.track_id, ""),
                "frame_span": [track.first_seen_frame, track.last_seen_frame],
                "consensus_plate": consensus.text if consensus else None,
                "frames_seen": track.frames_seen,
            },
        )

    def _checkpoint(self, track: Track, camera_id: str, time_ms: int) -> Alert | None:
        consensus = consensus_plate(track.plate_history)
        if consensus is not None:
            decision = plate_match(
                consensus,
                self._watchlists.plates(),
                tau_plate=self._config.tau_plate,
                table=self._confusables,
            )
        else:
            decision = PlateMatchDecision.NONE
        event = VehicleEvent(
            track_id=track.track_id,
            camera_id=camera_id,
            frame_span=(track.first_seen_frame, track.last_seen_frame),
            consensus_plate=consensus,
            plate_decision=decision,
            face_result=track.face_best,
        )
        return self._fuse_event(event, time_ms)

    def _fuse_event(self, event: VehicleEvent, time_ms: int) -> Alert | None:
        candidate = fuse(
            event,
            self._watchlists.faces(),
            created_at_ms=time_ms,
            alert_id=len(self.alerts) + 1,
        )
        if candidate is None or not self._debouncer.should_emit(candidate):
            return None
        self.alerts.append(candidate)
        return candidate


@dataclass
class PipelineRunResult:
    event_log_path: str
    alert_count: int
    frames_processed: int


def build_backend(config: PipelineConfig) -> DetectorBackend:
    if config.backend == "stub":
        return load_stub_fixture(config.fixture_path, embedding_dim=config.embedding_dim)
    return OnnxBackend(
        plate_model_path=config.plate_model_path,
        face_model_path=config.face_model_path,
        ocr_model_path=config.ocr_model_path or None,
        embedder_model_path=config.embedder_model_path or None,
        embedding_dim=config.embedding_dim,
    )


_DONE = object()


def run_pipeline(
    config: PipelineConfig,
    watchlists: WatchlistStore | None = None,
) -> PipelineRunResult:
    """Run the full staged pipeline over the manifest and write the log.

    Stages (each its own thread): ingestion fan-out, plate branch, face
    branch, sequencer (tracker/fusion, sole owner of processor state),
    log writer. Bounded queues of config.queue_capacity connect them.
    """
    frames = load_manifest(config.manifest_path)
    backend = build_backend(config)
    if watchlists is None:
        watchlists = WatchlistStore(
            config.watchlist_path or None, embedding_dim=config.embedding_dim
        )
    processor = FrameProcessor(config, watchlists)

    capacity = config.queue_capacity
    plate_in: queue.Queue = queue.Queue(maxsize=capacity)
    face_in: queue.Queue = queue.Queue(maxsize=capacity)
    plate_out: queue.Queue = queue.Queue(maxsize=capacity)
    face_out: queue.Queue = queue.Queue(maxsize=capacity)
    write_q: queue.Queue = queue.Queue(maxsize=capacity)

    failure = threading.Event()
    errors: list[tuple[str, BaseException]] = []

    def _fail(stage: str, exc: BaseException) -> None:
        errors.append((stage, exc))
        failure.set()

    def _put(q: queue.Queue, item) -> bool:
        while not failure.is_set():
            try:
                q.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _get(q: queue.Queue):
        while not failure.is_set():
            try:
                return q.get(timeout=0.1)
            except queue.Empty:
                continue
        return _DONE

    def ingest_stage():
        try:
            for frame in frames:
                if not _put(plate_in, frame) or not _put(face_in, frame):
                    return
            _put(plate_in, _DONE)
            _put(face_in, _DONE)
        except BaseException as exc:  # noqa: BLE001 - stage boundary
            _fail("ingest", exc)

    def branch_stage(name: str, source: queue.Queue, sink: queue.Queue, detect: Callable):
        try:
            while True:
                frame = _get(source)
                if frame is _DONE:
                    _put(sink, _DONE)
                    return
                _put(sink, (frame, detect(frame)))
        except BaseException as exc:  # noqa: BLE001
            _fail(name, exc)
            _put(sink, _DONE)

    def sequencer_stage():
        try:
            last_time = 0
            while True:
                plate_item = _get(plate_out)
                face_item = _get(face_out)
                if plate_item is _DONE or face_item is _DONE:
                    if plate_item is _DONE and face_item is _DONE and not failure.is_set():
                        for record in processor.finish(last_time):
                            _put(write_q, record)
                    _put(write_q, _DONE)
                    return
                frame, readings = plate_item
                face_frame, observations = face_item
                if face_frame.frame_id != frame.frame_id:
                    raise RuntimeError("branch outputs desynchronized")
                last_time = frame.timestamp_ms
                for record in processor.process_frame(frame, readings, observations):
                    _put(write_q, record)
        except BaseException as exc:  # noqa: BLE001
            _fail("tracker-fusion", exc)
            _put(write_q, _DONE)

    def writer_stage():
        try:
            with open(config.event_log_path, "w", encoding="utf-8") as stream:
                while True:
                    record = _get(write_q)
                    if record is _DONE:
                        return
                    stream.write(record.to_line())
        except BaseException as exc:  # noqa: BLE001
            _fail("persistence", exc)

    threads = [
        threading.Thread(target=ingest_stage, name="ingest"),
        threading.Thread(
            target=branch_stage,
            args=("plate-branch", plate_in, plate_out, backend.detect_plates),
            name="plate-branch",
        ),
        threading.Thread(
            target=branch_stage,
            args=("face-branch", face_in, face_out, backend.detect_faces),
            name="face-branch",
        ),
        threading.Thread(target=sequencer_stage, name="tracker-fusion"),
        threading.Thread(target=writer_stage, name="persistence"),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        stage, exc = errors[0]
        raise RuntimeError(f"pipeline stage {stage!r} failed: {exc}") from exc
    return PipelineRunResult(
        event_log_path=config.event_log_path,
        alert_count=len(processor.alerts),
        frames_processed=processor.frames_processed,
    )

"""HTTP API over a frame-stepped pipeline instance.

The service owns a FrameProcessor plus the manifest cursor, persists
every event record to the log file as it is produced, and fans records
out to server-sent-event subscribers. Watchlist mutations go through the
shared WatchlistStore, so they are atomic and visible to the very next
frame or fusion checkpoint.

The stream endpoint replays from the in-memory record list and resumes
via the standard Last-Event-ID header carrying the last seen seq.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .config import PipelineConfig
from .errors import EmptyAfterNormalization, TooLong
from .eventlog import EventLogRecord
from .fusion import STATUS_ACKNOWLEDGED, STATUS_DISMISSED, STATUS_OPEN
from .manifest import load_manifest
from .pipeline import FrameProcessor, build_backend
from .watchlist import WatchlistStore

_ALERT_STATUSES = (STATUS_OPEN, STATUS_ACKNOWLEDGED, STATUS_DISMISSED)


class PipelineService:
    """Steppable pipeline + API state, guarded by one lock."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.watchlists = WatchlistStore(
            config.watchlist_path or None, embedding_dim=config.embedding_dim
        )
        self.processor = FrameProcessor(config, self.watchlists)
        self.backend = build_backend(config)
        self.frames = load_manifest(config.manifest_path) if config.manifest_path else []
        self._cursor = 0
        self.records: list[EventLogRecord] = []
        self._alert_seq: dict[int, int] = {}
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.RLock()
        log_path = Path(config.event_log_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        self._log_stream = open(log_path, "w", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            self._log_stream.close()

    # -- pipeline stepping ---------------------------------------------------

    def advance(self, frames: int) -> dict:
        """Process up to `frames` manifest frames; finalize at the end.

        Calling advance once the manifest is exhausted performs the final
        track flush exactly once and reports finished=True from then on.
        """
        with self._lock:
            processed = 0
            while processed < frames and self._cursor < len(self.frames):
                frame = self.frames[self._cursor]
                self._cursor += 1
                processed += 1
                readings = self.backend.detect_plates(frame)
                observations = self.backend.detect_faces(frame)
                for record in self.processor.process_frame(frame, readings, observations):
                    self._publish(record)
            if self._cursor >= len(self.frames) and not self.processor.finished:
                last_time = self.frames[-1].timestamp_ms if self.frames else 0
                for record in self.processor.finish(last_time):
                    self._publish(record)
            return {
                "processed": processed,
                "remaining": len(self.frames) - self._cursor,
                "finished": self.processor.finished,
            }

    def _publish(self, record: EventLogRecord) -> None:
        self.records.append(record)
        self._log_stream.write(record.to_line())
        self._log_stream.flush()
        if record.kind == "alert":
            self._alert_seq[record.payload["alert_id"]] = record.seq
        for sub in self._subscribers:
            sub.put(record)

    # -- read/mutate API state ------------------------------------------------

    def health(self) -> dict:
        with self._lock:
            return {
                "status": "ok",
                "frames_processed": self.processor.frames_processed,
                "open_alerts": sum(
                    1 for a in self.processor.alerts if a.status == STATUS_OPEN
                ),
            }

    def list_alerts(self, status: str | None, since_seq: int | None) -> list[dict]:
        with self._lock:
            items = []
            for alert in self.processor.alerts:
                if status and alert.status != status:
                    continue
                seq = self._alert_seq.get(alert.alert_id, 0)
                if since_seq is not None and seq <= since_seq:
                    continue
                payload = alert.to_payload()
                payload["seq"] = seq
                items.append(payload)
            return items

    def set_alert_status(self, alert_id: int, new_status: str) -> dict:
        with self._lock:
            alert = next(
                (a for a in self.processor.alerts if a.alert_id == alert_id), None
            )
            if alert is None:
                raise HTTPException(
                    status_code=404,
                    detail={"code": "alert_not_found", "alert_id": alert_id},
                )
            if alert.status != STATUS_OPEN:
                raise HTTPException(
                    status_code=409,
                    detail={
                        "code": "alert_not_open",
                        "alert_id": alert_id,
                        "status": alert.status,
                    },
                )
            alert.status = new_status
            payload = alert.to_payload()
            payload["seq"] = self._alert_seq.get(alert.alert_id, 0)
            return payload

    def subscribe(self, last_seq: int) -> tuple[list[EventLogRecord], queue.Queue]:
        with self._lock:
            backlog = [r for r in self.records if r.seq > last_seq]
            sub: queue.Queue = queue.Queue()
            self._subscribers.append(sub)
            return backlog, sub

    def unsubscribe(self, sub: queue.Queue) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)


class PlateEntryBody(BaseModel):
    plate: str
    label: str = ""


class FaceEntryBody(BaseModel):
    person_name: str
    embedding: list[float]
    linked_plates: list[str] = Field(default_factory=list)


class AdvanceBody(BaseModel):
    frames: int = 1


def create_app(service: PipelineService) -> FastAPI:
    app = FastAPI(title="roadwatch", docs_url=None, redoc_url=None)

    @app.get("/api/health")
    def health():
        return service.health()

    @app.get("/api/alerts")
    def alerts(status: str | None = None, since_seq: int | None = None):
        if status is not None and status not in _ALERT_STATUSES:
            raise HTTPException(
                status_code=400,
                detail={"code": "bad_status", "allowed": list(_ALERT_STATUSES)},
            )
        return service.list_alerts(status, since_seq)

    @app.post("/api/alerts/{alert_id}/ack")
    def ack(alert_id: int):
        return service.set_alert_status(alert_id, STATUS_ACKNOWLEDGED)

    @app.post("/api/alerts/{alert_id}/dismiss")
    def dismiss(alert_id: int):
        return service.set_alert_status(alert_id, STATUS_DISMISSED)

    @app.get("/api/watchlist/plates")
    def list_plates():
        return [
            {"id": e.entry_id, "plate": e.plate.text, "label": e.label}
            for e in service.watchlists.plates()
        ]

    @app.post("/api/watchlist/plates", status_code=201)
    def add_plate(body: PlateEntryBody):
        try:
            entry = service.watchlists.add_plate(body.plate, body.label)
        except (EmptyAfterNormalization, TooLong) as exc:
            raise HTTPException(
                status_code=400, detail={"code": "bad_plate", "message": str(exc)}
            ) from exc
        except ValueError as exc:
            raise HTTPException(
                status_code=409, detail={"code": "duplicate_plate", "message": str(exc)}
            ) from exc
        return {"id": entry.entry_id, "plate": entry.plate.text, "label": entry.label}

    @app.delete("/api/watchlist/plates/{entry_id}")
    def remove_plate(entry_id: str):
        if not service.watchlists.remove_plate(entry_id):
            raise HTTPException(
                status_code=404, detail={"code": "plate_not_found", "id": entry_id}
            )
        return {"removed": entry_id}

    @app.get("/api/watchlist/faces")
    def list_faces():
        return [
            {
                "id": e.entry_id,
                "person_name": e.person_name,
                "embedding": list(e.embedding.values),
                "linked_plates": [p.text for p in e.linked_plates],
            }
            for e in service.watchlists.faces()
        ]

    @app.post("/api/watchlist/faces", status_code=201)
    def add_face(body: FaceEntryBody):
        try:
            entry = service.watchlists.add_face(
                body.person_name, body.embedding, body.linked_plates
            )
        except (EmptyAfterNormalization, TooLong, ValueError) as exc:
            raise HTTPException(
                status_code=400, detail={"code": "bad_face_entry", "message": str(exc)}
            ) from exc
        return {
            "id": entry.entry_id,
            "person_name": entry.person_name,
            "linked_plates": [p.text for p in entry.linked_plates],
        }

    @app.delete("/api/watchlist/faces/{entry_id}")
    def remove_face(entry_id: str):
        if not service.watchlists.remove_face(entry_id):
            raise HTTPException(
                status_code=404, detail={"code": "face_not_found", "id": entry_id}
            )
        return {"removed": entry_id}

    @app.post("/api/pipeline/advance")
    def advance(body: AdvanceBody):
        if body.frames < 1:
            raise HTTPException(
                status_code=400, detail={"code": "bad_frame_count", "frames": body.frames}
            )
        return service.advance(body.frames)

    @app.get("/api/events/stream")
    def stream(request: Request):
        last_seq = 0
        header = request.headers.get("last-event-id")
        if header:
            try:
                last_seq = int(header)
            except ValueError as exc:
                raise HTTPException(
                    status_code=400, detail={"code": "bad_last_event_id", "value": header}
                ) from exc

        def frames() -> Iterator[str]:
            backlog, sub = service.subscribe(last_seq)
            try:
                for record in backlog:
                    yield _sse_frame(record)
                while True:
                    try:
                        record = sub.get(timeout=0.5)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse_frame(record)
            finally:
                service.unsubscribe(sub)

        return StreamingResponse(
            frames(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app


def _sse_frame(record: EventLogRecord) -> str:
    body = json.dumps(
        {
            "seq": record.seq,
            "kind": record.kind,
            "logical_time_ms": record.logical_time_ms,
            "payload": record.payload,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return f"id: {record.seq}\ndata: {body}\n\n"


def serve_api(config: PipelineConfig) -> None:
    """Run the API until interrupted. Raises on an unusable bind address."""
    import uvicorn

    service = PipelineService(config)
    app = create_app(service)
    try:
        uvicorn.run(app, host=config.api_host, port=config.api_port, log_level="warning")
    finally:
        service.close()

"""Frame manifest loading: the pipeline's notion of a video.

Frames arrive as image references with logical timestamps, one JSON
object per line: {"frame_id", "camera_id", "timestamp_ms", "image_path"}.
All validation happens up front so a bad manifest aborts before the
first frame is emitted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator

from .backends import FrameRef
from .errors import ManifestSchemaError, NonMonotoneTimestamps

_FIELDS = {"frame_id", "camera_id", "timestamp_ms", "image_path"}


def load_manifest(path: str | Path) -> list[FrameRef]:
    """Load and validate a manifest, returning frames in processing order.

    Order is global timestamp, ties broken by camera_id then frame_id.
    Per-camera timestamps must be non-decreasing and frame ids unique.
    """
    frames: list[FrameRef] = []
    seen_ids: set[str] = set()
    last_ts: dict[str, int] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestSchemaError(f"invalid JSON: {exc}", line=lineno) from exc
        if not isinstance(row, dict) or set(row) != _FIELDS:
            raise ManifestSchemaError(
                f"manifest row must have exactly fields {sorted(_FIELDS)}", line=lineno
            )
        frame_id = row["frame_id"]
        camera_id = row["camera_id"]
        timestamp = row["timestamp_ms"]
        if not isinstance(frame_id, str) or not frame_id:
            raise ManifestSchemaError("frame_id must be a non-empty string", line=lineno)
        if not isinstance(camera_id, str) or not camera_id:
            raise ManifestSchemaError("camera_id must be a non-empty string", line=lineno)
        if not isinstance(timestamp, int) or isinstance(timestamp, bool) or timestamp < 0:
            raise ManifestSchemaError(
                "timestamp_ms must be a non-negative integer", line=lineno
            )
        if not isinstance(row["image_path"], str):
            raise ManifestSchemaError("image_path must be a string", line=lineno)
        if frame_id in seen_ids:
            raise ManifestSchemaError(f"duplicate frame_id {frame_id!r}", line=lineno)
        seen_ids.add(frame_id)
        if camera_id in last_ts and timestamp < last_ts[camera_id]:
            raise NonMonotoneTimestamps(
                f"camera {camera_id!r}: timestamp {timestamp} after {last_ts[camera_id]} "
                f"(manifest line {lineno})"
            )
        last_ts[camera_id] = timestamp
        frames.append(
            FrameRef(
                frame_id=frame_id,
                camera_id=camera_id,
                timestamp_ms=timestamp,
                image_path=row["image_path"],
            )
        )
    frames.sort(key=lambda f: (f.timestamp_ms, f.camera_id, f.frame_id))
    return frames


def ingest(path: str | Path) -> Iterator[FrameRef]:
    """Validated frame stream in global timestamp order."""
    yield from load_manifest(path)

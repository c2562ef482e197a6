"""Append-only event log, one JSON object per line.

A record is written as a whole line, so a crash can only ever leave one
partial line at the end of the file. Reloading tolerates exactly that: a
truncated trailing line is detected and reported, everything before it
loads normally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import SchemaError

EVENT_KINDS = (
    "frame_processed",
    "plate_read",
    "face_matched",
    "track_opened",
    "track_closed",
    "alert",
)


@dataclass(frozen=True)
class EventLogRecord:
    seq: int
    kind: str
    logical_time_ms: int
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.seq < 1:
            raise ValueError(f"seq must be >= 1: {self.seq}")

    def to_line(self) -> str:
        # sort_keys keeps the byte stream independent of dict build order
        return (
            json.dumps(
                {
                    "seq": self.seq,
                    "kind": self.kind,
                    "logical_time_ms": self.logical_time_ms,
                    "payload": self.payload,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
            + "\n"
        )

    @classmethod
    def from_line(cls, line: str) -> "EventLogRecord":
        row = json.loads(line)
        return cls(
            seq=row["seq"],
            kind=row["kind"],
            logical_time_ms=row["logical_time_ms"],
            payload=row["payload"],
        )


@dataclass
class LoadedLog:
    records: list[EventLogRecord]
    truncated_tail: str | None  # the partial trailing line, if any


def read_event_log(path: str | Path) -> LoadedLog:
    """Load a log, reporting (not failing on) a partial trailing line.

    Any malformed line other than an unterminated final one is a real
    SchemaError: records are written atomically per line, so corruption
    mid-file means the file is not one of ours.
    """
    raw = Path(path).read_text(encoding="utf-8")
    records: list[EventLogRecord] = []
    truncated: str | None = None
    if raw:
        complete, sep, tail = raw.rpartition("\n")
        if tail:
            truncated = tail
        lines = complete.splitlines() if sep else []
        last_seq = 0
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = EventLogRecord.from_line(line)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"corrupt event record: {exc}", line=lineno) from exc
            if record.seq <= last_seq:
                raise SchemaError(
                    f"sequence regression {last_seq} -> {record.seq}", line=lineno
                )
            last_seq = record.seq
            records.append(record)
    return LoadedLog(records=records, truncated_tail=truncated)


def write_event_log(path: str | Path, records: Iterable[EventLogRecord]) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        for record in records:
            stream.write(record.to_line())

"""Operator-maintained watchlists: plates of interest and known faces.

Both lists live in one JSON document. Writes go through a temp file and
an atomic rename so a reader never observes a half-written document.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .errors import SchemaError
from .faces import Embedding, GalleryEntry
from .plates import CanonicalPlate, PlateWatchEntry, canonicalize


class WatchlistStore:
    """In-memory watchlists with write-through persistence.

    Mutations are serialized by a lock and become visible to readers
    atomically (snapshot lists are rebuilt under the lock).
    """

    def __init__(self, path: str | Path | None = None, embedding_dim: int = 128):
        self._path = Path(path) if path else None
        self._embedding_dim = embedding_dim
        self._lock = threading.Lock()
        self._plates: list[PlateWatchEntry] = []
        self._faces: list[GalleryEntry] = []
        self._next_plate_id = 1
        self._next_face_id = 1
        if self._path and self._path.exists():
            self._load()

    # -- snapshots ---------------------------------------------------------

    def plates(self) -> list[PlateWatchEntry]:
        with self._lock:
            return list(self._plates)

    def faces(self) -> list[GalleryEntry]:
        with self._lock:
            return list(self._faces)

    # -- mutations ---------------------------------------------------------

    def add_plate(self, plate_text: str, label: str = "") -> PlateWatchEntry:
        plate = canonicalize(plate_text)
        with self._lock:
            if any(e.plate.text == plate.text for e in self._plates):
                raise ValueError(f"plate {plate.text} is already watchlisted")
            entry = PlateWatchEntry(
                entry_id=f"p{self._next_plate_id}", plate=plate, label=label
            )
            self._next_plate_id += 1
            self._plates.append(entry)
            self._persist()
            return entry

    def add_face(
        self,
        person_name: str,
        embedding: list[float],
        linked_plates: list[str] | None = None,
    ) -> GalleryEntry:
        emb = Embedding.of(embedding)
        if emb.dim != self._embedding_dim:
            raise ValueError(
                f"embedding has {emb.dim} values, expected {self._embedding_dim}"
            )
        linked = tuple(canonicalize(p) for p in (linked_plates or []))
        with self._lock:
            entry = GalleryEntry(
                entry_id=f"f{self._next_face_id}",
                person_name=person_name,
                embedding=emb,
                linked_plates=linked,
            )
            self._next_face_id += 1
            self._faces.append(entry)
            self._persist()
            return entry

    def remove_plate(self, entry_id: str) -> bool:
        with self._lock:
            before = len(self._plates)
            self._plates = [e for e in self._plates if e.entry_id != entry_id]
            if len(self._plates) != before:
                self._persist()
                return True
            return False

    def remove_face(self, entry_id: str) -> bool:
        with self._lock:
            before = len(self._faces)
            self._faces = [e for e in self._faces if e.entry_id != entry_id]
            if len(self._faces) != before:
                self._persist()
                return True
            return False

    # -- persistence -------------------------------------------------------

    def _persist(self) -> None:
        if self._path is None:
            return
        document = {
            "plates": [
                {"id": e.entry_id, "plate": e.plate.text, "label": e.label}
                for e in self._plates
            ],
            "faces": [
                {
                    "id": e.entry_id,
                    "person_name": e.person_name,
                    "embedding": list(e.embedding.values),
                    "linked_plates": [p.text for p in e.linked_plates],
                }
                for e in self._faces
            ],
        }
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        tmp.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self._path)

    def _load(self) -> None:
        try:
            document = json.loads(self._path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"watchlist file is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise SchemaError("watchlist document must be an object")
        unknown = set(document) - {"plates", "faces"}
        if unknown:
            raise SchemaError(f"unknown watchlist sections {sorted(unknown)}")
        for row in document.get("plates", []):
            entry = PlateWatchEntry(
                entry_id=str(row["id"]),
                plate=CanonicalPlate(row["plate"]),
                label=row.get("label", ""),
            )
            self._plates.append(entry)
            self._next_plate_id = max(self._next_plate_id, _numeric_suffix(entry.entry_id) + 1)
        for row in document.get("faces", []):
            emb = Embedding.of(row["embedding"])
            if emb.dim != self._embedding_dim:
                raise SchemaError(
                    f"face {row['id']}: embedding has {emb.dim} values, "
                    f"expected {self._embedding_dim}"
                )
            entry = GalleryEntry(
                entry_id=str(row["id"]),
                person_name=row.get("person_name", ""),
                embedding=emb,
                linked_plates=tuple(CanonicalPlate(p) for p in row.get("linked_plates", [])),
            )
            self._faces.append(entry)
            self._next_face_id = max(self._next_face_id, _numeric_suffix(entry.entry_id) + 1)


def _numeric_suffix(entry_id: str) -> int:
    digits = "".join(c for c in entry_id if c.isdigit())
    return int(digits) if digits else 0

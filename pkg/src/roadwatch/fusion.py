"""Combined face+plate decision rules and alert debouncing.

The rule table is evaluated top-down, first hit wins:

  1. face matched entry E, plate decision hit, consensus plate is one of
     E's linked plates            -> CONFIRMED_SUSPECT (critical)
  2. face matched entry E, and either no consensus plate or a plate not
     linked to E                  -> VEHICLE_SWITCH (high)
  3. no face match, plate decision hit -> WATCHLISTED_PLATE (medium)
  4. otherwise                     -> no alert

Rule 2 is the motivating scenario: a known suspect seen over a vehicle
that is not registered to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .faces import GalleryEntry
from .plates import CanonicalPlate, PlateMatchDecision

DEFAULT_COOLDOWN_MS = 30_000

KIND_CONFIRMED_SUSPECT = "CONFIRMED_SUSPECT"
KIND_VEHICLE_SWITCH = "VEHICLE_SWITCH"
KIND_WATCHLISTED_PLATE = "WATCHLISTED_PLATE"

SEVERITY_BY_KIND: Mapping[str, str] = {
    KIND_CONFIRMED_SUSPECT: "critical",
    KIND_VEHICLE_SWITCH: "high",
    KIND_WATCHLISTED_PLATE: "medium",
}

STATUS_OPEN = "open"
STATUS_ACKNOWLEDGED = "acknowledged"
STATUS_DISMISSED = "dismissed"


@dataclass(frozen=True)
class VehicleEvent:
    """Snapshot of one track at a fusion checkpoint.

    track_id is None for person-only events (a face observed outside any
    vehicle box); those carry no plate evidence and can only fire rule 2.
    """

    track_id: int | None
    camera_id: str
    frame_span: tuple[int, int]
    consensus_plate: CanonicalPlate | None
    plate_decision: PlateMatchDecision
    face_result: tuple[str, float] | None  # (gallery entry_id, distance)


@dataclass
class Alert:
    alert_id: int
    kind: str
    severity: str
    track_id: int | None
    evidence: dict
    created_at_ms: int
    status: str = STATUS_OPEN
    entity_key: str = ""

    def to_payload(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "kind": self.kind,
            "severity": self.severity,
            "track_id": self.track_id,
            "evidence": self.evidence,
            "created_at_ms": self.created_at_ms,
            "status": self.status,
        }


def fuse(
    event: VehicleEvent,
    gallery: Sequence[GalleryEntry],
    created_at_ms: int,
    alert_id: int,
) -> Alert | None:
    """Apply the rule table to a finalized vehicle event.

    Total: every input lands in exactly one of the four outcomes.
    """
    entry = None
    if event.face_result is not None:
        entry_id = event.face_result[0]
        entry = next((e for e in gallery if e.entry_id == entry_id), None)

    plate_hit = event.plate_decision.hit
    linked = (
        entry is not None
        and event.consensus_plate is not None
        and any(p.text == event.consensus_plate.text for p in entry.linked_plates)
    )

    if entry is not None and plate_hit and linked:
        kind = KIND_CONFIRMED_SUSPECT
        entity_key = f"face:{entry.entry_id}"
    elif entry is not None and (event.consensus_plate is None or not linked):
        kind = KIND_VEHICLE_SWITCH
        entity_key = f"face:{entry.entry_id}"
    elif entry is None and plate_hit:
        kind = KIND_WATCHLISTED_PLATE
        entity_key = f"plate:{event.plate_decision.matched_entry_id}"
    else:
        return None

    evidence = {
        "plate_decision": {
            "kind": event.plate_decision.kind,
            "distance": event.plate_decision.distance,
            "matched_entry_id": event.plate_decision.matched_entry_id,
        },
        "consensus_plate": event.consensus_plate.text if event.consensus_plate else None,
        "face": (
            {"entry_id": event.face_result[0], "distance": event.face_result[1]}
            if event.face_result
            else None
        ),
        "frame_span": list(event.frame_span),
        "camera_id": event.camera_id,
    }
    return Alert(
        alert_id=alert_id,
        kind=kind,
        severity=SEVERITY_BY_KIND[kind],
        track_id=event.track_id,
        evidence=evidence,
        created_at_ms=created_at_ms,
        entity_key=entity_key,
    )


@dataclass
class AlertDebouncer:
    """Suppresses repeat alerts for the same (kind, entity) within a window.

    The window is inclusive: a repeat exactly cooldown_ms after the last
    emission is still suppressed.
    """

    cooldown_ms: int = DEFAULT_COOLDOWN_MS
    _last_emitted: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.cooldown_ms < 0:
            raise ValueError(f"cooldown_ms must be >= 0: {self.cooldown_ms}")

    def should_emit(self, candidate: Alert) -> bool:
        key = (candidate.kind, candidate.entity_key)
        last = self._last_emitted.get(key)
        if last is not None and candidate.created_at_ms - last <= self.cooldown_ms:
            return False
        self._last_emitted[key] = candidate.created_at_ms
        return True

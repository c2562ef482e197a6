"""IoU-based track association and per-track plate consensus.

Tracks are built from plate-branch detections, which stand in for the
vehicle: the plate box is the only per-vehicle geometry the detectors
provide. Face observations are bound to a track elsewhere, by testing the
face box center against the track's last box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterator, Sequence

from .geometry import BBox, Detection, iou
from .plates import CanonicalPlate

DEFAULT_IOU_ASSOC = 0.3
DEFAULT_MAX_AGE = 5


@dataclass
class Track:
    track_id: int
    last_bbox: BBox
    first_seen_frame: int
    last_seen_frame: int
    age_missed: int = 0
    frames_seen: int = 1
    plate_history: list[tuple[CanonicalPlate, float]] = field(default_factory=list)
    face_best: tuple[str, float] | None = None

    def observe_plate(self, plate: CanonicalPlate, text_confidence: float) -> None:
        self.plate_history.append((plate, text_confidence))

    def observe_face(self, entry_id: str, distance: float) -> None:
        if self.face_best is None or distance < self.face_best[1]:
            self.face_best = (entry_id, distance)


@dataclass(frozen=True)
class AssociationStep:
    """Result of feeding one frame's detections to the tracker."""

    live: list[Track]
    matched: list[tuple[Track, int]]  # (track, detection index)
    opened: list[tuple[Track, int]]  # (new track, detection index)
    retired: list[Track]

    def updated_tracks(self) -> list[Track]:
        """Tracks that saw a detection this frame, new ones included."""
        return [t for t, _ in self.matched] + [t for t, _ in self.opened]


class VehicleTracker:
    """Greedy highest-IoU-first association with an age-out policy.

    Track ids are assigned monotonically and never reused within a run;
    pass a shared id_source to keep ids unique across several trackers.
    """

    def __init__(
        self,
        iou_assoc: float = DEFAULT_IOU_ASSOC,
        max_age: int = DEFAULT_MAX_AGE,
        id_source: Iterator[int] | None = None,
    ):
        if not 0.0 < iou_assoc < 1.0:
            raise ValueError(f"iou_assoc must be in (0, 1): {iou_assoc}")
        if max_age < 1:
            raise ValueError(f"max_age must be >= 1: {max_age}")
        self.iou_assoc = iou_assoc
        self.max_age = max_age
        self.tracks: list[Track] = []
        self._ids = id_source if id_source is not None else count(1)

    def step(self, detections: Sequence[Detection], frame_index: int) -> AssociationStep:
        """Associate one frame's detections with the live tracks.

        Candidate (track, detection) pairs at IoU >= iou_assoc are taken
        greedily by descending IoU (ties: lower track id, then lower
        detection index). Each track and each detection is used at most
        once per step. Unmatched detections open new tracks; unmatched
        tracks age and retire once age_missed exceeds max_age.
        """
        pairs = []
        for ti, track in enumerate(self.tracks):
            for di, det in enumerate(detections):
                overlap = iou(track.last_bbox, det.bbox)
                if overlap >= self.iou_assoc:
                    pairs.append((overlap, ti, di))
        pairs.sort(key=lambda p: (-p[0], self.tracks[p[1]].track_id, p[2]))

        matched_tracks: set[int] = set()
        matched_dets: set[int] = set()
        matched: list[tuple[Track, int]] = []
        for overlap, ti, di in pairs:
            if ti in matched_tracks or di in matched_dets:
                continue
            matched_tracks.add(ti)
            matched_dets.add(di)
            track = self.tracks[ti]
            track.last_bbox = detections[di].bbox
            track.last_seen_frame = frame_index
            track.age_missed = 0
            track.frames_seen += 1
            matched.append((track, di))

        opened: list[tuple[Track, int]] = []
        for di, det in enumerate(detections):
            if di in matched_dets:
                continue
            track = Track(
                track_id=next(self._ids),
                last_bbox=det.bbox,
                first_seen_frame=frame_index,
                last_seen_frame=frame_index,
            )
            opened.append((track, di))

        survivors: list[Track] = []
        retired: list[Track] = []
        for ti, track in enumerate(self.tracks):
            if ti in matched_tracks:
                survivors.append(track)
                continue
            track.age_missed += 1
            if track.age_missed > self.max_age:
                retired.append(track)
            else:
                survivors.append(track)
        self.tracks = survivors + [t for t, _ in opened]
        return AssociationStep(
            live=list(self.tracks), matched=matched, opened=opened, retired=retired
        )


def consensus_plate(
    history: Sequence[tuple[CanonicalPlate, float]],
) -> CanonicalPlate | None:
    """The plate string with the highest cumulative text confidence.

    Ties go to the string observed earliest. Empty history yields None.
    """
    if not history:
        return None
    totals: dict[str, float] = {}
    first_seen: dict[str, int] = {}
    for index, (plate, confidence) in enumerate(history):
        if plate.text not in totals:
            totals[plate.text] = 0.0
            first_seen[plate.text] = index
        totals[plate.text] += confidence
    best = min(totals, key=lambda text: (-totals[text], first_seen[text]))
    return CanonicalPlate(best)

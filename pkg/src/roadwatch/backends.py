"""Detector backends behind one uniform contract.

The stub backend replays a line-delimited fixture file and is the
default: every piece of pipeline logic is testable without any neural
model. The ONNX backend is an optional adapter for real plate/face
models; it is loaded lazily and never used by the acceptance suite.

Stub fixture format, one JSON object per line:

    {"frame_id": "f1", "kind": "plate", "bbox": [x1, y1, x2, y2],
     "confidence": 0.9, "raw_text": "MH 12 AB 1234", "text_confidence": 0.8}
    {"frame_id": "f1", "kind": "face", "bbox": [...], "confidence": 0.7,
     "embedding": [ ... D floats ... ]}

Rows for one frame_id must be contiguous; a frame_id reappearing after a
different frame's rows is a DuplicateFrameRow error at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import BackendUnavailable, DuplicateFrameRow, FrameNotFound, SchemaError
from .faces import Embedding
from .geometry import BBox, Detection


@dataclass(frozen=True)
class FrameRef:
    """A frame to process: identity, camera, logical time and image location."""

    frame_id: str
    camera_id: str
    timestamp_ms: int
    image_path: str

    def __post_init__(self):
        if self.timestamp_ms < 0:
            raise ValueError(f"negative timestamp for frame {self.frame_id!r}")


@dataclass(frozen=True)
class PlateReading:
    """A detected plate with the OCR text attached."""

    detection: Detection
    raw_text: str
    text_confidence: float

    def __post_init__(self):
        if not 0.0 <= self.text_confidence <= 1.0:
            raise ValueError(f"text_confidence outside [0, 1]: {self.text_confidence}")


@dataclass(frozen=True)
class FaceObservation:
    """A detected face with its embedding."""

    detection: Detection
    embedding: Embedding


class DetectorBackend(Protocol):
    def detect_plates(self, frame: FrameRef) -> list[PlateReading]: ...

    def detect_faces(self, frame: FrameRef) -> list[FaceObservation]: ...


_PLATE_KEYS = {"frame_id", "kind", "bbox", "confidence", "raw_text", "text_confidence"}
_FACE_KEYS = {"frame_id", "kind", "bbox", "confidence", "embedding"}


class StubBackend:
    """Closed-world fixture backend: frames not in the fixture yield []."""

    def __init__(
        self,
        plates: dict[str, list[PlateReading]],
        faces: dict[str, list[FaceObservation]],
    ):
        self._plates = plates
        self._faces = faces

    def __len__(self) -> int:
        return len(self._plates.keys() | self._faces.keys())

    def detect_plates(self, frame: FrameRef) -> list[PlateReading]:
        return list(self._plates.get(frame.frame_id, ()))

    def detect_faces(self, frame: FrameRef) -> list[FaceObservation]:
        return list(self._faces.get(frame.frame_id, ()))


def load_stub_fixture(path: str | Path, embedding_dim: int = 128) -> StubBackend:
    """Parse and validate a stub fixture file into an indexed backend.

    Detections are stored sorted by descending confidence (ties keep file
    order), so detect calls are deterministic and pre-sorted.
    """
    plates: dict[str, list[PlateReading]] = {}
    faces: dict[str, list[FaceObservation]] = {}
    closed_frames: set[str] = set()
    current_frame: str | None = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}", line=lineno) from exc
        if not isinstance(row, dict):
            raise SchemaError("row is not an object", line=lineno)

        frame_id = row.get("frame_id")
        if not isinstance(frame_id, str) or not frame_id:
            raise SchemaError("missing or invalid frame_id", line=lineno)
        if frame_id != current_frame:
            if frame_id in closed_frames:
                raise DuplicateFrameRow(
                    f"frame {frame_id!r} reappears after other frames", line=lineno
                )
            if current_frame is not None:
                closed_frames.add(current_frame)
            current_frame = frame_id

        kind = row.get("kind")
        if kind == "plate":
            _check_keys(row, _PLATE_KEYS, lineno)
            reading = PlateReading(
                detection=_parse_detection(row, lineno, class_id=0),
                raw_text=_require_str(row, "raw_text", lineno),
                text_confidence=_require_unit_float(row, "text_confidence", lineno),
            )
            plates.setdefault(frame_id, []).append(reading)
        elif kind == "face":
            _check_keys(row, _FACE_KEYS, lineno)
            embedding = row.get("embedding")
            if not isinstance(embedding, list) or len(embedding) != embedding_dim:
                raise SchemaError(
                    f"embedding must be a list of {embedding_dim} numbers", line=lineno
                )
            try:
                emb = Embedding.of(embedding)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"bad embedding: {exc}", line=lineno) from exc
            faces.setdefault(frame_id, []).append(
                FaceObservation(
                    detection=_parse_detection(row, lineno, class_id=1), embedding=emb
                )
            )
        else:
            raise SchemaError(f"kind must be 'plate' or 'face', got {kind!r}", line=lineno)

    for readings in plates.values():
        readings.sort(key=lambda r: -r.detection.confidence)
    for observations in faces.values():
        observations.sort(key=lambda o: -o.detection.confidence)
    return StubBackend(plates, faces)


def _check_keys(row: dict, allowed: set[str], lineno: int) -> None:
    unknown = set(row) - allowed
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}", line=lineno)
    missing = allowed - set(row)
    if missing:
        raise SchemaError(f"missing fields {sorted(missing)}", line=lineno)


def _parse_detection(row: dict, lineno: int, class_id: int) -> Detection:
    bbox = row.get("bbox")
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise SchemaError("bbox must be [x_min, y_min, x_max, y_max]", line=lineno)
    try:
        box = BBox(*(float(v) for v in bbox))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad bbox: {exc}", line=lineno) from exc
    return Detection(
        bbox=box,
        class_id=class_id,
        confidence=_require_unit_float(row, "confidence", lineno),
    )


def _require_str(row: dict, key: str, lineno: int) -> str:
    value = row.get(key)
    if not isinstance(value, str):
        raise SchemaError(f"{key} must be a string", line=lineno)
    return value


def _require_unit_float(row: dict, key: str, lineno: int) -> float:
    value = row.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"{key} must be a number", line=lineno)
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise SchemaError(f"{key} outside [0, 1]: {value}", line=lineno)
    return value


class OnnxBackend:
    """Adapter running plate/face models from ONNX interchange files.

    Model contract (ours, since no single convention exists):
      - detector sessions take a float32 NCHW image batch and emit rows of
        [x_min, y_min, x_max, y_max, confidence];
      - the OCR session takes a plate crop and emits character codes plus
        a confidence scalar;
      - the face embedder takes a face crop and emits a D-dim vector.

    Requires the optional onnxruntime dependency; kept out of the
    acceptance path. The stub backend carries all contract tests.
    """

    def __init__(
        self,
        plate_model_path: str | Path,
        face_model_path: str | Path,
        ocr_model_path: str | Path | None = None,
        embedder_model_path: str | Path | None = None,
        embedding_dim: int = 128,
    ):
        try:
            import onnxruntime as ort
        except ImportError as exc:
            raise BackendUnavailable(
                "onnxruntime is not installed; install it or use the stub backend"
            ) from exc
        for path in (plate_model_path, face_model_path, ocr_model_path, embedder_model_path):
            if path is not None and not Path(path).exists():
                raise BackendUnavailable(f"model file not found: {path}")
        self._plate_session = ort.InferenceSession(str(plate_model_path))
        self._face_session = ort.InferenceSession(str(face_model_path))
        self._ocr_session = (
            ort.InferenceSession(str(ocr_model_path)) if ocr_model_path else None
        )
        self._embedder_session = (
            ort.InferenceSession(str(embedder_model_path)) if embedder_model_path else None
        )
        self._embedding_dim = embedding_dim

    def _load_image(self, frame: FrameRef):
        import numpy as np

        path = Path(frame.image_path)
        if not path.exists():
            raise FrameNotFound(f"image not found for frame {frame.frame_id!r}: {path}")
        try:
            from PIL import Image
        except ImportError as exc:
            raise BackendUnavailable("Pillow is required for image decoding") from exc
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0

    def detect_plates(self, frame: FrameRef) -> list[PlateReading]:
        image = self._load_image(frame)
        readings = []
        for bbox, confidence in self._run_detector(self._plate_session, image):
            raw_text, text_confidence = self._read_text(image, bbox)
            readings.append(
                PlateReading(
                    detection=Detection(bbox=bbox, class_id=0, confidence=confidence),
                    raw_text=raw_text,
                    text_confidence=text_confidence,
                )
            )
        readings.sort(key=lambda r: -r.detection.confidence)
        return readings

    def detect_faces(self, frame: FrameRef) -> list[FaceObservation]:
        if self._embedder_session is None:
            raise BackendUnavailable("no face embedder model configured")
        image = self._load_image(frame)
        observations = []
        for bbox, confidence in self._run_detector(self._face_session, image):
            observations.append(
                FaceObservation(
                    detection=Detection(bbox=bbox, class_id=1, confidence=confidence),
                    embedding=Embedding.of(self._embed(self._crop(image, bbox))),
                )
            )
        observations.sort(key=lambda o: -o.detection.confidence)
        return observations

    @staticmethod
    def _crop(image, bbox: BBox):
        return image[
            int(max(bbox.y_min, 0)):max(int(bbox.y_max), 1),
            int(max(bbox.x_min, 0)):max(int(bbox.x_max), 1),
        ]

    @staticmethod
    def _run_detector(session, image) -> list[tuple[BBox, float]]:
        import numpy as np

        name = session.get_inputs()[0].name
        batch = np.transpose(image, (2, 0, 1))[None, ...]
        rows = np.asarray(session.run(None, {name: batch})[0]).reshape(-1, 5)
        results = []
        for x_min, y_min, x_max, y_max, conf in rows:
            conf = float(min(max(conf, 0.0), 1.0))
            results.append((BBox(float(x_min), float(y_min), float(x_max), float(y_max)), conf))
        return results

    def _read_text(self, image, bbox: BBox) -> tuple[str, float]:
        if self._ocr_session is None:
            return "", 0.0
        import numpy as np

        crop = self._crop(image, bbox)
        if crop.size == 0:
            return "", 0.0
        name = self._ocr_session.get_inputs()[0].name
        batch = np.transpose(crop, (2, 0, 1))[None, ...]
        text_codes, confidence = self._ocr_session.run(None, {name: batch})[:2]
        text = "".join(chr(int(c)) for c in np.asarray(text_codes).ravel() if int(c) > 0)
        return text, float(min(max(float(np.asarray(confidence).ravel()[0]), 0.0), 1.0))

    def _embed(self, crop) -> list[float]:
        import numpy as np

        name = self._embedder_session.get_inputs()[0].name
        batch = np.transpose(crop, (2, 0, 1))[None, ...]
        raw = self._embedder_session.run(None, {name: batch})[0]
        vector = np.asarray(raw, dtype=np.float64).ravel()[: self._embedding_dim]
        if vector.size < self._embedding_dim:
            vector = np.pad(vector, (0, self._embedding_dim - vector.size))
        return vector.tolist()

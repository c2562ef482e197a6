"""Pipeline configuration: one JSON file, every tunable in one place.

Unknown keys are rejected so a typo cannot silently fall back to a
default, and every threshold is range-checked at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .plates import DEFAULT_CONFUSABLE_PAIRS


@dataclass
class PipelineConfig:
    manifest_path: str = ""
    fixture_path: str = ""
    event_log_path: str = "events.log"
    watchlist_path: str = ""

    backend: str = "stub"  # "stub" | "onnx"
    plate_model_path: str = ""
    face_model_path: str = ""
    ocr_model_path: str = ""
    embedder_model_path: str = ""

    tau_face: float = 0.6
    face_metric: str = "l2"  # "l2" | "cosine"
    tau_plate: float = 1.0
    confusable_pairs: list[list[str]] = field(
        default_factory=lambda: [list(p) for p in DEFAULT_CONFUSABLE_PAIRS]
    )
    embedding_dim: int = 128

    iou_assoc: float = 0.3
    max_age: int = 5
    checkpoint_interval: int = 10
    cooldown_ms: int = 30_000

    queue_capacity: int = 64
    api_host: str = "127.0.0.1"
    api_port: int = 8787

    def validate(self) -> "PipelineConfig":
        if self.backend not in ("stub", "onnx"):
            raise ConfigError(f"backend must be 'stub' or 'onnx': {self.backend!r}")
        if self.face_metric not in ("l2", "cosine"):
            raise ConfigError(f"face_metric must be 'l2' or 'cosine': {self.face_metric!r}")
        if not self.tau_face > 0:
            raise ConfigError(f"tau_face must be > 0: {self.tau_face}")
        if self.tau_plate < 0:
            raise ConfigError(f"tau_plate must be >= 0: {self.tau_plate}")
        if not 0.0 < self.iou_assoc < 1.0:
            raise ConfigError(f"iou_assoc must be in (0, 1): {self.iou_assoc}")
        if self.max_age < 1:
            raise ConfigError(f"max_age must be >= 1: {self.max_age}")
        if self.checkpoint_interval < 1:
            raise ConfigError(f"checkpoint_interval must be >= 1: {self.checkpoint_interval}")
        if self.cooldown_ms < 0:
            raise ConfigError(f"cooldown_ms must be >= 0: {self.cooldown_ms}")
        if self.queue_capacity < 1:
            raise ConfigError(f"queue_capacity must be >= 1: {self.queue_capacity}")
        if self.embedding_dim < 1:
            raise ConfigError(f"embedding_dim must be >= 1: {self.embedding_dim}")
        if not 1 <= self.api_port <= 65535:
            raise ConfigError(f"api_port out of range: {self.api_port}")
        for pair in self.confusable_pairs:
            if len(pair) != 2 or any(len(str(c)) != 1 for c in pair):
                raise ConfigError(f"confusable pair must be two single characters: {pair!r}")
        return self

    def confusables(self) -> list[tuple[str, str]]:
        return [(str(a), str(b)) for a, b in self.confusable_pairs]


def load_config(path: str | Path) -> PipelineConfig:
    """Load, type-check and range-check a config file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> PipelineConfig:
    known = {f.name: f.type for f in fields(PipelineConfig)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cleaned = {}
    for key, value in raw.items():
        expected = _EXPECTED_TYPES[key]
        if not isinstance(value, expected) or isinstance(value, bool):
            raise ConfigError(
                f"config key {key!r} has wrong type {type(value).__name__}"
            )
        if key in _FLOAT_KEYS:
            value = float(value)
        cleaned[key] = value
    return PipelineConfig(**cleaned).validate()


_FLOAT_KEYS = {"tau_face", "tau_plate", "iou_assoc"}

_EXPECTED_TYPES = {
    "manifest_path": str,
    "fixture_path": str,
    "event_log_path": str,
    "watchlist_path": str,
    "backend": str,
    "plate_model_path": str,
    "face_model_path": str,
    "ocr_model_path": str,
    "embedder_model_path": str,
    "tau_face": (int, float),
    "face_metric": str,
    "tau_plate": (int, float),
    "confusable_pairs": list,
    "embedding_dim": int,
    "iou_assoc": (int, float),
    "max_age": int,
    "checkpoint_interval": int,
    "cooldown_ms": int,
    "queue_capacity": int,
    "api_host": str,
    "api_port": int,
}

"""Face embedding comparison against a watchlist gallery.

Embeddings are opaque fixed-dimension vectors produced elsewhere; nothing
here inspects them beyond distance computation. Matching iterates the
gallery and reports one boolean per entry plus the best (minimum
distance) hit, mirroring a compare-known-against-unknown workflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch
from .plates import CanonicalPlate

DEFAULT_EMBEDDING_DIM = 128
DEFAULT_TAU_FACE = 0.6


@dataclass(frozen=True)
class Embedding:
    """Fixed-length vector of finite reals."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("embedding is empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("embedding contains a non-finite value")

    @classmethod
    def of(cls, values: Sequence[float]) -> "Embedding":
        return cls(tuple(float(v) for v in values))

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class GalleryEntry:
    """A known face on the watchlist, with the plates registered to it."""

    entry_id: str
    person_name: str
    embedding: Embedding
    linked_plates: tuple[CanonicalPlate, ...] = ()


@dataclass(frozen=True)
class FaceMatchResult:
    """Booleans aligned with gallery order, plus the best hit if any."""

    booleans: tuple[bool, ...]
    best_index: int | None
    best_entry_id: str | None
    best_distance: float

    @property
    def matched(self) -> bool:
        return self.best_index is not None


def embedding_distance(a: Embedding, b: Embedding, metric: str = "l2") -> float:
    """Distance between two embeddings of equal dimension.

    "l2" is the Euclidean distance; "cosine" is 1 - cosine similarity
    (available behind the config flag, zero vectors treated as orthogonal).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"embedding dims differ: {a.dim} vs {b.dim}")
    if metric == "l2":
        return math.dist(a.values, b.values)
    if metric == "cosine":
        dot = sum(x * y for x, y in zip(a.values, b.values))
        norm = math.hypot(*a.values) * math.hypot(*b.values)
        if norm == 0.0:
            return 1.0
        return 1.0 - dot / norm
    raise ValueError(f"unknown distance metric: {metric!r}")


def match_gallery(
    probe: Embedding,
    gallery: Sequence[GalleryEntry],
    tau_face: float = DEFAULT_TAU_FACE,
    metric: str = "l2",
) -> FaceMatchResult:
    """Compare a probe embedding against every gallery entry.

    booleans[i] is True iff distance(probe, gallery[i]) <= tau_face. The
    best match is the argmin distance among True entries, ties broken by
    lowest index. An empty gallery yields empty booleans and no best.
    """
    if tau_face <= 0:
        raise ValueError(f"tau_face must be > 0: {tau_face}")
    booleans = []
    best_index: int | None = None
    best_distance = math.inf
    for i, entry in enumerate(gallery):
        d = embedding_distance(probe, entry.embedding, metric)
        hit = d <= tau_face
        booleans.append(hit)
        if hit and d < best_distance:
            best_distance = d
            best_index = i
    return FaceMatchResult(
        booleans=tuple(booleans),
        best_index=best_index,
        best_entry_id=gallery[best_index].entry_id if best_index is not None else None,
        best_distance=best_distance if best_index is not None else math.inf,
    )

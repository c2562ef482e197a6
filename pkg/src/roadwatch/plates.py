"""Plate text handling: OCR cleanup, grammar parsing and watchlist matching.

The fuzzy matcher is a Levenshtein dynamic program whose substitution cost
is 0 inside configurable confusable classes (characters OCR routinely
swaps, e.g. O and 0). With the default pairs the distance is a
pseudo-metric: symmetric, triangle inequality, but distinct strings can
sit at distance 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence

from .errors import EmptyAfterNormalization, TooLong

MAX_PLATE_LENGTH = 16

# dominant OCR confusions for Latin-script plates; override via config
DEFAULT_CONFUSABLE_PAIRS: tuple[tuple[str, str], ...] = (
    ("O", "0"),
    ("I", "1"),
    ("B", "8"),
    ("S", "5"),
    ("Z", "2"),
)


@dataclass(frozen=True)
class CanonicalPlate:
    """Uppercase A-Z / 0-9 plate text with no separators."""

    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("canonical plate text is empty")
        if len(self.text) > MAX_PLATE_LENGTH:
            raise ValueError(f"canonical plate text too long: {self.text!r}")
        if any(not (c.isascii() and (c.isdigit() or c.isupper())) for c in self.text):
            raise ValueError(f"non-canonical character in plate: {self.text!r}")


def canonicalize(raw: str) -> CanonicalPlate:
    """Uppercase the input and strip everything outside A-Z0-9.

    Raises EmptyAfterNormalization when nothing survives and TooLong when
    the result exceeds the maximum plate length.
    """
    cleaned = "".join(c for c in raw.upper() if c.isascii() and (c.isalpha() or c.isdigit()))
    if not cleaned:
        raise EmptyAfterNormalization(f"no plate characters in {raw!r}")
    if len(cleaned) > MAX_PLATE_LENGTH:
        raise TooLong(f"{len(cleaned)} chars after normalization (max {MAX_PLATE_LENGTH})")
    return CanonicalPlate(cleaned)


@dataclass(frozen=True)
class PlateParse:
    """Grammar decomposition LL D{1,2} A{0,3} N{1,4}, or the unstructured fallback.

    A structured parse re-serializes to exactly the canonical text.
    """

    text: str
    state_code: str | None = None
    district: str | None = None
    series: str | None = None
    number: str | None = None

    @property
    def structured(self) -> bool:
        return self.state_code is not None

    def serialize(self) -> str:
        if not self.structured:
            return self.text
        return f"{self.state_code}{self.district}{self.series}{self.number}"


def parse_plate(plate: CanonicalPlate) -> PlateParse:
    """Longest-match decomposition of a canonical plate.

    Letters (2) + digits (1-2) + letters (0-3) + digits (1-4), each run
    taken as long as the grammar allows. Anything else comes back as an
    unstructured parse rather than an error.
    """
    text = plate.text
    unstructured = PlateParse(text=text)

    pos = 0
    state = text[pos:pos + 2]
    if len(state) != 2 or not state.isalpha():
        return unstructured
    pos += 2

    district = _take_run(text, pos, str.isdigit, max_len=2)
    if not district:
        return unstructured
    pos += len(district)

    series = _take_run(text, pos, str.isalpha, max_len=3)
    pos += len(series)

    number = _take_run(text, pos, str.isdigit, max_len=4)
    if not number or pos + len(number) != len(text):
        return unstructured
    return PlateParse(
        text=text, state_code=state, district=district, series=series, number=number
    )


def _take_run(text: str, start: int, pred, max_len: int) -> str:
    end = start
    while end < len(text) and end - start < max_len and pred(text[end]):
        end += 1
    return text[start:end]


class ConfusableTable:
    """Symmetric zero-cost substitution classes for the plate distance."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = DEFAULT_CONFUSABLE_PAIRS):
        self._zero_cost: set[frozenset[str]] = set()
        for a, b in pairs:
            if len(a) != 1 or len(b) != 1:
                raise ValueError(f"confusable pair must be single characters: {(a, b)!r}")
            self._zero_cost.add(frozenset((a.upper(), b.upper())))

    def substitution_cost(self, a: str, b: str) -> float:
        if a == b or frozenset((a, b)) in self._zero_cost:
            return 0.0
        return 1.0

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(p)) for p in self._zero_cost)


_DEFAULT_TABLE = ConfusableTable()


def confusable_distance(
    a: CanonicalPlate,
    b: CanonicalPlate,
    table: ConfusableTable | None = None,
) -> float:
    """Edit distance with unit insert/delete cost and confusable-aware
    substitution cost (0 within a confusable class, 1 otherwise)."""
    table = table or _DEFAULT_TABLE
    s, t = a.text, b.text
    if len(s) < len(t):
        s, t = t, s
    previous = list(range(len(t) + 1))
    for i, cs in enumerate(s, start=1):
        current = [i] + [0] * len(t)
        for j, ct in enumerate(t, start=1):
            current[j] = min(
                previous[j] + 1,  # delete
                current[j - 1] + 1,  # insert
                previous[j - 1] + table.substitution_cost(cs, ct),
            )
        previous = current
    return float(previous[-1])


@dataclass(frozen=True)
class PlateWatchEntry:
    """A plate of interest on the watchlist."""

    entry_id: str
    plate: CanonicalPlate
    label: str = ""


@dataclass(frozen=True)
class PlateMatchDecision:
    kind: str  # "Exact" | "Fuzzy" | "None"
    distance: float = 0.0
    matched_entry_id: str | None = None

    NONE: ClassVar["PlateMatchDecision"]

    @property
    def hit(self) -> bool:
        return self.kind in ("Exact", "Fuzzy")


PlateMatchDecision.NONE = PlateMatchDecision(kind="None")


def plate_match(
    observed: CanonicalPlate,
    watchlist: Sequence[PlateWatchEntry],
    tau_plate: float = 1.0,
    table: ConfusableTable | None = None,
) -> PlateMatchDecision:
    """Decide whether an observed plate hits the watchlist.

    Exact when the confusable distance to some entry is 0; otherwise
    Fuzzy for the minimum-distance entry within tau_plate, ties broken by
    insertion order; otherwise None.
    """
    if tau_plate < 0:
        raise ValueError(f"tau_plate must be >= 0: {tau_plate}")
    best_entry: PlateWatchEntry | None = None
    best_distance = float("inf")
    for entry in watchlist:
        d = confusable_distance(observed, entry.plate, table)
        if d == 0.0:
            return PlateMatchDecision("Exact", 0.0, entry.entry_id)
        if d < best_distance:
            best_distance = d
            best_entry = entry
    if best_entry is not None and best_distance <= tau_plate:
        return PlateMatchDecision("Fuzzy", best_distance, best_entry.entry_id)
    return PlateMatchDecision.NONE

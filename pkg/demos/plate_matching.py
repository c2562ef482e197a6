"""Plate text cleanup and confusable-aware watchlist matching
=============================================================
"""

from roadwatch import (
    CanonicalPlate,
    PlateWatchEntry,
    canonicalize,
    confusable_distance,
    parse_plate,
    plate_match,
)

# OCR output arrives messy; canonicalization strips everything that is not
# A-Z or 0-9 and uppercases the rest.
plate = canonicalize(" mh-12 ab 1234 ")
print("canonical:", plate.text)

# The grammar splits state / district / series / number when it fits.
parse = parse_plate(plate)
print("parsed:", parse.state_code, parse.district, parse.series, parse.number)
print("unstructured fallback:", parse_plate(CanonicalPlate("ZZZZZZ")).structured)

# OCR loves swapping O/0, I/1, B/8, S/5, Z/2. Those substitutions are free:
print("distance KA0I vs KA01:", confusable_distance(CanonicalPlate("KA0I"), CanonicalPlate("KA01")))
print("distance MH12 vs MH13:", confusable_distance(CanonicalPlate("MH12"), CanonicalPlate("MH13")))

# Watchlist matching: exact via confusables, fuzzy within a tolerance.
watchlist = [
    PlateWatchEntry(entry_id="p1", plate=CanonicalPlate("KA01F555"), label="stolen"),
    PlateWatchEntry(entry_id="p2", plate=CanonicalPlate("MH12AB1234"), label="bolo"),
]
for observed in ("KA0IF555", "MH12AB1235", "XX99XX9999"):
    decision = plate_match(CanonicalPlate(observed), watchlist, tau_plate=1.0)
    print(f"{observed}: {decision.kind} (distance {decision.distance}, entry {decision.matched_entry_id})")

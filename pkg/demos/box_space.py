"""Box space of Z along 2^i Z: uniform covers, pullbacks and the orbit picture.

Run: python3 demos/box_space.py
"""

from coarselab.boxspace import (BoxSpace, assemble_box_cover, odometer_equivalence_check,
                                translation_check, uniform_family_check, verify_box_cover)
from coarselab.covers import IntervalControl, interval_cover
from coarselab.quotients import build_quotient, z_filtration


def main():
    filt = z_filtration(10)
    box = BoxSpace.from_filtration(filt, levels=range(1, 11))
    for r in (1, 2, 4):
        covers = [IntervalControl(q, aligned=True).cover(r) for q in box.quotients]
        v = uniform_family_check(box, 1, r, 2 * r - 1, covers)
        ok, _ = verify_box_cover(box, assemble_box_cover(box, covers), 1, r, max(2 * r - 1, 2 * r))
        print(f"r={r}: every level passes at R={2 * r - 1}: {v.passed}; glued cover passes: {ok}")

    q = build_quotient(filt.spec, filt[4])
    v = odometer_equivalence_check(filt, 4, interval_cover(q, 1), 1, [5, 6, 7])
    print("pullbacks from C16 keep component shapes:", v.passed, v.per_level)
    print("orbit pieces equal metric pieces on C16:", translation_check(q, [0, 1, 2, 7, 9, 10], 2))


if __name__ == "__main__":
    main()

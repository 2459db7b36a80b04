"""Covers of cyclic quotients: intervals, expansion, products and a lower bound.

Run: python3 demos/cyclic_covers.py
"""

from coarselab import FreeAbelian, SubgroupSpec, build_quotient
from coarselab.covers import (IntervalControl, brute_force_min_cover, interval_cover,
                              iterate_expand, product_cover, verify_cover)


def main():
    c16 = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(16))
    cov = interval_cover(c16, 2)
    print("C16, alternating blocks of 4:", [sorted(c) for c in cov.classes])
    for R in (2, 3):
        cert = verify_cover(c16, cov, 1, 2, R)
        print(f"  at (1, 2, {R}): {cert.verdict}, worst component {cert.worst_component_diameter}")

    c64 = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(64))
    for k in (3, 4):
        c = iterate_expand(c64, IntervalControl(c64), 1, k)
        cert = verify_cover(c64, c, k - 1, 1, c.R)
        print(f"C64 expanded to {k} classes: R = {c.R}, multiplicity {cert.multiplicity}, {cert.verdict}")

    cx = iterate_expand(c16, IntervalControl(c16), 1, 3)
    qp, pc = product_cover(c16, cx, 1, c16, cx, 1)
    cert = verify_cover(qp, pc, 2, 1, 2 * cx.R)
    print(f"(Z/16)^2 product cover: {len(pc)} classes, multiplicity {cert.multiplicity}, {cert.verdict}")

    c32 = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(32))
    res = brute_force_min_cover(c32, 1, 15, 3)
    print(f"C32 at r=1, R=15: fewest classes {res.minimum} (refuted: {res.refuted}, "
          f"{res.explored} search nodes)")


if __name__ == "__main__":
    main()

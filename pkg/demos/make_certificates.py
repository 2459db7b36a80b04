"""Regenerate the certificates shipped in demos/certificates.

Run: python3 demos/make_certificates.py
Each file re-verifies with ``coarselab verify FILE``.
"""

import os

from coarselab import BaumslagSolitar, FreeAbelian, Lamplighter, SubgroupSpec, build_quotient
from coarselab.certificates import certificate_json, hurewicz_certificate_json, write_json
from coarselab.covers import IntervalControl, interval_cover, iterate_expand, verify_cover
from coarselab.hurewicz import build_map, hurewicz_cover

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "certificates")


def main():
    c16 = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(16))
    write_json(os.path.join(HERE, "c16_r2.json"),
               certificate_json(verify_cover(c16, interval_cover(c16, 2), 1, 2, 3)))
    c64 = build_quotient(FreeAbelian(1), SubgroupSpec.moduli(64))
    c = iterate_expand(c64, IntervalControl(c64), 1, 3)
    write_json(os.path.join(HERE, "c64_three_classes.json"),
               certificate_json(verify_cover(c64, c, 2, 1, c.R)))
    for name, spec, sub in (("bs2_15_4", BaumslagSolitar(2), SubgroupSpec.congruence(15, 4)),
                            ("lamplighter2_4", Lamplighter(2), SubgroupSpec.period(4))):
        res = hurewicz_cover(build_map(spec, sub), 1)
        write_json(os.path.join(HERE, f"{name}_hurewicz.json"), hurewicz_certificate_json(res))
    print("wrote", sorted(os.listdir(HERE)))


if __name__ == "__main__":
    main()

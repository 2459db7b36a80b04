"""Three-class covers of Baumslag-Solitar quotients from the extension Z[1/n] -> BS(1,n) -> Z.

Run: python3 demos/baumslag_solitar.py
"""

from coarselab import SubgroupSpec
from coarselab.hirsch import derive
from coarselab.hurewicz import BSFiberOracle, build_map, hurewicz_cover
from coarselab.quotients import bs_prime_power_filtration


def main():
    filt = bs_prime_power_filtration(2, 4)
    for j in range(1, 5):
        fmap = build_map(filt.spec, filt[j])
        res = hurewicz_cover(fmap, 1)
        print(f"level {j} {filt[j].params}: {len(fmap.domain)} vertices, "
              f"{len(res.cover)} classes, R_out {res.R_out}, "
              f"worst component {res.certificate.worst_component_diameter}, {res.certificate.verdict}")
    print("schedule at r=1:", res.schedule.to_json())

    # the bound is loose but level-independent; the fibre oracle itself is tight
    fmap = build_map(filt.spec, SubgroupSpec.congruence(255, 8))
    oracle = BSFiberOracle(fmap)
    print("fibre over one height at s=1: bound", oracle.bound(1, 0))

    value, lines = derive("Ext(Local(1), Z(1))")
    print("\n".join(lines))


if __name__ == "__main__":
    main()

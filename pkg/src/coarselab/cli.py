"""Command line interface.

Exit codes: 0 pass, 1 verification failure, 2 invalid input, 3 resource cap.
``COARSELAB_CAP`` overrides the vertex cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .certificates import (certificate_json, cover_from_json, hurewicz_certificate_json, load_json,
                           verify_certificate, write_json, write_text)
from .covers import (Cover, IntervalControl, brute_force_min_cover, expand_cover, interval_cover,
                     iterate_expand, product_cover, verify_cover)
from .errors import CoarseLabError, ConsistencyError, ResourceError, ValidationError
from .experiments import ExperimentConfig, run_experiment
from .groups import BaumslagSolitar, FreeAbelian, Lamplighter, SubgroupSpec
from .hirsch import derive
from .hurewicz import build_map, hurewicz_cover
from .quotients import build_quotient, components, set_diameter, z_filtration
from .boxspace import BoxSpace, uniform_family_check

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


def _ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def add_host_args(p):
    p.add_argument("--family", choices=["z", "z2", "bs", "lamplighter"], required=True)
    p.add_argument("--mod", type=_ints, help="moduli for z / z2, e.g. 16 or 16,16")
    p.add_argument("--n", type=int, default=2, help="BS(1, n) parameter")
    p.add_argument("--m", type=int, help="BS congruence modulus")
    p.add_argument("--k", type=int, help="BS t-period")
    p.add_argument("--p", type=int, default=2, help="lamp modulus")
    p.add_argument("--period", type=int, help="lamplighter period")


def host_from_args(a):
    if a.family in ("z", "z2"):
        rank = 1 if a.family == "z" else 2
        mods = a.mod or []
        if len(mods) == 1 and rank == 2:
            mods = mods * 2
        if len(mods) != rank:
            raise ValidationError(f"--mod needs {rank} value(s) for {a.family}")
        return FreeAbelian(rank), SubgroupSpec.moduli(*mods)
    if a.family == "bs":
        if a.m is None or a.k is None:
            raise ValidationError("--m and --k are required for bs")
        return BaumslagSolitar(a.n), SubgroupSpec.congruence(a.m, a.k)
    if a.period is None:
        raise ValidationError("--period is required for lamplighter")
    return Lamplighter(a.p), SubgroupSpec.period(a.period)


def _emit(obj, out):
    if out:
        write_json(out, obj)
        print(f"wrote {out}")


def _report(cert):
    line = (f"{cert.verdict}: d={cert.d} r={cert.r} R={cert.R} classes={len(cert.cover)} "
            f"multiplicity={cert.multiplicity} worst_component_diameter={cert.worst_component_diameter}")
    print(line)
    if cert.failure:
        print(cert.failure)
    return EXIT_PASS if cert.passed else EXIT_FAIL


# commands ---------------------------------------------------------------

def cmd_quotient(a):
    spec, sub = host_from_args(a)
    q = build_quotient(spec, sub)
    print(f"{q.name}: {len(q)} vertices, diameter {q.diameter}")
    if a.out:
        os.makedirs(a.out, exist_ok=True)
        write_json(os.path.join(a.out, "quotient.json"), q.to_json())
        write_text(os.path.join(a.out, "quotient.dot"), q.to_dot())
        print(f"wrote {a.out}/quotient.json and quotient.dot")
    return EXIT_PASS


def cmd_cover_make(a):
    spec, sub = host_from_args(a)
    q = build_quotient(spec, sub)
    if a.kind == "interval":
        c = interval_cover(q, a.r)
        if c is None:
            c = Cover((range(len(q)), ()), r=a.r, R=q.diameter)
        d = 1
    elif a.kind == "expand":
        c = iterate_expand(q, IntervalControl(q), a.r, a.classes)
        d = a.classes - 1
    else:
        c = Cover((range(len(q)),), r=a.r, R=q.diameter)
        d = 0
    R = c.R if a.R is None else a.R
    cert = verify_cover(q, c, d, a.r, R)
    _emit(certificate_json(cert), a.out)
    return _report(cert)


def cmd_verify(a):
    obj = load_json(a.certificate)
    cert, problems = verify_certificate(obj)
    code = _report(cert)
    for p in problems:
        print(f"mismatch: {p}")
    if problems and code == EXIT_PASS:
        code = EXIT_FAIL
    return code


def cmd_cover_search(a):
    spec, sub = host_from_args(a)
    q = build_quotient(spec, sub)
    res = brute_force_min_cover(q, a.r, a.R, a.d_max, budget=a.budget)
    if res.exhausted:
        print(f"exhausted after {res.explored} nodes (refuted class counts: {res.refuted})")
        return EXIT_RESOURCE
    if res.minimum is None:
        print(f"none with at most {a.d_max + 1} classes")
        return EXIT_FAIL
    print(res.minimum)
    if a.out:
        cert = verify_cover(q, res.witness, res.minimum - 1, a.r, a.R)
        _emit(certificate_json(cert), a.out)
    return EXIT_PASS


def cmd_expand(a):
    obj = load_json(a.certificate)
    q, cover = cover_from_json(obj)
    out = expand_cover(q, cover, a.r, a.n, R_in=obj["R"])
    cert = verify_cover(q, out, len(out) - 1, a.r, out.R)
    _emit(certificate_json(cert), a.out)
    return _report(cert)


def cmd_product(a):
    ox, oy = load_json(a.x), load_json(a.y)
    qx, cx = cover_from_json(ox)
    qy, cy = cover_from_json(oy)
    cx.R, cy.R = ox["R"], oy["R"]
    cx.r, cy.r = ox["r"], oy["r"]
    qp, pc = product_cover(qx, cx, a.m, qy, cy, a.n)
    cert = verify_cover(qp, pc, a.m + a.n, pc.r, pc.R)
    _emit(certificate_json(cert), a.out)
    return _report(cert)


def cmd_hurewicz(a):
    spec, sub = host_from_args(a)
    fmap = build_map(spec, sub)
    res = hurewicz_cover(fmap, a.r)
    print(f"schedule: {json.dumps(res.schedule.to_json())}")
    print(f"R_out = {res.R_out}")
    _emit(hurewicz_certificate_json(res), a.out)
    return _report(res.certificate)


def cmd_boxspace_check(a):
    filt = z_filtration(a.levels)
    box = BoxSpace.from_filtration(filt, levels=range(1, a.levels + 1))
    covers = []
    for q in box.quotients:
        c = interval_cover(q, a.r)
        covers.append(c if c is not None else Cover((range(len(q)), ()), r=a.r))
    R = 2 * a.r - 1 if a.R is None else a.R
    v = uniform_family_check(box, 1, a.r, R, covers)
    print(f"{'pass' if v.passed else 'fail'}: Z levels 2^1..2^{a.levels}, d=1 r={a.r} R={R}")
    if not v.passed:
        print(v.detail)
    return EXIT_PASS if v.passed else EXIT_FAIL


def cmd_hirsch(a):
    value, lines = derive(a.expression)
    for line in lines:
        print(line)
    print(f"h = {value}")
    return EXIT_PASS


def cmd_experiment(a):
    cfg = ExperimentConfig(a.family, levels=a.levels, r_values=tuple(a.r), out=a.out, n=a.n,
                           p=a.p, budget=a.budget, seed=a.seed, jobs=a.jobs)
    rep = run_experiment(cfg)
    for row in rep["per_level"]:
        print(f"level {row['level']} r={row['r']}: diameter {row['diameter']}, "
              f"d={row['d']} R={row['R']} {row['verdict']}")
    print(f"uniform R: {json.dumps(rep['uniform_R'])}")
    print(f"hirsch bound {rep['hirsch']['bound']} >= certified d {rep['hirsch']['certified_d']}: "
          f"{rep['hirsch']['consistent']}")
    if "lower_bound_probe" in rep:
        print(f"single class refuted below the diameter: {rep['lower_bound_probe']['single_class_refuted']}")
    print(f"verdict: {rep['verdict']}")
    if a.out:
        print(f"wrote {a.out}/report.json and summary.csv")
    return EXIT_PASS if rep["verdict"] == "pass" else EXIT_FAIL


# parser -----------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="coarselab", description="Covers of finite group quotients.")
    ap.add_argument("--version", action="version", version=f"coarselab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quotient", help="build a quotient, write JSON and DOT")
    add_host_args(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_quotient)

    cov = sub.add_parser("cover", help="make, verify or search covers")
    csub = cov.add_subparsers(dest="action", required=True)
    p = csub.add_parser("make")
    add_host_args(p)
    p.add_argument("--kind", choices=["interval", "expand", "single"], default="interval")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--R", type=int)
    p.add_argument("--classes", type=int, default=3, help="class count for --kind expand")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover_make)
    p = csub.add_parser("verify")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)
    p = csub.add_parser("search")
    add_host_args(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--d-max", type=int, default=3)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover_search)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expand", help="add one class to a certified cover")
    p.add_argument("certificate")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="dimension of the original control")
    p.add_argument("--out")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("product", help="product of two certified covers")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("hurewicz", help="extension cover of one quotient")
    add_host_args(p)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hurewicz)

    box = sub.add_parser("boxspace", help="box-space checks")
    bsub = box.add_subparsers(dest="action", required=True)
    p = bsub.add_parser("check", help="uniform interval covers on the Z filtration")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--R", type=int)
    p.set_defaults(func=cmd_boxspace_check)

    p = sub.add_parser("hirsch", help="evaluate a Hirsch-length expression")
    p.add_argument("expression")
    p.set_defaults(func=cmd_hirsch)

    p = sub.add_parser("experiment", help="run a preset end to end")
    p.add_argument("family", choices=["z", "z2", "bs", "lamplighter"])
    p.add_argument("--levels", type=int)
    p.add_argument("--r", type=_ints, default=[1, 2])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConsistencyError, CoarseLabError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

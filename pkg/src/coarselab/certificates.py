"""Certificate JSON: emission, loading and stateless re-verification.

A certificate names its host by group and subgroup, so a verifier rebuilds
the quotient from the file alone.  Classes are stored as sorted lists of
vertex labels (tuples become lists).
"""

from __future__ import annotations

import json
import os
import tempfile

from .covers import TOOL_VERSION, Cover, verify_cover
from .errors import ValidationError
from .groups import GroupSpec, SubgroupSpec
from .quotients import build_quotient, product_quotient

SCHEMA_VERSION = 1
COVER_FIELDS = ("schema_version", "group", "subgroup", "generators", "d", "r", "R", "classes",
                "multiplicity", "worst_component_diameter", "verdict", "tool_version")


def _listify(x):
    if isinstance(x, tuple):
        return [_listify(v) for v in x]
    return x


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def host_json(q):
    """``(group, subgroup)`` JSON of a quotient or of a product of two."""
    factors = getattr(q, "factors", None)
    if factors is not None:
        parts = [host_json(f) for f in factors]
        return ({"family": "product", "factors": [p[0] for p in parts]},
                {"family": "product", "factors": [p[1] for p in parts]})
    if q.spec is None or q.sub is None:
        raise ValidationError(f"{q.name} has no group description")
    return q.spec.to_json(), q.sub.to_json()


def host_from_json(group, subgroup, cap=None):
    if group["family"] == "product":
        qs = [host_from_json(g, s, cap) for g, s in zip(group["factors"], subgroup["factors"])]
        if len(qs) != 2:
            raise ValidationError("product hosts need exactly two factors")
        return product_quotient(*qs)
    return build_quotient(GroupSpec.from_json(group), SubgroupSpec.from_json(subgroup), cap=cap)


def certificate_json(cert):
    """Cover certificate as a JSON-ready dict with exactly :data:`COVER_FIELDS`."""
    q = cert.host
    group, sub = host_json(q)
    classes = [sorted(_listify(q.label(v)) for v in c) for c in cert.cover.classes]
    return {
        "schema_version": SCHEMA_VERSION,
        "group": group,
        "subgroup": sub,
        "generators": list(q.gen_names),
        "d": int(cert.d),
        "r": int(cert.r),
        "R": int(cert.R),
        "classes": classes,
        "multiplicity": int(cert.multiplicity),
        "worst_component_diameter": int(cert.worst_component_diameter),
        "verdict": cert.verdict,
        "tool_version": cert.tool_version,
    }


def hurewicz_certificate_json(result):
    out = certificate_json(result.certificate)
    out["schedule"] = result.schedule.to_json()
    out["base_cover"] = certificate_json(result.base_certificate)
    out["fiber_bound_map"] = [list(p) for p in result.fiber_bound_map]
    out["R_out"] = int(result.R_out)
    return out


def dumps(obj):
    return json.dumps(obj, indent=1) + "\n"


def write_json(path, obj):
    """Write atomically: a temporary file in the target directory, then rename."""
    write_text(path, dumps(obj))


def write_text(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def cover_from_json(obj, cap=None):
    """Rebuild ``(host, cover)`` from a certificate dict."""
    q = host_from_json(obj["group"], obj["subgroup"], cap=cap)
    if list(obj["generators"]) != list(q.gen_names):
        raise ValidationError("generator list does not match the rebuilt quotient")
    classes = []
    for c in obj["classes"]:
        idx = []
        for lab in c:
            idx.append(q.vertex(_tuplify(lab)))
        classes.append(idx)
    return q, Cover(tuple(classes), r=obj["r"], R=obj["R"])


def verify_certificate(obj, cap=None):
    """Re-check a certificate from its contents alone.

    Returns ``(fresh_certificate, problems)`` where ``problems`` lists every
    recorded field that disagrees with the recomputation.  The verdict of the
    recomputation is authoritative.
    """
    missing = [f for f in COVER_FIELDS if f not in obj]
    if missing:
        raise ValidationError(f"certificate lacks fields {missing}")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {obj['schema_version']}")
    q, cover = cover_from_json(obj, cap=cap)
    cert = verify_cover(q, cover, obj["d"], obj["r"], obj["R"])
    problems = []
    for key, fresh in (("verdict", cert.verdict), ("multiplicity", cert.multiplicity),
                       ("worst_component_diameter", cert.worst_component_diameter)):
        if obj[key] != fresh:
            problems.append(f"{key}: recorded {obj[key]!r}, recomputed {fresh!r}")
    if "schedule" in obj:
        problems.extend(_check_schedule(obj))
    return cert, problems


def _check_schedule(obj):
    sch = obj["schedule"]
    out = []
    for a, b in (("s_Y", "t_Y"), ("s_X", "t_X")):
        s, t = sch[a], sch[b]
        if s[-1] != obj["r"]:
            out.append(f"{a} does not end at r")
        for i in range(1, len(s)):
            if s[i - 1] != 3 * t[i]:
                out.append(f"{a}[{i - 1}] != 3 * {b}[{i}]")
        for i in range(len(s)):
            if not s[i] < t[i]:
                out.append(f"{a}[{i}] >= {b}[{i}]")
    if obj.get("R_out") != 3 * sch["t_X"][1] or obj["R"] != obj.get("R_out"):
        out.append("R_out is not 3 * t_X[1]")
    base = obj.get("base_cover")
    if base is not None:
        fresh, probs = verify_certificate(base)
        out.extend(f"base_cover: {p}" for p in probs)
        if not fresh.passed:
            out.append(f"base_cover: {fresh.failure}")
    return out


__all__ = ["COVER_FIELDS", "SCHEMA_VERSION", "TOOL_VERSION", "certificate_json",
           "hurewicz_certificate_json", "verify_certificate", "cover_from_json", "write_json",
           "load_json", "host_json", "host_from_json", "dumps", "write_text"]

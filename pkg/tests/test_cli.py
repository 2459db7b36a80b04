import json
import os
import subprocess
import sys

import pytest

from coarselab.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SHIPPED = os.path.join(ROOT, "demos", "certificates")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_quotient(capsys, tmp_path):
    code, out, _ = run(capsys, "quotient", "--family", "z", "--mod", "8", "--out", str(tmp_path))
    assert code == 0 and "diameter 4" in out
    obj = json.loads((tmp_path / "quotient.json").read_text())
    assert obj["vertices"] == 8 and obj["diameter"] == 4
    assert (tmp_path / "quotient.dot").read_text().startswith("digraph")
    code, out, _ = run(capsys, "quotient", "--family", "bs", "--n", "2", "--m", "15", "--k", "4")
    assert code == 0 and "60 vertices" in out


def test_quotient_errors(capsys, monkeypatch):
    code, _, err = run(capsys, "quotient", "--family", "bs", "--n", "2", "--m", "10", "--k", "4")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "quotient", "--family", "z")
    assert code == 2
    monkeypatch.setenv("COARSELAB_CAP", "10")
    code, _, err = run(capsys, "quotient", "--family", "z", "--mod", "64")
    assert code == 3 and "cap" in err


def test_cover_make_and_verify(capsys, tmp_path):
    cert = tmp_path / "c16.json"
    code, out, _ = run(capsys, "cover", "make", "--family", "z", "--mod", "16", "--r", "2",
                       "--out", str(cert))
    assert code == 0 and "R=3" in out
    code, out, _ = run(capsys, "cover", "verify", str(cert))
    assert code == 0 and out.startswith("pass")
    code, _, _ = run(capsys, "verify", str(cert))
    assert code == 0


def test_cover_make_fails_at_small_R(capsys):
    code, out, _ = run(capsys, "cover", "make", "--family", "z", "--mod", "16", "--r", "2", "--R", "2")
    assert code == 1 and "fail" in out


def test_tampered_certificate(capsys, tmp_path):
    cert = tmp_path / "c.json"
    run(capsys, "cover", "make", "--family", "z", "--mod", "16", "--r", "2", "--out", str(cert))
    obj = json.loads(cert.read_text())
    victim = obj["classes"][0].pop(0)
    cert.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "cover", "verify", str(cert))
    assert code == 1 and f"coverage hole at vertex {victim[0] if isinstance(victim, list) else victim}" in out


def test_malformed_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "cover", "verify", str(bad))[0] == 2
    assert run(capsys, "cover", "verify", str(tmp_path / "missing.json"))[0] == 2
    obj = tmp_path / "wrong.json"
    obj.write_text(json.dumps({"host": {"family": "nope"}}))
    assert run(capsys, "cover", "verify", str(obj))[0] == 2


def test_cover_search(capsys, tmp_path):
    code, out, _ = run(capsys, "cover", "search", "--family", "z", "--mod", "12", "--r", "1", "--R", "2",
                       "--out", str(tmp_path / "w.json"))
    assert code == 0 and out.splitlines()[0] == "2"
    assert run(capsys, "cover", "verify", str(tmp_path / "w.json"))[0] == 0
    code, out, _ = run(capsys, "cover", "search", "--family", "bs", "--m", "15", "--k", "4",
                       "--r", "2", "--R", "1", "--budget", "20")
    assert code == 3 and "exhausted" in out


def test_expand_and_product(capsys, tmp_path):
    base = tmp_path / "base.json"
    run(capsys, "cover", "make", "--family", "z", "--mod", "48", "--r", "6", "--out", str(base))
    out3 = tmp_path / "x.json"
    code, out, _ = run(capsys, "expand", str(base), "--r", "2", "--n", "1", "--out", str(out3))
    assert code == 0 and "classes=3" in out and "multiplicity=2" in out
    prod = tmp_path / "p.json"
    code, out, _ = run(capsys, "product", str(out3), str(out3), "--m", "1", "--n", "1", "--out", str(prod))
    assert code == 0 and "classes=3" in out
    assert run(capsys, "verify", str(prod))[0] == 0
    # expanding at too large a radius breaks the precondition
    assert run(capsys, "expand", str(base), "--r", "5", "--n", "1")[0] == 2


def test_hurewicz(capsys, tmp_path):
    cert = tmp_path / "h.json"
    code, out, _ = run(capsys, "hurewicz", "--family", "bs", "--m", "15", "--k", "4", "--r", "1",
                       "--out", str(cert))
    assert code == 0 and "R_out = 54256029" in out
    assert run(capsys, "verify", str(cert))[0] == 0
    obj = json.loads(cert.read_text())
    obj["schedule"]["s_Y"][0] += 1
    cert.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify", str(cert))
    assert code == 1 and "mismatch" in out


def test_boxspace_check(capsys):
    code, out, _ = run(capsys, "boxspace", "check", "--levels", "8", "--r", "2")
    assert code == 0 and out.startswith("pass")
    code, out, _ = run(capsys, "boxspace", "check", "--levels", "8", "--r", "2", "--R", "2")
    assert code == 1


@pytest.mark.parametrize("expr,value,lines", [
    ("Ext(Local(1), Z(1))", "2", 3), ("F(6)", "0", 1), ("Wreath(F(2), Z(1))", "1", 3)])
def test_hirsch(capsys, expr, value, lines):
    code, out, _ = run(capsys, "hirsch", expr)
    rows = out.splitlines()
    assert code == 0 and rows[-1] == f"h = {value}" and len(rows) == lines + 1


def test_hirsch_malformed(capsys):
    assert run(capsys, "hirsch", "Ext(Z(1)")[0] == 2


def test_experiment_z(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "z", "--levels", "10", "--r", "1,2,4,8", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["verdict"] == "pass"
    assert rep["uniform_R"] == {"1": 1, "2": 3, "4": 7, "8": 15}
    assert (tmp_path / "summary.csv").read_text().startswith("level,diameter,r,R,verdict")
    for row in rep["per_level"]:
        assert run(capsys, "verify", str(tmp_path / row["certificate"]))[0] == 0


def test_experiment_bs3(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "bs", "--n", "3", "--levels", "3", "--out", str(tmp_path))
    assert code == 0 and "verdict: pass" in out
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["hirsch"]["bound"] == 2 and rep["hirsch"]["consistent"]


def test_experiment_validation(capsys):
    assert run(capsys, "experiment", "z", "--levels", "0")[0] == 2
    assert run(capsys, "experiment", "z", "--r", "0")[0] == 2


def test_byte_identical_reemission(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "experiment", "lamplighter", "--levels", "2", "--r", "1", "--out", str(d))[0] == 0
    for name in ("report.json", "summary.csv", "certificates/lamplighter_level2_r1.json"):
        assert (a / name).read_bytes().replace(str(a).encode(), b"") == \
            (b / name).read_bytes().replace(str(b).encode(), b"")


@pytest.mark.skipif(not os.path.isdir(SHIPPED), reason="no shipped certificates")
def test_shipped_certificates(capsys):
    names = sorted(os.listdir(SHIPPED))
    assert names
    for name in names:
        assert run(capsys, "verify", os.path.join(SHIPPED, name))[0] == 0, name


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "coarselab", "hirsch", "Z(3)"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.splitlines()[-1] == "h = 3"

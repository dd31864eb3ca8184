import csv
import io
import json
from fractions import Fraction

import pytest

from kstab import acceptance
from kstab import series as catalog
from kstab.cli import main

from conftest import FIXTURES


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_info_mm2_28():
    code, text = run("info", "MM2.28")
    assert code == 0
    assert "[-1, 3]" in text and "plane-cubic" in text and "fixed C" in text


def test_info_conic_p2_shows_fixed_part():
    code, text = run("info", "conic-P2")
    assert code == 0
    assert "fixed p1" in text and "[1, 2]: -1 + t" in text


def test_info_unknown_name(capsys):
    code, _ = run("info", "nosuch")
    assert code == 2
    assert "UnknownName" in capsys.readouterr().err


def test_info_profile_json():
    code, text = run("info", "p2-wt21-profile", "--format", "json")
    assert code == 0 and json.loads(text)["S"] == {"exact": "1", "value": 1.0}


def test_soliton_2_23b_json():
    code, text = run("soliton", "MM2.23b", "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert abs(doc["eta0"] - 0.15464282383660627) < 1e-11
    assert abs(doc["residual"]) < 1e-12 * doc["scale"]
    assert doc["iterations"] > 0


def test_soliton_symmetric_fixture():
    code, text = run("soliton", str(FIXTURES / "symmetric.toml"), "--format", "json")
    assert code == 0 and json.loads(text)["eta0"] == 0


def test_soliton_no_root(capsys):
    code, _ = run("soliton", str(FIXTURES / "one_signed.toml"))
    assert code == 3
    assert "NoRoot" in capsys.readouterr().err


def test_invariants_not_a_weight_flagged():
    code, text = run("invariants", "MM2.28", "--weight", "constant:1", "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert doc["Fut_g"]["exact"] == "-63/160"
    assert doc["weight check"].startswith("not a weight")


def test_invariants_conic_delta_round_trip():
    code, text = run("invariants", "conic-P2", "--weight", "constant:1", "--c", "1/2", "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert doc["delta"]["exact"] == "3/2"
    # recompute A/S from the printed exact values
    ratios = [Fraction(doc[k]["exact"]) / Fraction(doc[k.replace("A[", "S[")]["exact"])
              for k in doc if k.startswith("A[")]
    assert min(ratios) == Fraction(doc["delta"]["exact"])


def test_invariants_2_23b_soliton():
    code, text = run("invariants", "MM2.23b", "--weight", "soliton", "--format", "json")
    doc = json.loads(text)
    assert code == 0 and doc["weight check"] == "pass"
    assert doc["mu[C2]"] < 0.739237


def test_invariants_table_prints_exact_and_decimal():
    code, text = run("invariants", "MM2.28")
    assert code == 0
    assert "-63/160 (-0.39375)" in text


def test_invariants_csv():
    code, text = run("invariants", "conic-P2", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(text)))
    assert code == 0 and rows["delta"] == "3/2"


def test_verdict_2_23b():
    code, text = run("verdict", "MM2.23b", "--weight", "soliton", "--format", "json")
    assert code == 0 and json.loads(text)["level"] == "KPolystable"


def test_verdict_2_28_git():
    code, text = run("verdict", "MM2.28", "--weight", "soliton", "--git", "stable", "--format", "json")
    doc = json.loads(text)
    assert code == 0 and doc["level"] == "KPolystable"
    assert 0 < doc["certificate"]["mu"] < 1
    assert run("verdict", "MM2.28", "--weight", "soliton", "--git", "strictly-semistable")[0] == 4
    assert run("verdict", "MM2.28", "--weight", "family:2", "--git", "unstable")[0] == 5


def test_verdict_not_a_weight(capsys):
    code, _ = run("verdict", "MM2.28", "--weight", "constant:1")
    assert code == 3
    assert "NotAWeight" in capsys.readouterr().err


@pytest.mark.parametrize("c, code", [("1/2", 0), ("3/4", 4), ("4/5", 5)])
def test_verdict_conic_exit_codes(c, code):
    assert run("verdict", "conic-P2", "--c", c)[0] == code


def test_verdict_on_profile_is_precondition():
    assert run("verdict", "p2-wt21-profile")[0] == 3


def test_sweep_2_28():
    code, text = run("sweep", "MM2.28", "--family", "0,1/2,1,2,4", "--git", "stable")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0
    assert list(rows[0]) == ["c", "eta", "mu", "verdict"]
    assert len(rows) == 5
    assert all(r["verdict"] == "KPolystable" and 0 < float(r["mu"]) < 1 for r in rows)


def test_sweep_marks_missing_weight():
    code, text = run("sweep", str(FIXTURES / "one_signed.toml"), "--family", "0,1")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and [r["verdict"] for r in rows] == ["no-exp-weight", "no-exp-weight"]


def test_export_dh():
    code, text = run("export-dh", "MM2.23b", "--weight", "soliton", "--samples", "200")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and rows[0] == ["alpha", "density"]
    pts = [(float(x), float(y)) for x, y in rows[1:]]
    assert len(pts) == 200 and all(y >= 0 for _, y in pts)
    trap = sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(pts, pts[1:]))
    assert abs(trap - 1) < 1e-3


def test_weight_file():
    code, text = run("invariants", "conic-P2", "--weight", str(FIXTURES / "weight_polyexp.toml"))
    assert code == 0 and "polyexp" in text


@pytest.mark.parametrize("argv", [
    ("invariants", "MM2.28", "--weight", "gaussian:1"),
    ("invariants", "MM2.28", "--weight", "constant:x"),
    ("info", str(FIXTURES / "broken.toml")),
    ("info", str(FIXTURES / "bad_vol.toml")),
    ("sweep", "MM2.28", "--family", "0,a"),
    ("info", "conic-P2", "--c", "nope"),
    ("info", "MM2.28", "--tol", "-1"),
    ("info",),
])
def test_input_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_tol_from_environment(monkeypatch):
    monkeypatch.setenv("KSTAB_TOL", "1e-3")
    _, loose = run("soliton", "MM2.28", "--format", "json")
    monkeypatch.delenv("KSTAB_TOL")
    _, tight = run("soliton", "MM2.28", "--format", "json")
    assert json.loads(loose)["iterations"] < json.loads(tight)["iterations"]


def test_reproduce_only_conic():
    code, text = run("reproduce", "--only", "conic")
    lines = [l for l in text.splitlines() if l.startswith("[")]
    assert code == 0 and len(lines) == 3 and all(l.startswith("[PASS]") for l in lines)


def test_reproduce_detects_perturbed_catalog(monkeypatch):
    real = catalog.builtin

    def perturbed(name, **kw):
        s = real(name, **kw)
        if name == "MM2.28":
            s = type(s)(s.name, s.moment, s.vol * Fraction(101, 100), s.mobile_f, s.fixed_parts, s.target,
                        s.normalization_shifts)
        return s

    monkeypatch.setattr(catalog, "builtin", perturbed)
    code, text = run("reproduce", "--only", "5")
    assert code == 1 and "[FAIL]" in text
    assert acceptance.run("6")[0].ok  # the sweep does not depend on the absolute scale

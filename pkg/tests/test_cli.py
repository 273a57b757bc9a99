from __future__ import annotations

import json

import pytest
import sympy

from csrs.cli import RunConfig, main
from csrs.errors import InputError

from conftest import TABLE


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _phi_map(doc):
    return {(sympy.Rational(t["t_power"]), t["u_power"]): t["coefficient"] for t in doc["phi"]["terms"]}


def test_run_config_validation():
    assert RunConfig().policy().working_bits >= 128
    for bad in (dict(precision_bits=32), dict(target_error="2"), dict(threads=0),
                dict(output_format="xml")):
        with pytest.raises(InputError):
            RunConfig(**bad)


def test_riley_trefoil(capsys):
    code, out, _ = run(capsys, "riley", "--knot", "two_bridge:3/1")
    assert code == 0
    t, u = sympy.symbols("t u")
    expected = sympy.Poly(sympy.expand((t + 1 / t - 1 - u) * t), t, u)
    got = _phi_map(json.loads(out))
    assert got == {(sympy.Rational(a - 1), b): int(c) for (a, b), c in expected.terms()}


def test_riley_missing_file(capsys):
    code, _, err = run(capsys, "riley", "--knot", "file:/no/such/knot.json")
    assert code == 2 and "SchemaError" in err


def test_reps_table_and_errors(capsys):
    code, out, _ = run(capsys, "reps", "--surgery", "-1/2")
    doc = json.loads(out)
    assert code == 0 and len(doc["reps"]) == 8
    for rec, (t, u, eps, _) in zip(doc["reps"], TABLE):
        assert abs(float(rec["t"]["re"]) - t.real) <= 5e-7
        assert abs(float(rec["t"]["im"]) - t.imag) <= 5e-7
        assert rec["eps"] == eps and "t_error" in rec and "u_error" in rec
    assert doc["casson"]["passed"]
    code, out, _ = run(capsys, "reps", "--knot", "twist:1", "--surgery", "-1/1")
    assert code == 0 and len(json.loads(out)["reps"]) == 2
    code, _, err = run(capsys, "reps", "--surgery", "0/1")
    assert code == 2


def test_json_is_deterministic(capsys):
    a = run(capsys, "reps", "--surgery", "-1/2")[1]
    b = run(capsys, "reps", "--surgery", "-1/2")[1]
    assert a == b


def test_env_precision_default(capsys, monkeypatch):
    monkeypatch.setenv("CSRS_PRECISION_BITS", "192")
    _, out, _ = run(capsys, "reps", "--knot", "twist:1", "--surgery", "-1/1")
    assert json.loads(out)["precision_bits"] >= 192
    monkeypatch.setenv("CSRS_PRECISION_BITS", "lots")
    assert run(capsys, "reps", "--knot", "twist:1", "--surgery", "-1/1")[0] == 2


def test_cs_empty_selection(capsys):
    code, out, _ = run(capsys, "cs", "--knot", "twist:1", "--surgery", "-1/1", "--classes", "99")
    assert code == 0 and json.loads(out)["classes"] == []


def test_cs_trefoil_and_svg(capsys):
    code, out, _ = run(capsys, "cs", "--knot", "twist:1", "--surgery", "-1/1", "--mirror")
    doc = json.loads(out)
    assert code == 0
    got = sorted(float(c["value"]) for c in doc["classes"])
    assert abs(got[0] - 1 / 120) < 1e-10 and abs(got[1] - 49 / 120) < 1e-10
    assert all("value_error" in c for c in doc["classes"])
    code, svg, _ = run(capsys, "cs", "--knot", "twist:1", "--surgery", "-1/1", "--out", "svg")
    assert code == 0 and svg.startswith("<svg") and svg.count("<polyline") >= 2


def test_ledger_queries(capsys):
    code, out, _ = run(capsys, "ledger", "--query", "r0( 2*S(2,3,5) + (-1)*S(2,3,11) )",
                       "--query", "member( S3, r=1 )")
    doc = json.loads(out)
    assert code == 0
    assert doc[0]["value"]["value"] == "1/264" and doc[0]["value"]["value_error"] == "0"
    assert doc[0]["trace"] and doc[0]["replayed"]
    assert doc[1]["value"] is True
    code, _, err = run(capsys, "ledger", "--query", "independent{ -S(2,3,5), -S(2,3,5) }")
    assert code == 1 and "HypothesisUnmet" in err
    code, _, err = run(capsys, "ledger", "--query", "r0(S(2,3")
    assert code == 2


def test_ledger_fact_file(capsys, tmp_path):
    facts = tmp_path / "facts.json"
    facts.write_text(json.dumps({"facts": [
        {"subject": "-S(2,3,5) # S(2,3,11)", "kind": "cobordism_assertion", "target": "S3",
         "citation": "negative definite filling"}]}))
    code, out, _ = run(capsys, "ledger", "--facts", str(facts), "--query",
                       "dinf(S3, S(2,3,5)#-S(2,3,11))", "--out", "table")
    assert code == 0 and ">= 1/220" in out

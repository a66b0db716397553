import json
from pathlib import Path

import jsonschema
import pytest

from imperfect_market.cli import main

from conftest import FIXTURES, fixture_path

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "report.schema.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def machine(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "machine")
    return code, json.loads(out)


def test_analyze_g1(capsys):
    code, rep = machine(capsys, "analyze", fixture_path("G1"))
    assert code == 0
    assert rep["verdicts"] == {"no_pure_bubble": False, "nflvr": False, "cash_additive_completion": False}
    assert rep["certificate"]["kind"] == "empty"
    assert rep["polytope"]["vertices"] == [["0", "1"]]
    assert rep["power"]["linear_completion"]["present"] is False
    jsonschema.validate(rep, SCHEMA)


def test_analyze_g2(capsys):
    code, rep = machine(capsys, "analyze", fixture_path("G2"))
    assert code == 0
    assert rep["polytope"]["support_profile"] == {"u": "3/5", "d": "1"}
    assert rep["certificate"]["floor"] == "1/2"
    (row,) = rep["assets"]
    assert row["cash_additive_part"] == "6/5" and row["markup"] == "1/5"
    jsonschema.validate(rep, SCHEMA)


@pytest.mark.parametrize("name", FIXTURES)
def test_machine_reports_match_schema(capsys, name):
    for cmd in ("analyze", "validate", "measures"):
        code, rep = machine(capsys, cmd, fixture_path(name))
        assert code == 0
        jsonschema.validate(rep, SCHEMA)


def test_validate_rejects_bad_numeraire(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("badnumeraire"))
    assert code == 2
    assert "REJECTED" in out
    code, rep = machine(capsys, "analyze", fixture_path("badnumeraire"))
    assert code == 2 and rep["validation"]["accepted"] is False
    assert "polytope" not in rep
    jsonschema.validate(rep, SCHEMA)


def test_price_falls_back_to_superhedge(capsys):
    code, data = machine(capsys, "price", fixture_path("G3"), "--claim", "0,1,7")
    assert code == 0
    assert data["method"] == "superhedge"
    assert data["value"] == "1"
    assert data["witness"] == {"z": {"A": "0"}, "u": "1"}


def test_price_of_traded_claim(capsys):
    code, data = machine(capsys, "price", fixture_path("G2"), "--claim", "2,0")
    assert code == 0 and data["method"] == "representation" and data["value"] == "6/5"


def test_superhedge_and_complete(capsys):
    code, data = machine(capsys, "superhedge", fixture_path("G3"), "--claim", "0,1,7")
    assert code == 0 and data["value"] == "1"
    code, data = machine(capsys, "complete", fixture_path("G2"), "--claim", "1,0")
    assert code == 0 and data["value"] == "3/5"
    code, out, _ = run(capsys, "complete", fixture_path("G2"), "--claim", "1,0")
    assert "3/5 (0.600000)" in out and "witness" in out


@pytest.mark.parametrize("claim", ["1,2", "1,x,3", "0.5e1,1,1"])
def test_bad_claim_exits_1(capsys, claim):
    code, _, err = run(capsys, "price", fixture_path("G3"), "--claim", claim)
    assert code == 1 and "claim" in err


def test_bad_file_exits_1(capsys, tmp_path):
    p = tmp_path / "bad.market"
    p.write_text("imperfect-market 1\nstates u d\nasset A ask 1 payoff 1\n")
    code, _, err = run(capsys, "analyze", p)
    assert code == 1 and "line 3" in err
    code, _, _ = run(capsys, "validate", tmp_path / "missing.market")
    assert code == 1


def test_float_literals_need_float_mode(capsys, tmp_path):
    p = tmp_path / "f.market"
    p.write_text("imperfect-market 1\nstates u d\nasset A ask 1.2e0 payoff 2 0\n")
    assert run(capsys, "validate", p)[0] == 1
    assert run(capsys, "validate", p, "--float")[0] == 0


def test_env_mode_and_flag_override(capsys, tmp_path, monkeypatch):
    p = tmp_path / "f.market"
    p.write_text("imperfect-market 1\nstates u d\nasset A ask 1.2e0 payoff 2 0\n")
    monkeypatch.setenv("IMPERFECT_MARKET_MODE", "float")
    assert run(capsys, "validate", p)[0] == 0
    assert run(capsys, "validate", p, "--exact")[0] == 1
    monkeypatch.setenv("IMPERFECT_MARKET_MODE", "bogus")
    assert run(capsys, "validate", p)[0] == 1


def test_float_mode_analyze(capsys):
    code, rep = machine(capsys, "analyze", fixture_path("G2"), "--float")
    assert code == 0
    assert rep["certificate"]["floor"] == pytest.approx(0.5)


def test_gen_then_validate(capsys, tmp_path):
    code, text, _ = run(capsys, "gen", "--seed", 7, "--states", 4, "--assets", 3)
    assert code == 0
    code2, text2, _ = run(capsys, "gen", "--seed", 7, "--states", 4, "--assets", 3)
    assert text == text2
    p = tmp_path / "g.market"
    p.write_text(text)
    assert run(capsys, "validate", p)[0] == 0


@pytest.mark.parametrize("seed", range(12))
def test_generated_markets_never_inconsistent(capsys, tmp_path, seed):
    flags = ["--no-full-support"] if seed % 2 else []
    _, text, _ = run(capsys, "gen", "--seed", seed, "--states", 1 + seed % 5, "--assets", seed % 4, *flags)
    p = tmp_path / "g.market"
    p.write_text(text)
    code, rep = machine(capsys, "analyze", p, "--budget", 16)
    assert code == 0
    jsonschema.validate(rep, SCHEMA)


def test_study(capsys):
    code, data = machine(capsys, "study", "--beta", "1", "--kmax", "4")
    assert code == 0
    assert [r["power"] for r in data["rows"]] == ["1/3", "1/2", "3/5"]
    assert run(capsys, "study", "--beta", "0", "--kmax", "4")[0] == 1


def test_extend_and_power(capsys):
    code, data = machine(capsys, "extend", fixture_path("G3"))
    assert code == 0 and data["extendable"] is True and data["strikes"] == ["1", "2"]
    code, data = machine(capsys, "power", fixture_path("G2"))
    assert code == 0 and data["completion"]["lower_bound"] == "3/8"
    code, out, _ = run(capsys, "extend", fixture_path("G1"))
    # 1_u is not call-overwritten, so the restricted test passes where NPB fails
    assert code == 0 and "extendable to call-overwritten claims: True" in out


def test_human_timing_only_in_human_format(capsys):
    _, out, _ = run(capsys, "analyze", fixture_path("G3"))
    assert "elapsed:" in out
    _, out, _ = run(capsys, "analyze", fixture_path("G3"), "--format", "machine")
    assert "elapsed" not in out

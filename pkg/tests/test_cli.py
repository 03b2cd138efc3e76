from __future__ import annotations

import json

import pytest

from sigmaschur.cli import main, parse_relations


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_parse_relations():
    ws = parse_relations("1 2 -1 -2; 2 2 2")
    assert [w.letters for w in ws] == [(1, 2, -1, -2), (2, 2, 2)]
    assert parse_relations("1 1 1")[0].letters == (1, 1, 1)
    with pytest.raises(ValueError):
        parse_relations("0")
    with pytest.raises(ValueError):
        parse_relations("1 3", n=2)
    with pytest.raises(ValueError):
        parse_relations("1;;2")


def test_witt(capsys):
    rc, out, _ = run(capsys, "witt", "-p", "3", "-n", "2", "-i", "4")
    assert rc == 0
    assert "dims (2,1,4)" in out and "order 2187" in out and "|G-| 729" in out
    rc, out, _ = run(capsys, "witt", "-p", "3", "-n", "2", "-i", "4", "--format", "json")
    assert json.loads(out)["odd_order"] == 729


def test_measure(capsys):
    rc, out, _ = run(capsys, "measure", "mu-inf-schn", "-p", "3", "-n", "1")
    assert rc == 0 and out.strip() == "3/4·C_inf ≈ 0.420094"
    rc, out, _ = run(capsys, "measure", "mu-n-count", "-p", "3", "-n", "2", "-m", "0", "--aut", "48",
                     "--odd-size", "9")
    assert rc == 0 and out.strip() == "1"
    rc, out, _ = run(capsys, "measure", "mu-inf-abelianization", "-p", "3", "--partition", "2,1")
    assert "1/108" in out


def test_classify_exhaustive(capsys):
    rc, out, _ = run(capsys, "classify", "-p", "3", "-n", "1", "-i", "4", "--exhaustive")
    assert rc == 0 and "verdict PASS" in out


def test_classify_records_generated_seed(capsys):
    rc, out, _ = run(capsys, "classify", "-p", "3", "-n", "1", "-i", "3", "--samples", "200", "--format", "json")
    obj = json.loads(out)
    assert rc == 0 and obj["seed_generated"] is True and isinstance(obj["spec"]["seed"], int)


def test_group_quotient_aut(capsys):
    rc, out, _ = run(capsys, "group", "-p", "3", "-n", "2", "-i", "3", "--format", "json")
    assert json.loads(out)["order"] == 27
    rc, out, _ = run(capsys, "quotient", "-p", "3", "-n", "2", "-i", "4", "--relations", "1 1 1; 2 2 2",
                     "--format", "json")
    obj = json.loads(out)
    assert rc == 0 and obj["order"] == 243 and obj["m"] == 2
    rc, out, _ = run(capsys, "aut", "-p", "3", "-n", "2", "-i", "3")
    assert rc == 0 and "|Aut_sigma| 48" in out


def test_zassenhaus(capsys):
    rc, out, _ = run(capsys, "zassenhaus", "-p", "3", "-n", "1", "--depth", "4", "--relations", "1 1 1")
    assert rc == 0 and "type (3)" in out


def test_character(capsys):
    rc, out, _ = run(capsys, "character", "-p", "3", "-n", "2", "-r", "1", "--format", "json")
    obj = json.loads(out)
    assert rc == 0 and [r["computed"] for r in obj["rows"][:3]] == [4, 1, -2]


def test_classgroup_and_survey(capsys):
    rc, out, _ = run(capsys, "classgroup", "-D", "-23", "-p", "3")
    assert rc == 0 and "h 3" in out
    rc, out, _ = run(capsys, "survey", "-p", "3", "-X", "500", "--format", "csv")
    assert rc == 0 and out.splitlines()[0] == "discriminant,h,partition"


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "quotient", "-p", "3", "-n", "1", "-i", "4", "--relations", "0")[0] == 2
    rc, _, err = run(capsys, "quotient", "-p", "3", "-n", "2", "-i", "3", "--relations", "1 2 -1 -2")
    assert rc == 2 and "1 2 -1 -2" in err
    assert run(capsys, "aut", "-p", "3", "-n", "2", "-i", "4", "--aut-cap", "100")[0] == 3
    assert run(capsys, "group", "-p", "3", "-n", "2", "-i", "5", "--size-cap", "1000")[0] == 3
    assert run(capsys, "witt", "-p", "4", "-n", "1", "-i", "3")[0] == 2
    assert run(capsys, "witt", "-n", "1", "-i", "3")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "verify-all", "--only", "9")[0] == 0


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# manifest\np = 3\nn = 1\ni = 4\nexhaustive = true\n")
    rc, out, _ = run(capsys, "classify", "--config", str(cfg))
    assert rc == 0 and "verdict PASS" in out
    rc, out, _ = run(capsys, "witt", "--config", str(cfg), "-n", "2")
    assert rc == 2  # 'exhaustive' is not a witt option
    cfg.write_text("p=3\nn=1\ni=3\n")
    rc, out, _ = run(capsys, "witt", "--config", str(cfg), "-i", "5")
    assert rc == 0 and "order 9" in out

import json

import pytest

from eacomm.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval(capsys):
    code, out, _ = call(capsys, "eval", "T")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert doc["score"] == pytest.approx(0.908248, abs=1e-6)
    code, out, _ = call(capsys, "eval", "r", "--visibility", "0.75")
    assert json.loads(out)["score"] == pytest.approx(0.625)


def test_bound(capsys):
    code, out, _ = call(capsys, "bound", "S", "--d", "4")
    doc = json.loads(out)
    assert code == 0 and doc["value"] == 5 and len(doc["witness"]["encoder"]) == 5


def test_bound_budget_exit_code(capsys):
    code, _, err = call(capsys, "bound", "R", "--d", "8")
    assert code == 2 and "budget" in err


def test_validation_exit_codes(capsys):
    assert call(capsys, "eval", "Q")[0] == 1
    assert call(capsys, "bound", "S")[0] == 1
    assert call(capsys, "seesaw", "S", "--restrict", "weird")[0] == 1
    assert call(capsys, "eval", "S", "--visibility", "3")[0] == 1
    assert call(capsys, "stats", "certify", "--table", "/nonexistent.csv", "--task", "S")[0] == 1


def test_seesaw_and_sweep(capsys):
    code, out, _ = call(capsys, "seesaw", "T", "--restrict", "product", "--restarts", "3")
    doc = json.loads(out)
    assert code == 0 and doc["restriction"] == "product" and "protocol" in doc
    code, out, _ = call(capsys, "sweep", "T", "--theta-grid", "0.5:1.5:3", "--restarts", "1",
                        "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "theta,value" and len(out.splitlines()) == 4


def test_stats_certify(capsys, tmp_path):
    code, out, _ = call(capsys, "stats", "certify", "--table", "table6.csv", "--task", "T")
    doc = json.loads(out)
    assert code == 0 and doc["sigmaViolation"] == pytest.approx(21.8, abs=0.1)
    path = tmp_path / "mine.csv"
    path.write_text("x,y,b,p,err\n1,1,0,0.9,0.01\n")
    code, out, _ = call(capsys, "stats", "certify", "--table", str(path), "--task", "T")
    assert code == 1  # missing scored cells


def test_optics(capsys, tmp_path):
    out_file = tmp_path / "verify.csv"
    code, out, _ = call(capsys, "optics", "verify", "--format", "csv", "--out", str(out_file))
    assert code == 0 and out == ""
    assert out_file.read_text().startswith("table,row,distance")
    code, out, _ = call(capsys, "optics", "mc", "--sigma", "0", "--samples", "2")
    assert json.loads(out)["std"] == 0


def test_reproduce_check(capsys):
    code, out, err = call(capsys, "reproduce", "--check", "--restarts", "10")
    doc = json.loads(out)
    assert code == 0 and doc["allPassed"]
    assert [r["task"] for r in doc["rows"]] == ["S", "R", "T"]
    assert doc["rows"][0]["twoBit"] == 5 and doc["rows"][2]["experiment"] == pytest.approx(0.8988, abs=1e-4)
    assert "[FLAG]" in err and "[FAIL]" not in err

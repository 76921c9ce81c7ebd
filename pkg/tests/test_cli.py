import csv
import json
import shutil
import subprocess
import sys

import pytest

from shatterlab import corpus
from shatterlab.cli import EXIT_BUDGET, EXIT_MISMATCH, EXIT_OK, EXIT_PARSE, main, parse_range
from shatterlab.errors import ParseError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reproduce_crosses(capsys):
    code, out, err = run(capsys, "reproduce", "s2-crosses")
    assert code == EXIT_OK
    data = json.loads(out)
    checks = {c["check"]: c for c in data["checks"]}
    assert checks["pipeline exponent"]["got"] == 2
    assert [checks[f"diagonal t={t}"]["got"] for t in range(2, 9)] == [4, 7, 11, 16, 22, 29, 37]
    assert "PASS diagonal t=8" in err


def test_reproduce_rational_grid(capsys):
    code, out, _ = run(capsys, "reproduce", "prop-rational-grid", "--k", "3")
    assert code == EXIT_OK
    (check,) = json.loads(out)["checks"]
    assert check["got"] == 27


@pytest.mark.parametrize("name", ["s1-pairs", "s3-triples", "sec6-quadrant-PQ", "empty", "random-11"])
def test_reproduce_passes(capsys, name):
    assert run(capsys, "reproduce", name)[0] == EXIT_OK


def test_reproduce_mismatch_exit_code(capsys, monkeypatch):
    entry = corpus.get("s1-pairs")
    monkeypatch.setattr(entry, "checks", {"diagonal": {3: 5}})
    code, _, err = run(capsys, "reproduce", "s1-pairs")
    assert code == EXIT_MISMATCH and "FAIL diagonal t=3: expected 5 got 4" in err


def test_shatter_empty_family(capsys):
    code, out, _ = run(capsys, "shatter", "--family", "corpus/empty.json", "--t", "5")
    assert code == EXIT_OK
    assert json.loads(out)["counts"][0]["count"] == 1


def test_shatter_constant_sweep_reports_degenerate(capsys):
    code, out, _ = run(capsys, "shatter", "--family", "empty", "--t", "2..4", "--hill-iterations", "0")
    data = json.loads(out)
    assert code == EXIT_OK and data["degenerate"] and data["slope"] == 0.0


def test_reports_are_byte_identical(capsys, tmp_path):
    texts = []
    for k in range(2):
        d = tmp_path / str(k)
        argv = ["shatter", "--family", "s2-crosses", "--t", "2..4", "--hill-iterations", "10", "--seed", "3",
                "--out", str(d)]
        assert run(capsys, *argv)[0] == EXIT_OK
        assert run(capsys, *argv, "--format", "csv")[0] == EXIT_OK
        texts.append(((d / "shatter.json").read_bytes(), (d / "shatter.csv").read_bytes()))
    assert texts[0] == texts[1]


def test_csv_schema_and_timing(capsys, tmp_path):
    run(capsys, "shatter", "--family", "s1-pairs", "--t", "3", "--format", "csv", "--out", str(tmp_path))
    rows = list(csv.reader((tmp_path / "shatter.csv").open()))
    assert rows[0] == ["t", "count", "forced_J", "strategy", "seed", "millis"]
    assert rows[1][0] == "3" and rows[1][5] == ""
    run(capsys, "shatter", "--family", "s1-pairs", "--t", "3", "--format", "csv", "--timing", "--out", str(tmp_path))
    rows = list(csv.reader((tmp_path / "shatter.csv").open()))
    assert rows[1][5] != ""


def test_configurations_use_fraction_strings(capsys):
    _, out, _ = run(capsys, "shatter", "--family", "s2-crosses", "--t", "2", "--hill-iterations", "0")
    coords = json.loads(out)["counts"][0]["configuration"][0]["coords"]
    assert all("/" in c for c in coords)


def test_forced_shatter(capsys):
    code, out, _ = run(capsys, "shatter", "--family", "sec3-forced-example", "--t", "4", "--forced", "1,3",
                       "--strategies", "curated", "--hill-iterations", "0")
    assert code == EXIT_OK and json.loads(out)["counts"][0]["count"] >= 1


def test_svg_chart(capsys, tmp_path):
    run(capsys, "shatter", "--family", "s1-pairs", "--t", "2..4", "--hill-iterations", "0", "--svg",
        "--out", str(tmp_path))
    svg = (tmp_path / "shatter.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 3


def test_exponent_of_simple_family(capsys):
    code, out, _ = run(capsys, "exponent", "--family", "s3-triples")
    assert code == EXIT_OK and json.loads(out)["exponent"] == 2


def test_exponent_falls_back_to_pipeline(capsys):
    code, out, _ = run(capsys, "exponent", "--family", "corpus/s4-halflines.json")
    assert code == EXIT_OK and json.loads(out)["exponent"] == 1


def test_pipeline_trace_out(capsys, tmp_path):
    path = tmp_path / "trace.json"
    code, out, _ = run(capsys, "pipeline", "--family", "sec6-cross-plus-points", "--trace-out", str(path))
    assert code == EXIT_OK and json.loads(out)["exponent"] == 2
    trace = json.loads(path.read_text())
    assert trace["exponent"] == 2 and "root" in trace


def test_pipeline_budget_exit_code(capsys):
    code, _, err = run(capsys, "pipeline", "--family", "s2-crosses", "--budget-windows", "0")
    assert code == EXIT_BUDGET and "depth" in err


def test_subset_budget_is_restored(capsys):
    from shatterlab.pipeline import synthesis
    before = synthesis.SUBSET_BUDGET
    run(capsys, "pipeline", "--family", "s4-halflines", "--budget-subsets", "16")
    assert synthesis.SUBSET_BUDGET == before


def test_parse_error_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"indices": [\n  {"label": "1",, }\n]}')
    code, _, err = run(capsys, "shatter", "--family", str(bad), "--t", "2")
    assert code == EXIT_PARSE and "line 2 column" in err


def test_unknown_family_is_a_parse_error(capsys):
    assert run(capsys, "pipeline", "--family", "nowhere.json")[0] == EXIT_PARSE


def test_delta(capsys):
    code, out, _ = run(capsys, "delta", "--k", "1..3")
    assert [d["edges"] for d in json.loads(out)["delta"]] == [1, 8, 27]
    code, out, _ = run(capsys, "delta", "--t", "3..4", "--format", "csv")
    assert out.splitlines()[0] == "t,edges,grid"


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == EXIT_OK
    for name in corpus.ENTRIES:
        assert name in out


def test_parse_range():
    assert parse_range("2..4") == [2, 3, 4] and parse_range("7") == [7]
    with pytest.raises(ParseError):
        parse_range("5..2")


def test_console_script():
    exe = shutil.which("shatterlab")
    cmd = [exe] if exe else [sys.executable, "-m", "shatterlab.cli"]
    res = subprocess.run(cmd + ["reproduce", "empty"], capture_output=True, text=True, timeout=300)
    assert res.returncode == 0 and json.loads(res.stdout)["entry"] == "empty"

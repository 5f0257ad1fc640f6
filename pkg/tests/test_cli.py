import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from roundelim.cli import main
from roundelim.graphs import read_graph

GOLDEN = Path(__file__).parent / "golden"


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_golden(tmp_path, capsys):
    g, d = tmp_path / "g.txt", tmp_path / "d.json"
    code, _, _ = run(["gen", "--n", "10", "--delta", "3", "--seed", "7", "--out", str(g), "--diagnostics", str(d)], capsys)
    assert code == 0
    assert g.read_text() == (GOLDEN / "gen_n10_d3_s7.txt").read_text()
    diag = json.loads(d.read_text())
    gold = json.loads((GOLDEN / "gen_n10_d3_s7.json").read_text())
    assert diag["diagnostics"] == gold["diagnostics"]
    assert diag["config"]["seed"] == 7 and diag["config"]["n"] == 10
    assert read_graph(g).is_regular()


def test_gen_deterministic(capsys):
    first = run(["gen", "--n", "12", "--delta", "4", "--seed", "3"], capsys)
    second = run(["gen", "--n", "12", "--delta", "4", "--seed", "3"], capsys)
    assert first == second and first[0] == 0


def test_gen_parity_exit(capsys):
    code, _, err = run(["gen", "--n", "3", "--delta", "3"], capsys)
    assert code == 2 and "even" in err


def test_usage_exit(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "ten", "--delta", "3"])
    assert exc.value.code == 4
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 4


def test_selfreduce_exact_cube(tmp_path, capsys):
    out, audit = tmp_path / "t.csv", tmp_path / "a.json"
    args = ["selfreduce", "--fixture", "cube", "--R", "1", "--baseline", "proposal", "--T", "2", "--out", str(out), "--audit", str(audit)]
    code, _, _ = run(args, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [int(r["radius"]) for r in rows] == [2, 1, 0]
    rep = json.loads(audit.read_text())
    assert rep["S_check"] is True and rep["H_wrong_eq"] is True and rep["MM_chain"] is True
    assert len(rep["steps"]) == 2 and rep["config"]["extra"]["baseline"] == "proposal"
    # byte-identical rerun
    first = (out.read_text(), audit.read_text())
    run(args, capsys)
    assert (out.read_text(), audit.read_text()) == first


def test_selfreduce_radius_zero(capsys):
    code, out, _ = run(["selfreduce", "--fixture", "cube", "--T", "0", "--baseline", "port1", "--audit", os.devnull], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 2


def test_selfreduce_budget_exit(capsys):
    code, _, err = run(["selfreduce", "--fixture", "cube", "--R", "9", "--baseline", "frontier"], capsys)
    assert code == 3 and "cap is 24" in err


def test_selfreduce_mc_n200(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert run(["gen", "--n", "200", "--delta", "3", "--seed", "1", "--out", str(g), "--diagnostics", os.devnull], capsys)[0] == 0
    audit = tmp_path / "a.json"
    code, out, _ = run(["selfreduce", "--graph", str(g), "--mode", "mc", "--trials", "3", "--samples", "20", "--baseline", "proposal", "--audit", str(audit)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    for r in rows:
        assert float(r["badness_ci_low"]) <= float(r["badness_mean"]) <= float(r["badness_ci_high"])
    rep = json.loads(audit.read_text())
    assert rep["config"]["R"] == 64 and rep["S_check"] is True and rep["H_wrong_eq"] is None


def test_oracle_deviation_zero_violations(tmp_path, capsys):
    out = tmp_path / "v.jsonl"
    code, _, err = run(["oracle", "deviation", "--delta", "12", "--b", "2", "--searches", "2000", "--violations-only", "--out", str(out)], capsys)
    assert code == 0 and out.read_text() == ""
    assert json.loads(err)["summary"]["violations"] == 0


def test_oracle_khintchine(capsys):
    code, out, _ = run(["oracle", "khintchine", "--n", "2", "--searches", "5"], capsys)
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(recs) == 5 and all(r["conclusion"] for r in recs)


def test_oracle_zero_round(capsys):
    code, out, _ = run(["oracle", "zero_round", "--delta", "6", "--b", "3", "--trials", "2000"], capsys)
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(recs) == 3 and all(r["conclusion"] for r in recs)


def test_oracle_unknown(capsys):
    assert run(["oracle", "nope"], capsys)[0] == 4


def test_bound(capsys):
    code, out, _ = run(["bound", "--p", "0.5", "--delta", "8", "--n", "1e6"], capsys)
    assert code == 2
    p = 1 / (2 * 2.0**5)
    code, out, _ = run(["bound", "--p", repr(p), "--b", "1", "--delta", "4", "--n", "1e300", "--c-const", "2", "--epsilon", "1"], capsys)
    assert code == 0 and float(out) == pytest.approx(5)


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("ROUNDELIM_SEED", "7")
    code, out, _ = run(["gen", "--n", "10", "--delta", "3", "--diagnostics", os.devnull], capsys)
    assert out == (GOLDEN / "gen_n10_d3_s7.txt").read_text()


def test_console_script_exit_codes():
    res = subprocess.run([sys.executable, "-m", "roundelim.cli", "bound", "--p", "0.7", "--delta", "8", "--n", "100"], capture_output=True, text=True)
    assert res.returncode == 2


def test_config_flags():
    from roundelim.cli import ExperimentConfig

    cfg = ExperimentConfig("x", delta=4, b=3, k=3, delta_exp=0.5)
    assert len(cfg.flags()) == 2
    assert ExperimentConfig("x", delta=16, b=2, k=4).flags() == []

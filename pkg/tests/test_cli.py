from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from entangled.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def fh(name: str) -> list[str]:
    return ["--db", str(DATA / name / "db" / "manifest.json"), "--queries", str(DATA / name / "queries.eql")]


def run_json(capsys, argv) -> dict:
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_eval_scc(capsys):
    data = run_json(capsys, ["eval-scc", *fh("flight_hotel")])
    assert data["members"] == ["qC", "qG"]
    data = run_json(capsys, ["eval-scc", *fh("six_query_dag"), "--select", "contains:q5"])
    assert data["members"] == ["q1", "q2", "q5", "q6"]


def test_eval_scc_to_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["eval-scc", *fh("six_query_dag"), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["members"] == ["q1", "q2", "q3", "q4"]


def test_eval_consistent(capsys):
    m = DATA / "movies"
    argv = ["eval-consistent", "--db", str(m / "db" / "manifest.json"),
            "--config", str(m / "config.json"), "--queries", str(m / "queries.json")]
    data = run_json(capsys, argv)
    assert data["value"] == {"cinema": "Regal"}
    assert sorted(data["members"]) == ["Chris", "Jonny", "Will"]


def test_oracle(capsys):
    data = run_json(capsys, ["oracle", *fh("flight_hotel")])
    assert [s["members"] for s in data["sets"]] == [["qC", "qG"]]
    data = run_json(capsys, ["oracle", *fh("six_query_dag"), "--max"])
    assert data["max_size"] == 6


def test_oracle_limit_is_an_error(capsys):
    assert main(["oracle", *fh("six_query_dag"), "--max-queries", "2"]) == 1
    assert "entangled oracle" in capsys.readouterr().err


def test_gen_then_oracle(tmp_path, capsys):
    q, db, cnf = tmp_path / "q.eql", tmp_path / "db", tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 -2 0\n2 2 -1 0\n")
    assert main(["gen", "--reduction", "thm1", "--cnf", str(DATA / "two_clauses.cnf"), "--out-queries", str(q), "--out-db", str(db)]) == 0
    assert q.read_text().startswith("# thm1 instance")
    for red in ("thm1", "thm2", "appB"):
        argv = ["gen", "--reduction", red, "--cnf", str(cnf), "--out-queries", str(q), "--out-db", str(db)]
        assert main(argv) == 0
        data = run_json(capsys, ["oracle", "--db", str(db / "manifest.json"), "--queries", str(q), "--allow-empty-heads", "--max"])
        assert data["max_size"] > 0


def test_bench(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--workload", "list", "--sizes", "2..4", "--reps", "2", "--out", str(out), "-v"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["size"]) for r in rows] == [2, 2, 3, 3, 4, 4]
    assert "median_ms" in capsys.readouterr().err
    assert main(["bench", "--workload", "flights", "--sizes", "5", "--reps", "1", "--vary", "queries", "--flights-table", "10"]) == 0
    assert capsys.readouterr().out.startswith("workload,size")


def test_check(tmp_path, capsys):
    dot = tmp_path / "g.dot"
    data = run_json(capsys, ["check", *fh("band_trip"), "--dot", str(dot)])
    # the fifth query only waits on Chris, so the set is safe but not unique
    assert data["safe"] and not data["unique"] and data["diagnostics"] == []
    assert dot.read_text().startswith("digraph")
    data = run_json(capsys, ["check", "--queries", str(DATA / "flight_hotel" / "queries.eql")])
    assert data["components"] == [["qC", "qG"], ["qJ"], ["qW"]]


def test_check_reports_diagnostics(tmp_path, capsys):
    q = tmp_path / "bad.eql"
    q.write_text("@q {} R(A, x) :- F(x).\n")
    assert main(["check", "--db", str(DATA / "flight_hotel" / "db" / "manifest.json"), "--queries", str(q)]) == 1
    assert json.loads(capsys.readouterr().out)["diagnostics"]


def test_errors_exit_nonzero(tmp_path, capsys):
    q = tmp_path / "bad.eql"
    q.write_text("@q {} R(A, x :- F(x).\n")
    assert main(["eval-scc", "--db", str(DATA / "flight_hotel" / "db" / "manifest.json"), "--queries", str(q)]) == 1
    assert main(["eval-scc", "--db", str(tmp_path / "none.json"), "--queries", str(q)]) == 1
    with pytest.raises(SystemExit):
        main(["no-such-command"])

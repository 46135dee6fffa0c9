from __future__ import annotations

import io
import random
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entangled import bench, graphs, scc_coord


def test_list_small():
    inst = bench.gen_list(3)
    run = scc_coord.run(inst.queries, inst.db)
    assert sorted(len(c.members) for c in run.candidates) == [1, 2, 3]
    assert run.result.members == {"q1", "q2", "q3"}
    assert run.db_queries == 3


def test_list_single_query():
    inst = bench.gen_list(1)
    assert scc_coord.evaluate(inst.queries, inst.db).members == {"q1"}
    with pytest.raises(ValueError):
        bench.gen_list(0)


def test_scalefree_two_nodes():
    inst = bench.gen_scalefree(2, seed=5)
    assert graphs.build_graph(inst.queries).edges == {("q2", "q1")}
    with pytest.raises(ValueError):
        bench.gen_scalefree(1)


def test_preferential_attachment_shape():
    for seed in range(10):
        edges = bench.preferential_attachment(100, random.Random(seed), m0=3, m=2)
        assert all(u > v for u, v in edges)
        assert len(set(edges)) == len(edges)
        # tournament on the seed nodes, then m edges per later node
        assert len(edges) == 3 + 2 * 97
    indeg = [0] * 2001
    for u, v in bench.preferential_attachment(2000, random.Random(0)):
        indeg[v] += 1
    # early nodes collect far more edges than the median node
    assert max(indeg[1:10]) > 10 * statistics.median(indeg[1:])


def test_scalefree_is_safe_and_acyclic():
    inst = bench.gen_scalefree(60, seed=1)
    assert graphs.check_safety(graphs.build_extended(inst.queries)) == []
    dag = graphs.condense(graphs.build_graph(inst.queries))
    assert all(len(c) == 1 for c in dag.nodes)


def test_flights_instance():
    inst = bench.gen_flights(4, 1, seed=0)
    assert len(inst.db["Flights"]) == 1
    assert len(inst.db["Friends"]) == 4 * 3
    res = bench.consistent_coord.evaluate(inst.queries, inst.config, inst.db)
    assert len(res.members) == 4


def test_flights_pairs_distinct():
    inst = bench.gen_flights(3, 200, seed=4)
    pairs = [(r[3], r[4]) for r in inst.db["Flights"].tuples]
    assert len(set(pairs)) == 200
    assert all(r[1] != r[3] for r in inst.db["Flights"].tuples)


def test_workload_validation():
    with pytest.raises(ValueError):
        bench.Workload("grid", 3)
    with pytest.raises(ValueError):
        bench.Workload("flights", 3, vary="both")
    w = bench.Workload("flights", 7, vary="queries", flights_table=5)
    assert len(w.build().queries) == 7


def test_run_records():
    recs = bench.run(bench.Workload("list", 5), reps=3)
    assert [r.rep for r in recs] == [0, 1, 2]
    for r in recs:
        assert r.workload == "list" and r.size == 5 and r.result_size == 5
        assert 0 <= r.graph_ms <= r.total_ms
    with pytest.raises(ValueError):
        bench.run(bench.Workload("list", 5), algorithm="consistent")
    with pytest.raises(ValueError):
        bench.run(bench.Workload("list", 5), reps=0)


def test_scc_queries_at_most_components():
    inst = bench.gen_scalefree(40, seed=2)
    run = scc_coord.run(inst.queries, inst.db)
    assert run.db_queries <= len(run.dag.nodes)


def test_csv_round_trip(tmp_path):
    recs = bench.sweep([bench.Workload("list", n) for n in (2, 4)], reps=2)
    buf = io.StringIO()
    bench.write_csv(recs, buf)
    assert buf.getvalue().splitlines()[0].split(",") == bench.CSV_COLUMNS
    path = tmp_path / "t.csv"
    bench.write_csv(recs, path)
    assert bench.read_csv(path) == recs
    assert set(bench.medians(recs)) == {2, 4}


def test_parse_sizes():
    assert bench.parse_sizes("10..30:10") == [10, 20, 30]
    assert bench.parse_sizes("3..5") == [3, 4, 5]
    assert bench.parse_sizes("5,1,8") == [5, 1, 8]
    for bad in ("5..3", "1..4:0", "a,b", "0,3"):
        with pytest.raises(ValueError):
            bench.parse_sizes(bad)


def test_save_workload_is_deterministic(tmp_path):
    for kind in ("scalefree", "flights"):
        a, b = tmp_path / f"{kind}a", tmp_path / f"{kind}b"
        w = bench.Workload(kind, 20, seed=3)
        pa = bench.save_workload(w.build(), a)
        pb = bench.save_workload(w.build(), b)
        assert [p.name for p in pa] == [p.name for p in pb]
        fa = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        assert fa == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert all((a / f).read_bytes() == (b / f).read_bytes() for f in fa)


@given(st.lists(st.integers(-100, 100), min_size=3, max_size=20), st.integers(-5, 5), st.integers(-5, 5))
def test_r2_of_exact_line(xs, a, b):
    if len(set(xs)) < 2:
        return
    assert bench.linear_r2(xs, [a * x + b for x in xs]) == pytest.approx(1.0, abs=1e-6)


def test_r2_of_noise_is_low():
    rng = random.Random(0)
    xs = list(range(200))
    assert bench.linear_r2(xs, [rng.random() for _ in xs]) < 0.2

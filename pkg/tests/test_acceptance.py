"""End-to-end acceptance criteria, one test per criterion.

Each test prints a PASS line when it succeeds and the pytest summary lists
every criterion with its outcome. Run alone with
``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import time

import pytest

from entangled import bench, graphs, oracle, reductions, scc_coord
from entangled import consistent_coord as cc
from entangled import fixtures
from entangled.eql import QuerySet
from instances import random_consistent_instance, random_safe_instance

pytestmark = pytest.mark.acceptance


class Clock:
    def __init__(self, limit_s: float | None):
        self.limit = limit_s
        self.t0 = time.perf_counter()

    def check(self) -> float:
        elapsed = time.perf_counter() - self.t0
        if self.limit is not None:
            assert elapsed < self.limit, f"took {elapsed:.1f}s, limit {self.limit}s"
        return elapsed


@pytest.fixture
def criterion(record_property):
    def start(label: str, limit_s: float | None = None) -> Clock:
        record_property("criterion", label)
        return Clock(limit_s)

    return start


def _report(label: str, clock: Clock, detail: str = "") -> None:
    print(f"\nPASS {label} in {clock.check():.2f}s {detail}".rstrip())


def test_c01_movies_fixture(criterion):
    label = "C1 movies fixture"
    clock = criterion(label, 1.0)
    cfg, qs, db = fixtures.movies_config(), fixtures.movies_queries(), fixtures.movies_db()
    run = cc.run(qs, cfg, db)

    opts = {u: {v[0] for v in vals} for u, vals in run.options.per_query.items()}
    assert opts == {
        "Chris": {"Regal"},
        "Guy": {"AMC"},
        "Jonny": {"Regal", "AMC", "Cinemark"},
        "Will": {"Regal", "AMC", "Cinemark"},
    }
    assert {v[0] for v in run.options.union} == {"Regal", "AMC", "Cinemark"}
    assert run.survivors[("Cinemark",)] == frozenset()
    assert run.result.value == ("Regal",)
    assert set(run.result.members) == {"Chris", "Jonny", "Will"}
    assert run.result.to_json(cfg)["value"] == {"cinema": "Regal"}
    _report(label, clock)


def test_c02_flight_hotel(criterion):
    label = "C2 flight-hotel fixture"
    clock = criterion(label, 1.0)
    qs, db = fixtures.flight_hotel(), fixtures.flight_hotel_db()
    res = scc_coord.evaluate(qs, db)
    assert res is not None and res.members == {"qC", "qG"}
    assert oracle.is_coordinating([q for q in qs if q.name in res.members], res.assignment, db)

    dag = graphs.condense(graphs.build_graph(qs))
    assert set(dag.nodes) == {frozenset({"qC", "qG"}), frozenset({"qJ"}), frozenset({"qW"})}
    _report(label, clock)


def test_c03_six_query_dag(criterion):
    label = "C3 six-query DAG"
    clock = criterion(label, 1.0)
    run = scc_coord.run(fixtures.six_query_dag(), fixtures.six_query_db())
    cands = {c.members for c in run.candidates}
    assert cands == {
        frozenset({"q1", "q2"}),
        frozenset({"q1", "q2", "q3", "q4"}),
        frozenset({"q1", "q2", "q5", "q6"}),
    }
    assert len(run.result.members) == 4
    assert run.db_queries == 3
    _report(label, clock)


def test_c04_oracle_equivalence(criterion):
    label = "C4 oracle equivalence on random safe sets"
    clock = criterion(label, 120.0)
    rng = random.Random(20120401)
    found = 0
    for _ in range(200):
        qs, db = random_safe_instance(rng, max_queries=6)
        res = scc_coord.evaluate(qs, db)
        assert (res is not None) == bool(oracle.find_all(qs, db))

        dag = graphs.condense(graphs.build_graph(qs))
        rq = {graphs.reachable_set(dag, q.name) for q in qs}
        best = max((len(s) for s in rq if oracle.is_coordinating_subset(qs, s, db)), default=0)
        assert (len(res.members) if res else 0) == best
        if res is not None:
            found += 1
            members = [q for q in qs if q.name in res.members]
            assert oracle.is_coordinating(members, res.assignment, db)
    _report(label, clock, f"({found}/200 with a coordinating set)")


def test_c05_first_reduction_round_trip(criterion):
    label = "C5 first reduction round trip"
    clock = criterion(label, 300.0)
    rng = random.Random(3)
    sat_count = 0
    for _ in range(100):
        f = reductions.random_cnf(rng.randint(1, 5), rng.randint(1, 6), rng)
        qs, db = reductions.gen_theorem1(f)
        hit = next(oracle.iter_coordinating(qs, db), None)
        h = reductions.brute_force_sat(f)
        assert (h is not None) == (hit is not None), str(f)
        if h is None:
            continue
        sat_count += 1
        names, sub = reductions.assignment_to_set(f, h)
        assert oracle.is_coordinating([qs[n] for n in names], sub, db)
        back = reductions.set_to_assignment(f, hit[0])
        assert f.satisfied_by(back)
        names2, sub2 = reductions.assignment_to_set(f, back)
        assert oracle.is_coordinating([qs[n] for n in names2], sub2, db)
    _report(label, clock, f"({sat_count}/100 satisfiable)")


def test_c06_second_reduction_size_law(criterion):
    label = "C6 second reduction size law"
    clock = criterion(label, 300.0)
    count = 0
    for m in (1, 2, 3):
        for f in reductions.all_formulas(m, 2):
            qs, db = reductions.gen_theorem2(f)
            assert graphs.check_safety(graphs.build_extended(qs)) == []
            sat = reductions.brute_force_sat(f) is not None
            assert sat == (oracle.max_size(qs, db) == f.k + f.num_vars), str(f)
            count += 1
    _report(label, clock, f"({count} formulas)")


def test_c07_mixed_attribute(criterion):
    label = "C7 mixed-attribute reduction"
    clock = criterion(label, 300.0)
    rng = random.Random(17)
    for _ in range(30):
        f = reductions.random_cnf(rng.randint(1, 3), rng.randint(1, 2), rng)
        qs, db = reductions.gen_appendixB(f)
        assert (reductions.brute_force_sat(f) is not None) == oracle.exists(qs, db), str(f)
    _report(label, clock)


def test_c08_counting_bounds(criterion):
    label = "C8 database query counts"
    clock = criterion(label)
    for n in range(10, 101, 10):
        (rec,) = bench.run(bench.Workload("list", n), reps=1, warmup=False)
        assert rec.db_queries == n
        assert rec.result_size == n
    flights = [bench.Workload("flights", t, seed=1) for t in range(100, 1001, 100)]
    flights += [bench.Workload("flights", n, seed=1, vary="queries") for n in range(10, 101, 10)]
    for w in flights:
        (rec,) = bench.run(w, reps=1, warmup=False)
        n = w.flights_queries if w.vary == "table" else w.size
        assert rec.db_queries <= 2 * n + rec.result_size
    _report(label, clock)


def test_c09_consistent_vs_oracle(criterion):
    label = "C9 consistent algorithm vs oracle"
    clock = criterion(label, 300.0)
    rng = random.Random(9)
    some = 0
    for _ in range(100):
        qs, cfg, db = random_consistent_instance(rng)
        res = cc.evaluate(qs, cfg, db)
        translated = QuerySet(cc.to_entangled(q, cfg) for q in qs)
        assert (res is None) == (not oracle.exists(translated, db))
        if res is not None:
            some += 1
            members = [cc.to_entangled(q, cfg) for q in qs if q.user in res.members]
            assert oracle.is_coordinating(members, cc.witness(res, qs, cfg), db)
    _report(label, clock, f"({some}/100 coordinate)")


def test_c10_linear_trend(criterion):
    label = "C10 linear growth"
    clock = criterion(label, 300.0)
    lists = bench.sweep([bench.Workload("list", n) for n in range(10, 101, 10)], reps=15)
    med = bench.medians(lists)
    r2_list = bench.linear_r2(list(med), list(med.values()))
    flights = bench.sweep([bench.Workload("flights", t, seed=2) for t in range(100, 1001, 100)], reps=15)
    med = bench.medians(flights)
    r2_flights = bench.linear_r2(list(med), list(med.values()))
    assert r2_list >= 0.9, r2_list
    assert r2_flights >= 0.9, r2_flights
    _report(label, clock, f"(R^2 list {r2_list:.3f}, flights {r2_flights:.3f})")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))

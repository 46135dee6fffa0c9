"""Synthetic workloads and a timing harness for both coordination algorithms.

Workloads:

* ``list``: query i asks to coordinate with query i+1; the last asks nothing.
* ``scalefree``: a directed preferential-attachment graph, each query asking
  for its out-neighbours.
* ``flights``: a flights table with distinct (destination, date) pairs, a
  complete friendship graph, and one "any friend" query per user that
  accepts any flight.

Absolute times depend on the machine; what carries over is how they grow.
"""

from __future__ import annotations

import csv
import gc
import json
import random
import re
import statistics
import time
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from entangled import consistent_coord, scc_coord
from entangled.consistent_coord import WILDCARD, ConsistentConfig, ConsistentQuery
from entangled.eql import EntangledQuery, QuerySet, format_queries
from entangled.relstore import Database, Relation, dump
from entangled.terms import Atom, Const, Var

WORKLOADS = ("list", "scalefree", "flights")
ALGORITHM_FOR = {"list": "scc", "scalefree": "scc", "flights": "consistent"}


@dataclass(frozen=True)
class SccInstance:
    queries: QuerySet
    db: Database


@dataclass(frozen=True)
class ConsistentInstance:
    queries: list[ConsistentQuery]
    config: ConsistentConfig
    db: Database


def _user(i: int) -> str:
    return f"U{i}"


def _users_db(n: int) -> Database:
    rows = tuple((i, f"user{i}") for i in range(1, n + 1))
    return Database([Relation("Users", 2, rows, key_column=0, types=("int", "str"), columns=("id", "name"))])


def _request_query(i: int, targets: Sequence[int]) -> EntangledQuery:
    """Query for user i: posts ``R(U_j, y_j)`` per target j, head ``R(U_i, x)``."""
    name = f"q{i}"
    x = Var("x", name)
    posts = [Atom("R", (Const(_user(j)), Var(f"y{j}", name))) for j in targets]
    return EntangledQuery(name, posts, [Atom("R", (Const(_user(i)), x))], [Atom("Users", (Const(i), x))])


def gen_list(n: int) -> SccInstance:
    """Chain q1 -> q2 -> ... -> qn. Safe, and every suffix coordinates."""
    if n < 1:
        raise ValueError("list workload needs n >= 1")
    qs = [_request_query(i, [i + 1] if i < n else []) for i in range(1, n + 1)]
    return SccInstance(QuerySet(qs), _users_db(n))


def preferential_attachment(n: int, rng: random.Random, m0: int = 2, m: int = 2) -> list[tuple[int, int]]:
    """Directed edges (new, old) over nodes 1..n.

    The first ``m0`` nodes form a transitive tournament (each points to all
    older ones). Every later node picks ``m`` distinct older nodes with
    probability proportional to in-degree + 1.
    """
    if n < 1 or m0 < 1 or m < 1:
        raise ValueError("n, m0 and m must be positive")
    m0 = min(m0, n)
    edges = [(u, v) for u in range(1, m0 + 1) for v in range(1, u)]
    # each node appears once, plus once per incoming edge
    urn = list(range(1, m0 + 1)) + [v for _, v in edges]
    for u in range(m0 + 1, n + 1):
        k = min(m, u - 1)
        picked: set[int] = set()
        while len(picked) < k:
            picked.add(rng.choice(urn))
        for v in sorted(picked):
            edges.append((u, v))
            urn.append(v)
        urn.append(u)
    return edges


def gen_scalefree(n: int, seed: int = 0, m0: int = 2, m: int = 2) -> SccInstance:
    if n < 2:
        raise ValueError("scale-free workload needs n >= 2")
    edges = preferential_attachment(n, random.Random(seed), m0, m)
    targets: dict[int, list[int]] = {i: [] for i in range(1, n + 1)}
    for u, v in edges:
        targets[u].append(v)
    qs = [_request_query(i, targets[i]) for i in range(1, n + 1)]
    return SccInstance(QuerySet(qs), _users_db(n))


FLIGHTS_CONFIG = ConsistentConfig(
    subject_relation="Flights",
    key_column=0,
    attributes=("source", "airline", "dest", "date"),
    coord_attributes=("dest", "date"),
    friends_relation="Friends",
    friends_user_column=0,
)

_AIRLINES = ("AA", "BA", "DL", "LH", "UA")
_DAYS = 28


def gen_flights(num_queries: int, table_size: int, seed: int = 0) -> ConsistentInstance:
    if num_queries < 1 or table_size < 1:
        raise ValueError("flights workload needs positive sizes")
    rng = random.Random(seed)
    num_cities = max(2, -(-table_size // _DAYS) + 1)
    cities = [f"City{c}" for c in range(num_cities)]
    # distinct (dest, date) pairs, then shuffled
    pairs = [(cities[i // _DAYS], f"2012-03-{i % _DAYS + 1:02d}") for i in range(table_size)]
    rng.shuffle(pairs)
    rows = tuple(
        (k + 1, rng.choice([c for c in cities if c != dest]), rng.choice(_AIRLINES), dest, date)
        for k, (dest, date) in enumerate(pairs)
    )
    users = [_user(i) for i in range(1, num_queries + 1)]
    friends = tuple((a, b) for a in users for b in users if a != b)
    db = Database(
        [
            Relation(
                "Flights", 5, rows, key_column=0, types=("int", "str", "str", "str", "str"),
                columns=("id", "source", "airline", "dest", "date"),
            ),
            Relation("Friends", 2, friends, types=("str", "str"), columns=("user", "friend")),
        ]
    )
    queries = [ConsistentQuery(u, {}, (WILDCARD,)) for u in users]
    return ConsistentInstance(queries, FLIGHTS_CONFIG, db)


@dataclass(frozen=True)
class Workload:
    """One point of a sweep. ``size`` is n for list/scalefree and the varied axis for flights."""

    kind: str
    size: int
    seed: int = 0
    m0: int = 2
    m: int = 2
    flights_queries: int = 50
    flights_table: int = 100
    vary: str = "table"

    def __post_init__(self):
        if self.kind not in WORKLOADS:
            raise ValueError(f"unknown workload {self.kind!r}")
        if self.vary not in ("table", "queries"):
            raise ValueError("vary must be 'table' or 'queries'")

    def build(self, rep: int = 0) -> SccInstance | ConsistentInstance:
        if self.kind == "list":
            return gen_list(self.size)
        if self.kind == "scalefree":
            return gen_scalefree(self.size, self.seed + rep, self.m0, self.m)
        if self.vary == "table":
            return gen_flights(self.flights_queries, self.size, self.seed + rep)
        return gen_flights(self.size, self.flights_table, self.seed + rep)


def save_workload(inst: SccInstance | ConsistentInstance, directory: str | Path) -> list[Path]:
    """Write an instance as a database directory plus query file(s)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [dump(inst.db, directory / "db")]
    if isinstance(inst, SccInstance):
        p = directory / "queries.eql"
        p.write_text(format_queries(inst.queries), encoding="utf-8")
        paths.append(p)
    else:
        p = directory / "queries.json"
        p.write_text(json.dumps([q.to_json() for q in inst.queries], indent=1) + "\n", encoding="utf-8")
        c = directory / "config.json"
        c.write_text(json.dumps(inst.config.to_json(), indent=1) + "\n", encoding="utf-8")
        paths += [p, c]
    return paths


@dataclass(frozen=True)
class TimingRecord:
    workload: str
    size: int
    rep: int
    total_ms: float
    graph_ms: float
    db_queries: int
    result_size: int


CSV_COLUMNS = [f.name for f in fields(TimingRecord)]


def _measure(inst: SccInstance | ConsistentInstance) -> tuple[float, float, int, int]:
    # collector pauses are noise here, as in timeit
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        if isinstance(inst, SccInstance):
            r = scc_coord.run(inst.queries, inst.db)
        else:
            r = consistent_coord.run(inst.queries, inst.config, inst.db)
        total = (time.perf_counter() - t0) * 1000.0
    finally:
        if was_enabled:
            gc.enable()
    size = len(r.result.members) if r.result else 0
    return total, r.graph_ms, r.db_queries, size


def run(workload: Workload, algorithm: str | None = None, reps: int = 1, warmup: bool = True) -> list[TimingRecord]:
    """Time ``reps`` evaluations of ``workload``; an extra first run is discarded when ``warmup``."""
    expected = ALGORITHM_FOR[workload.kind]
    if algorithm is not None and algorithm != expected:
        raise ValueError(f"workload {workload.kind} runs with {expected}, not {algorithm}")
    if reps < 1:
        raise ValueError("reps must be positive")
    if warmup:
        _measure(workload.build(0))
    return [rec for rep in range(reps) for rec in run_once(workload, rep)]


def run_once(workload: Workload, rep: int) -> list[TimingRecord]:
    total, graph, dbq, size = _measure(workload.build(rep))
    return [TimingRecord(workload.kind, workload.size, rep, round(total, 4), round(graph, 4), dbq, size)]


def sweep(workloads: Iterable[Workload], reps: int = 1) -> list[TimingRecord]:
    """Time every workload ``reps`` times, round-robin over workloads.

    Interleaving spreads a burst of machine noise over many sizes instead of
    every repetition of one size, so per-size medians stay clean. Records
    come back grouped by workload, in rep order.
    """
    workloads = list(workloads)
    if reps < 1:
        raise ValueError("reps must be positive")
    if workloads:
        _measure(workloads[0].build(0))
    by_workload: list[list[TimingRecord]] = [[] for _ in workloads]
    for rep in range(reps):
        for i, w in enumerate(workloads):
            by_workload[i] += run_once(w, rep)
    return [rec for recs in by_workload for rec in recs]


def write_csv(records: Iterable[TimingRecord], path_or_file) -> None:
    def emit(fh):
        w = csv.DictWriter(fh, CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(asdict(r))

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def read_csv(path) -> list[TimingRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            TimingRecord(
                r["workload"], int(r["size"]), int(r["rep"]), float(r["total_ms"]),
                float(r["graph_ms"]), int(r["db_queries"]), int(r["result_size"]),
            )
            for r in csv.DictReader(fh)
        ]


def parse_sizes(text: str) -> list[int]:
    """``"10..100:10"`` (inclusive, step defaults to 1), or a comma list ``"10,20,50"``."""
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+))?\s*", text)
    if m:
        lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
        if step < 1 or hi < lo:
            raise ValueError(f"bad size range {text!r}")
        return list(range(lo, hi + 1, step))
    try:
        sizes = [int(s) for s in text.split(",")]
    except ValueError:
        raise ValueError(f"bad size list {text!r}") from None
    if any(s < 1 for s in sizes):
        raise ValueError("sizes must be positive")
    return sizes


def medians(records: Iterable[TimingRecord], column: str = "total_ms") -> dict[int, float]:
    by_size: dict[int, list[float]] = {}
    for r in records:
        by_size.setdefault(r.size, []).append(getattr(r, column))
    return {s: statistics.median(v) for s, v in sorted(by_size.items())}


def linear_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Coefficient of determination of the least-squares line through (xs, ys)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - float(np.sum(resid**2)) / ss_tot

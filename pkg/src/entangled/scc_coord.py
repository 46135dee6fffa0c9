"""Coordination for safe (not necessarily unique) query sets.

Safety means each postcondition has a single possible partner head, so if a
query is in a coordinating set then so is everything it can reach in the
coordination graph. Strongly connected components therefore stand or fall
together. We process the components DAG sinks first, combine each component
with the combined queries of its successors, and ground the result with one
database query. Each success yields the candidate set R(q) for the
component's queries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from entangled import graphs
from entangled.eql import EntangledQuery, QuerySet, rename_apart
from entangled.relstore import Database, first_grounding
from entangled.terms import Atom, Const, Substitution, Var, value_key
from entangled.selection import MAX, Candidate, SelectionCriterion
from entangled.unify import CombinedQuery, UnificationError, combine


class UnsafeInput(ValueError):
    def __init__(self, queries: list[str]):
        super().__init__(f"query set is unsafe: {', '.join(queries)}")
        self.queries = queries


@dataclass(frozen=True)
class CoordinationResult:
    members: frozenset[str]
    assignment: Substitution
    db_queries_issued: int
    candidates: list[tuple[tuple[str, ...], int]]

    def to_json(self) -> dict:
        return {
            "members": sorted(self.members),
            "assignment": {k: str(v) for k, v in self.assignment.values_by_key().items()},
            "db_queries": self.db_queries_issued,
            "candidates": [{"members": list(m), "size": n} for m, n in self.candidates],
        }


@dataclass
class SCCRun:
    """Everything one evaluation produced, including the bookkeeping the benchmarks read."""

    result: CoordinationResult | None
    db_queries: int
    graph_ms: float
    candidates: list[Candidate]
    dag: graphs.ComponentsDAG
    pruned: QuerySet
    status: dict[int, str] = field(default_factory=dict)


def prune_unsatisfiable_posts(qs: QuerySet) -> QuerySet:
    """Drop, until nothing changes, queries with a postcondition no remaining head unifies with.

    Removed queries can belong to no coordinating set, so this never changes
    the answer.
    """
    alive = {q.name for q in qs}
    # for each post: which queries have a unifiable head
    supporters: dict[tuple[str, int], set[str]] = {}
    dependants: dict[str, set[tuple[str, int]]] = {}
    ext = graphs.build_extended(qs)
    for q in qs:
        for pi in range(len(q.post)):
            supporters[(q.name, pi)] = set()
    for p, h in ext.edges:
        supporters[p].add(h[0])
        dependants.setdefault(h[0], set()).add(p)
    todo = [p for p, s in supporters.items() if not s]
    while todo:
        name = todo.pop()[0]
        if name not in alive:
            continue
        alive.discard(name)
        for p in dependants.get(name, ()):
            if p[0] in alive:
                supporters[p].discard(name)
                if not supporters[p]:
                    todo.append(p)
    return qs.subset(alive)


def _fallback_value(db: Database, qs: QuerySet):
    dom = db.active_domain()
    if dom:
        return dom[0]
    consts = {t.value for q in qs for a in q.atoms() for t in a.args if isinstance(t, Const)}
    if consts:
        return min(consts, key=value_key)
    return None


def ground_assignment(
    queries: list[EntangledQuery], combined: CombinedQuery, grounding: Substitution, fallback
) -> Substitution:
    """Extend a grounding of the combined body to every variable of the members.

    Variables that neither the body nor a constant pins down may take any
    value; they get ``fallback``.
    """
    out: dict[Var, Const] = {}
    for q in queries:
        for v in q.variables():
            t = combined.unifier.term(v)
            if isinstance(t, Var):
                t = grounding.get(t)
            if t is None:
                if fallback is None:
                    raise ValueError(f"no value available for unconstrained variable {v}")
                t = Const(fallback)
            out[v] = t
    return Substitution(out)


def run(qs: QuerySet, db: Database, sel: SelectionCriterion = MAX) -> SCCRun:
    qs = rename_apart(qs)
    unsafe = graphs.check_safety(graphs.build_extended(qs))
    if unsafe:
        raise UnsafeInput(unsafe)

    t0 = time.perf_counter()
    pruned = prune_unsatisfiable_posts(qs)
    ext = graphs.build_extended(pruned)
    dag = graphs.condense(ext.collapse())
    graph_ms = (time.perf_counter() - t0) * 1000.0

    matching: dict[tuple[str, int], Atom] = {
        p: pruned[h[0]].heads[h[1]] for p, h in ext.edges
    }
    succ: dict[int, list[int]] = {i: [] for i in dag.order}
    for a, b in sorted(dag.edges):
        succ[a].append(b)
    order = {name: i for i, name in enumerate(pruned.names)}

    combined: dict[int, CombinedQuery] = {}
    groundings: dict[int, Substitution] = {}
    status: dict[int, str] = {}
    candidates: list[Candidate] = []
    db_queries = 0
    for node in dag.order:
        if any(status[s] != "ok" for s in succ[node]):
            status[node] = "successor-failed"
            continue
        members = sorted(dag.nodes[node], key=order.__getitem__)
        try:
            cq = combine([pruned[n] for n in members], [combined[s] for s in succ[node]], matching)
        except UnificationError:
            status[node] = "unification-failed"
            continue
        db_queries += 1
        grounding = first_grounding(db, cq.body)
        if grounding is None:
            status[node] = "grounding-failed"
            continue
        status[node] = "ok"
        combined[node] = cq
        groundings[node] = grounding
        candidates.append(Candidate(cq.members, node))

    chosen = sel.choose(candidates)
    result = None
    if chosen is not None:
        cq = combined[chosen.tag]
        members = [q for q in pruned if q.name in cq.members]
        assignment = ground_assignment(members, cq, groundings[chosen.tag], _fallback_value(db, qs))
        result = CoordinationResult(
            cq.members,
            assignment,
            db_queries,
            [(c.sorted_names, c.size) for c in candidates],
        )
    return SCCRun(result, db_queries, graph_ms, candidates, dag, pruned, status)


def evaluate(qs: QuerySet, db: Database, sel: SelectionCriterion = MAX) -> CoordinationResult | None:
    """Find a coordinating set of a safe query set, or None if there is none.

    The set returned is the best, under ``sel``, among the reachable sets
    R(q) that coordinate. Raises UnsafeInput for unsafe sets.
    """
    return run(qs, db, sel).result


reachable_set = graphs.reachable_set

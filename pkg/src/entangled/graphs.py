"""Coordination graphs over a query set, safety and uniqueness checks, SCCs."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from entangled.eql import QuerySet
from entangled.terms import Atom, Const
from entangled.unify import unifiable

PostRef = tuple[str, int]
HeadRef = tuple[str, int]


@dataclass(frozen=True)
class ExtendedCoordinationGraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[PostRef, HeadRef], ...]

    def collapse(self) -> CoordinationGraph:
        return CoordinationGraph(self.vertices, frozenset((p[0], h[0]) for p, h in self.edges))


@dataclass(frozen=True)
class CoordinationGraph:
    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def successors(self) -> dict[str, list[str]]:
        """Adjacency lists ordered by vertex order, for deterministic traversal."""
        pos = {v: i for i, v in enumerate(self.vertices)}
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
        for lst in adj.values():
            lst.sort(key=pos.__getitem__)
        return adj


@dataclass(frozen=True)
class ComponentsDAG:
    """Condensation of a coordination graph.

    ``nodes`` are listed in reverse topological order: every successor of a
    node appears before it. ``order`` is the corresponding index sequence.
    """

    nodes: tuple[frozenset[str], ...]
    edges: frozenset[tuple[int, int]]
    component_of: dict[str, int] = field(compare=False)

    @property
    def order(self) -> list[int]:
        return list(range(len(self.nodes)))

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)


def _head_index(qs: QuerySet):
    """Heads grouped by relation, then by the constant in their first argument."""
    index: dict[tuple[str, int], tuple[dict, list]] = {}
    for q in qs:
        for hi, h in enumerate(q.heads):
            by_const, loose = index.setdefault((h.relation, h.arity), ({}, []))
            first = h.args[0] if h.args else None
            if isinstance(first, Const):
                by_const.setdefault(first, []).append((q.name, hi, h))
            else:
                loose.append((q.name, hi, h))
    return index


def _candidate_heads(index, p: Atom):
    entry = index.get((p.relation, p.arity))
    if entry is None:
        return []
    by_const, loose = entry
    first = p.args[0] if p.args else None
    if isinstance(first, Const):
        return by_const.get(first, []) + loose
    return [h for group in by_const.values() for h in group] + loose


def build_extended(qs: QuerySet) -> ExtendedCoordinationGraph:
    """Every (postcondition, head) pair that unifies, self-loops included."""
    order = {name: i for i, name in enumerate(qs.names)}
    index = _head_index(qs)
    edges = []
    for q in qs:
        for pi, p in enumerate(q.post):
            for name, hi, h in _candidate_heads(index, p):
                if unifiable(p, h):
                    edges.append(((q.name, pi), (name, hi)))
    edges.sort(key=lambda e: (order[e[0][0]], e[0][1], order[e[1][0]], e[1][1]))
    return ExtendedCoordinationGraph(tuple(qs.names), tuple(edges))


def build_graph(qs: QuerySet) -> CoordinationGraph:
    return build_extended(qs).collapse()


def check_safety(g: ExtendedCoordinationGraph) -> list[str]:
    """Names of unsafe queries: those with a postcondition matching two or more heads.

    An empty list means the set is safe.
    """
    count: dict[PostRef, int] = {}
    for p, _ in g.edges:
        count[p] = count.get(p, 0) + 1
    bad = {p[0] for p, n in count.items() if n > 1}
    return [v for v in g.vertices if v in bad]


def strongly_connected_components(vertices: Sequence[str], adj: dict[str, list[str]]) -> list[list[str]]:
    """Tarjan's algorithm, iterative; components come out sinks first."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[list[str]] = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def condense(g: CoordinationGraph) -> ComponentsDAG:
    adj = g.successors()
    pos = {v: i for i, v in enumerate(g.vertices)}
    comps = strongly_connected_components(g.vertices, adj)
    component_of = {v: i for i, comp in enumerate(comps) for v in comp}
    edges = {
        (component_of[u], component_of[v])
        for u, v in g.edges
        if component_of[u] != component_of[v]
    }
    nodes = tuple(frozenset(sorted(c, key=pos.__getitem__)) for c in comps)
    return ComponentsDAG(nodes, frozenset(edges), component_of)


def check_uniqueness(g: CoordinationGraph) -> bool:
    """True iff the whole graph is one strongly connected component.

    Uniqueness is defined for safe sets; on unsafe sets this is plain strong
    connectivity.
    """
    if not g.vertices:
        return False
    return len(condense(g).nodes) == 1


def reachable_components(dag: ComponentsDAG, start: int) -> set[int]:
    seen = {start}
    todo = [start]
    succ: dict[int, list[int]] = {}
    for a, b in dag.edges:
        succ.setdefault(a, []).append(b)
    while todo:
        i = todo.pop()
        for j in succ.get(i, ()):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return seen


def reachable_set(dag: ComponentsDAG, q: str) -> frozenset[str]:
    """All queries in components reachable from ``q``'s component, ``q``'s own included."""
    if q not in dag.component_of:
        raise KeyError(f"unknown query {q!r}")
    return frozenset().union(*(dag.nodes[i] for i in reachable_components(dag, dag.component_of[q])))


# -- DOT export -------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def to_dot(g: CoordinationGraph | ExtendedCoordinationGraph, qs: QuerySet | None = None) -> str:
    lines = ["digraph coordination {"]
    for v in g.vertices:
        lines.append(f"  {_quote(v)};")
    if isinstance(g, ExtendedCoordinationGraph):
        for (q, pi), (q2, hi) in g.edges:
            label = f"post {pi} -> head {hi}"
            if qs is not None:
                label = f"{qs[q].post[pi]} -> {qs[q2].heads[hi]}"
            lines.append(f"  {_quote(q)} -> {_quote(q2)} [label={_quote(label)}];")
    else:
        for u, v in sorted(g.edges):
            lines.append(f"  {_quote(u)} -> {_quote(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def edges_from_pairs(vertices: Iterable[str], pairs: Iterable[tuple[str, str]]) -> CoordinationGraph:
    return CoordinationGraph(tuple(vertices), frozenset(pairs))

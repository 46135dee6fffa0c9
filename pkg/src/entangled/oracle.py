"""Brute-force reference for coordinating sets, for toy instances only.

Nothing here reuses the unifier or the join evaluator; the point is to be
obviously correct.

Assignments range over the *active domain*: constants stored in the database
plus constants written in the queries. No coordinating set is lost. Take any
witness assignment and compose it with a map that is the identity on the
active domain and sends every other value to one fixed domain value. Body
atoms only ever take stored values, so they are unchanged. The postcondition
condition is a set of equalities between grounded atoms, and equalities
survive any map. The composed assignment is therefore still a witness.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

from entangled.eql import EntangledQuery, QuerySet
from entangled.relstore import Database
from entangled.terms import Const, Substitution, Value, Var, value_key


class OracleLimitExceeded(RuntimeError):
    """The instance is too large for exhaustive search under the given limits."""


@dataclass(frozen=True)
class OracleLimits:
    """``max_combinations`` bounds search nodes (partial assignments) over all subsets."""

    max_queries: int = 16
    max_combinations: int = 20_000_000

    def __post_init__(self):
        if self.max_queries < 1 or self.max_combinations < 1:
            raise ValueError("oracle limits must be positive")


def active_domain(qs: Iterable[EntangledQuery], db: Database) -> list[Value]:
    values = set(db.active_domain())
    for q in qs:
        for a in q.atoms():
            for t in a.args:
                if isinstance(t, Const):
                    values.add(t.value)
    return sorted(values, key=value_key)


def _value(t) -> Value:
    if isinstance(t, Var):
        raise ValueError(f"assignment is not ground: maps to variable {t}")
    return t.value if isinstance(t, Const) else t


def is_coordinating(queries: Iterable[EntangledQuery], h: Mapping[Var, object], db: Database) -> bool:
    """Check the three conditions of a coordinating set for ``queries`` under ``h``.

    (1) every variable has a value, (2) every grounded body atom is a stored
    tuple, (3) every grounded postcondition is one of the grounded heads.
    """
    queries = list(queries)
    if not queries:
        return False
    env = {v: _value(t) for v, t in h.items()}

    def ground(a) -> tuple | None:
        out = []
        for t in a.args:
            if isinstance(t, Const):
                out.append(t.value)
            elif t in env:
                out.append(env[t])
            else:
                return None
        return (a.relation, tuple(out))

    heads = set()
    for q in queries:
        for a in q.heads:
            g = ground(a)
            if g is None:
                return False
            heads.add(g)
    for q in queries:
        for a in q.body:
            g = ground(a)
            if g is None:
                return False
            rel = db.get(a.relation)
            if rel is None or rel.arity != a.arity or g[1] not in rel:
                return False
        for a in q.post:
            g = ground(a)
            if g is None or g not in heads:
                return False
    return True


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise OracleLimitExceeded(f"search exceeded {self.limit} nodes")


def _resolve(t, env):
    if isinstance(t, Const):
        return t.value
    return env.get(t, _UNSET)


_UNSET = object()


def _body_possible(a, db: Database, env) -> bool:
    rel = db.get(a.relation)
    if rel is None or rel.arity != a.arity:
        return False
    fixed = [(i, _resolve(t, env)) for i, t in enumerate(a.args)]
    fixed = [(i, v) for i, v in fixed if v is not _UNSET]
    return any(all(row[i] == v and type(row[i]) is type(v) for i, v in fixed) for row in rel.tuples)


def _post_possible(p, heads, env) -> bool:
    for h in heads:
        if h.relation != p.relation or h.arity != p.arity:
            continue
        ok = True
        for s, t in zip(p.args, h.args):
            a, b = _resolve(s, env), _resolve(t, env)
            if a is not _UNSET and b is not _UNSET and (a != b or type(a) is not type(b)):
                ok = False
                break
        if ok:
            return True
    return False


def find_assignment(
    queries: Sequence[EntangledQuery],
    db: Database,
    domain: Sequence[Value] | None = None,
    budget: _Budget | None = None,
) -> Substitution | None:
    """Lexicographically first assignment making ``queries`` a coordinating set.

    Variables are taken in order of their scoped names and values in domain
    order, so the first hit is the canonical one. Partial assignments are cut
    as soon as a body atom has no matching tuple or a postcondition has no
    compatible head; the final check is the full definition.
    """
    queries = list(queries)
    if domain is None:
        domain = active_domain(queries, db)
    budget = budget or _Budget(10**9)
    heads = [h for q in queries for h in q.heads]
    body = [a for q in queries for a in q.body]
    posts = [p for q in queries for p in q.post]

    env: dict[Var, Value] = {}
    if not all(_body_possible(a, db, env) for a in body):
        return None
    if not all(_post_possible(p, heads, env) for p in posts):
        return None

    variables = sorted({v for q in queries for v in q.variables()}, key=lambda v: v.key)
    touches_body = [[a for a in body if v in a.args] for v in variables]
    touches_post = [
        [p for p in posts if v in p.args or any(v in h.args for h in heads if h.relation == p.relation)]
        for v in variables
    ]

    def dfs(i: int) -> bool:
        if i == len(variables):
            return is_coordinating(queries, env, db)
        v = variables[i]
        for val in domain:
            budget.tick()
            env[v] = val
            if all(_body_possible(a, db, env) for a in touches_body[i]) and all(
                _post_possible(p, heads, env) for p in touches_post[i]
            ):
                if dfs(i + 1):
                    return True
            del env[v]
        return False

    if dfs(0):
        return Substitution({v: Const(val) for v, val in env.items()})
    return None


def _subsets(names: Sequence[str], descending: bool = False) -> Iterator[tuple[str, ...]]:
    sizes = range(len(names), 0, -1) if descending else range(1, len(names) + 1)
    for k in sizes:
        yield from itertools.combinations(names, k)


def _check_size(qs: QuerySet, limits: OracleLimits) -> None:
    if len(qs) > limits.max_queries:
        raise OracleLimitExceeded(f"{len(qs)} queries exceeds the limit of {limits.max_queries}")


def iter_coordinating(
    qs: QuerySet, db: Database, limits: OracleLimits = OracleLimits(), descending: bool = False
) -> Iterator[tuple[frozenset[str], Substitution]]:
    """Yield every coordinating subset with its canonical assignment.

    Subsets come by size (ascending unless ``descending``), then in
    combination order of the query list.
    """
    _check_size(qs, limits)
    domain = active_domain(qs, db)
    budget = _Budget(limits.max_combinations)
    for names in _subsets(qs.names, descending):
        budget.tick()
        h = find_assignment([qs[n] for n in names], db, domain, budget)
        if h is not None:
            yield frozenset(names), h


def find_all(qs: QuerySet, db: Database, limits: OracleLimits = OracleLimits()) -> list[tuple[frozenset[str], Substitution]]:
    return list(iter_coordinating(qs, db, limits))


def exists(qs: QuerySet, db: Database, limits: OracleLimits = OracleLimits()) -> bool:
    return next(iter_coordinating(qs, db, limits), None) is not None


def max_size(qs: QuerySet, db: Database, limits: OracleLimits = OracleLimits()) -> int:
    """Size of a largest coordinating set, 0 if there is none."""
    for names, _ in iter_coordinating(qs, db, limits, descending=True):
        return len(names)
    return 0


def is_coordinating_subset(qs: QuerySet, names: Iterable[str], db: Database, limits: OracleLimits = OracleLimits()) -> bool:
    """Whether some assignment makes exactly ``names`` a coordinating set."""
    queries = [qs[n] for n in names]
    if not queries:
        return False
    return find_assignment(queries, db, active_domain(qs, db), _Budget(limits.max_combinations)) is not None

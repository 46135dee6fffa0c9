"""Coordination for unsafe query sets whose users all coordinate on the same attributes.

Setting: one subject relation S (a key column plus attributes), one directed
friends relation F, and one query per user. A user asks for an S tuple for
themself and for each partner, where a partner is a named user or "any
friend". When every query agrees with its partners on the coordination
attributes and leaves their other attributes free, some coordinating set
exists iff one exists whose tuples all share the coordination values. So we
try each candidate value ``v`` separately: keep the queries that ``v``
satisfies, then repeatedly drop queries whose partners are gone.
"""

from __future__ import annotations

import re
import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from entangled import graphs
from entangled.eql import EntangledQuery
from entangled.relstore import Database, distinct_values, first_grounding
from entangled.selection import MAX, Candidate, SelectionCriterion
from entangled.terms import Atom, Const, Substitution, Term, Value, Var


class _Wildcard:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "WILDCARD"

    def __reduce__(self):
        return (_Wildcard, ())


WILDCARD = _Wildcard()
"""Partner placeholder meaning "any of my friends"."""


@dataclass(frozen=True)
class ConsistentConfig:
    subject_relation: str
    key_column: int
    attributes: tuple[str, ...]
    coord_attributes: tuple[str, ...]
    friends_relation: str
    friends_user_column: int = 0
    answer_relation: str = "R"

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "coord_attributes", tuple(self.coord_attributes))
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("attribute names must be distinct")
        missing = [a for a in self.coord_attributes if a not in self.attributes]
        if missing:
            raise ValueError(f"coordination attributes {missing} are not attributes of {self.subject_relation}")
        if not self.coord_attributes:
            raise ValueError("at least one coordination attribute is required")
        if self.key_column < 0 or self.key_column > len(self.attributes):
            raise ValueError(f"key column {self.key_column} out of range")
        if self.friends_user_column not in (0, 1):
            raise ValueError("friends_user_column must be 0 or 1")

    @property
    def arity(self) -> int:
        return len(self.attributes) + 1

    def column(self, attribute: str) -> int:
        """Column of ``attribute`` in S; attributes fill the non-key columns in order."""
        j = self.attributes.index(attribute)
        return j if j < self.key_column else j + 1

    @property
    def coord_columns(self) -> list[int]:
        return [self.column(a) for a in self.coord_attributes]

    @classmethod
    def from_json(cls, data: Mapping) -> ConsistentConfig:
        return cls(
            subject_relation=data["subject_relation"],
            key_column=int(data.get("key_column", 0)),
            attributes=tuple(data["attributes"]),
            coord_attributes=tuple(data["coord_attributes"]),
            friends_relation=data["friends_relation"],
            friends_user_column=int(data.get("friends_user_column", 0)),
            answer_relation=data.get("answer_relation", "R"),
        )

    def to_json(self) -> dict:
        return {
            "subject_relation": self.subject_relation,
            "key_column": self.key_column,
            "attributes": list(self.attributes),
            "coord_attributes": list(self.coord_attributes),
            "friends_relation": self.friends_relation,
            "friends_user_column": self.friends_user_column,
            "answer_relation": self.answer_relation,
        }



@dataclass(frozen=True)
class ConsistentQuery:
    """One user's request.

    ``own`` maps attributes to terms for the user's own tuple; a missing
    attribute is "don't care". ``partner_constraints`` gives, per partner,
    the terms for that partner's tuple; None means the usual shape: copy the
    user's own terms on coordination attributes, fresh variables elsewhere.
    """

    user: str
    own: Mapping[str, Term] = field(default_factory=dict)
    partners: tuple = ()
    partner_constraints: tuple[Mapping[str, Term], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "own", dict(self.own))
        object.__setattr__(self, "partners", tuple(self.partners))
        if self.partner_constraints is not None:
            object.__setattr__(self, "partner_constraints", tuple(dict(c) for c in self.partner_constraints))

    def __hash__(self) -> int:
        return hash((self.user, self.partners))

    @classmethod
    def simple(cls, user: str, own: Mapping[str, Value], partners: Iterable = ()) -> ConsistentQuery:
        return cls(user, {k: _term(v) for k, v in own.items()}, tuple(partners))

    @property
    def has_wildcard(self) -> bool:
        return any(p is WILDCARD for p in self.partners)

    @property
    def named_partners(self) -> list[str]:
        return [p for p in self.partners if p is not WILDCARD]

    @property
    def query_name(self) -> str:
        return "q_" + re.sub(r"[^A-Za-z0-9_]", "_", self.user)

    def own_terms(self, cfg: ConsistentConfig) -> list[Term]:
        """Own term per attribute, "don't care" filled with fresh variables."""
        return [self.own.get(a, Var(f"a{j + 1}", self.query_name)) for j, a in enumerate(cfg.attributes)]

    def partner_terms(self, cfg: ConsistentConfig) -> list[list[Term]]:
        own = self.own_terms(cfg)
        out = []
        for i in range(len(self.partners)):
            if self.partner_constraints is None:
                given: Mapping[str, Term] = {}
            else:
                given = self.partner_constraints[i]
            row = []
            for j, a in enumerate(cfg.attributes):
                if a in given:
                    row.append(given[a])
                elif a in cfg.coord_attributes:
                    row.append(own[j])
                else:
                    row.append(Var(f"z{i + 1}_{j + 1}", self.query_name))
            out.append(row)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> ConsistentQuery:
        partners = tuple(WILDCARD if p == "*" else p for p in data.get("partners", ()))
        pc = data.get("partner_constraints")
        user = data["user"]
        scope = "q_" + re.sub(r"[^A-Za-z0-9_]", "_", user)
        return cls(
            user,
            {k: _term(v, scope) for k, v in data.get("own", {}).items()},
            partners,
            None if pc is None else tuple({k: _term(v, scope) for k, v in c.items()} for c in pc),
        )

    def to_json(self) -> dict:
        out = {
            "user": self.user,
            "own": {k: _term_json(t) for k, t in self.own.items()},
            "partners": ["*" if p is WILDCARD else p for p in self.partners],
        }
        if self.partner_constraints is not None:
            out["partner_constraints"] = [{k: _term_json(t) for k, t in c.items()} for c in self.partner_constraints]
        return out


def _term(v, scope: str = "") -> Term:
    if isinstance(v, (Var, Const)):
        return v
    if isinstance(v, str) and v.startswith("?"):
        return Var(v[1:], scope)
    return Const(v)


def _term_json(t: Term):
    return "?" + t.name if isinstance(t, Var) else t.value


# -- checks and translation --------------------------------------------------


def check_consistency(cq: ConsistentQuery, cfg: ConsistentConfig) -> list[str]:
    """Violations of the consistency conditions; empty when the query is fine.

    On coordination attributes every partner term must equal the user's own
    term. On the other attributes partner terms must be distinct variables,
    distinct from the user's own term and used nowhere else in the query.
    """
    out = []
    who = cq.user
    unknown = [a for a in cq.own if a not in cfg.attributes]
    if unknown:
        out.append(f"{who}: unknown attributes {unknown}")
    if sum(1 for p in cq.partners if p is WILDCARD) > 1:
        out.append(f"{who}: at most one 'any friend' partner is supported")
    if cq.partner_constraints is not None:
        if len(cq.partner_constraints) != len(cq.partners):
            out.append(f"{who}: {len(cq.partner_constraints)} partner constraint sets for {len(cq.partners)} partners")
            return out
        for c in cq.partner_constraints:
            bad = [a for a in c if a not in cfg.attributes]
            if bad:
                out.append(f"{who}: unknown partner attributes {bad}")
    if out:
        return out

    own = cq.own_terms(cfg)
    partners = cq.partner_terms(cfg)
    own_vars = [t for t in own if isinstance(t, Var)]
    if len(set(own_vars)) != len(own_vars):
        out.append(f"{who}: the same variable is used for two of the user's own attributes")

    uses: dict[Var, int] = {}
    for row in [own, *partners]:
        for t in row:
            if isinstance(t, Var):
                uses[t] = uses.get(t, 0) + 1

    for j, a in enumerate(cfg.attributes):
        if a in cfg.coord_attributes:
            for i, row in enumerate(partners):
                if row[j] != own[j]:
                    out.append(f"{who}: partner {i + 1} differs from the user on coordination attribute {a}")
        else:
            for i, row in enumerate(partners):
                t = row[j]
                if not isinstance(t, Var):
                    out.append(f"{who}: partner {i + 1} has constant {t} on non-coordination attribute {a}")
                elif uses[t] != 1:
                    out.append(f"{who}: partner {i + 1} variable {t.name} on {a} is not fresh")
    for j, a in enumerate(cfg.attributes):
        if a not in cfg.coord_attributes and isinstance(own[j], Var) and uses[own[j]] != 1:
            out.append(f"{who}: own variable {own[j].name} on non-coordination attribute {a} is shared")
    return out


def _subject_atom(cfg: ConsistentConfig, key: Term, terms: Sequence[Term]) -> Atom:
    args: list[Term] = list(terms)
    args.insert(cfg.key_column, key)
    return Atom(cfg.subject_relation, args)


def _friend_atom(cfg: ConsistentConfig, user: Term, friend: Term) -> Atom:
    pair = (user, friend) if cfg.friends_user_column == 0 else (friend, user)
    return Atom(cfg.friends_relation, pair)


def to_entangled(cq: ConsistentQuery, cfg: ConsistentConfig) -> EntangledQuery:
    """The entangled query this request stands for.

    Head ``R(x, User)``; one postcondition ``R(y_i, partner_i)`` per partner;
    body: ``F(User, f)`` when a friend wildcard is used, the user's S tuple,
    and one S tuple per partner.
    """
    name = cq.query_name
    me = Const(cq.user)
    x = Var("x", name)
    f = Var("f", name)
    own = cq.own_terms(cfg)
    posts, body = [], []
    if cq.has_wildcard:
        body.append(_friend_atom(cfg, me, f))
    body.append(_subject_atom(cfg, x, own))
    for i, (p, terms) in enumerate(zip(cq.partners, cq.partner_terms(cfg))):
        y = Var(f"y{i + 1}", name)
        posts.append(Atom(cfg.answer_relation, (y, f if p is WILDCARD else Const(p))))
        body.append(_subject_atom(cfg, y, terms))
    return EntangledQuery(name, posts, [Atom(cfg.answer_relation, (x, me))], body)


# -- the algorithm -----------------------------------------------------------


@dataclass
class OptionsList:
    """Coordination values per user, and their union in first-seen order."""

    per_query: dict[str, list[tuple[Value, ...]]]
    union: list[tuple[Value, ...]]
    db_queries: int = 0


def _own_filter(cq: ConsistentQuery, cfg: ConsistentConfig) -> dict[int, Value]:
    return {cfg.column(a): t.value for a, t in cq.own.items() if isinstance(t, Const)}


def compute_options(qs: Sequence[ConsistentQuery], cfg: ConsistentConfig, db: Database) -> OptionsList:
    """V(q) for every query, with exactly one database query per user.

    A coordination value is an option for q when some S tuple carries it and
    agrees with every constant q fixes for itself.
    """
    per: dict[str, list[tuple[Value, ...]]] = {}
    union: dict[tuple[Value, ...], None] = {}
    for cq in qs:
        vals = distinct_values(db, cfg.subject_relation, cfg.coord_columns, _own_filter(cq, cfg))
        per[cq.user] = vals
        for v in vals:
            union.setdefault(v, None)
    return OptionsList(per, list(union), len(qs))


@dataclass
class PrunedGraph:
    graph: graphs.CoordinationGraph
    named: dict[str, list[str]]
    friends: dict[str, list[str]]
    db_queries: int = 0
    waiting: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        # who depends on whom, for propagating removals
        for u, v in self.graph.edges:
            self.waiting.setdefault(v, []).append(u)


def pruned_graph(
    qs: Sequence[ConsistentQuery], cfg: ConsistentConfig, db: Database, options: OptionsList
) -> PrunedGraph:
    """Coordination graph restricted to satisfiable queries and genuine partners.

    An edge i -> j exists when i names j, or i asks for any friend and
    F(i, j) holds. Named partners need not be friends.
    """
    users = [cq.user for cq in qs if options.per_query.get(cq.user)]
    present = set(users)
    user_col = cfg.friends_user_column
    friend_col = 1 - user_col
    named: dict[str, list[str]] = {}
    friends: dict[str, list[str]] = {}
    edges: set[tuple[str, str]] = set()
    lookups = 0
    for cq in qs:
        if cq.user not in present:
            continue
        named[cq.user] = cq.named_partners
        for p in cq.named_partners:
            if p in present:
                edges.add((cq.user, p))
        if cq.has_wildcard:
            lookups += 1
            rows = distinct_values(db, cfg.friends_relation, [friend_col], {user_col: cq.user})
            fs = [r[0] for r in rows if r[0] in present]
            friends[cq.user] = fs
            edges.update((cq.user, f) for f in fs)
    return PrunedGraph(graphs.CoordinationGraph(tuple(users), frozenset(edges)), named, friends, lookups)


def clean(members: Iterable[str], pg: PrunedGraph) -> frozenset[str]:
    """Largest subset in which every query still has its partners.

    A query goes when a named partner is missing, or when it asks for any
    friend and none is left. Removal only ever makes this worse for others,
    so the surviving set does not depend on removal order.
    """
    alive = set(members)

    def satisfied(q: str) -> bool:
        if any(p not in alive for p in pg.named.get(q, ())):
            return False
        if q in pg.friends and not any(f in alive for f in pg.friends[q]):
            return False
        return True

    todo = sorted(alive)
    while todo:
        q = todo.pop()
        if q in alive and not satisfied(q):
            alive.discard(q)
            todo.extend(w for w in pg.waiting.get(q, ()) if w in alive)
    return frozenset(alive)


@dataclass(frozen=True)
class ConsistentResult:
    value: tuple[Value, ...]
    members: dict[str, Value]
    rows: dict[str, tuple[Value, ...]]
    friend_choice: dict[str, str]
    db_queries: int
    candidates: list[tuple[tuple[Value, ...], tuple[str, ...]]]

    def to_json(self, cfg: ConsistentConfig) -> dict:
        return {
            "value": dict(zip(cfg.coord_attributes, self.value)),
            "members": {u: str(k) for u, k in sorted(self.members.items())},
            "db_queries": self.db_queries,
        }


@dataclass
class ConsistentRun:
    result: ConsistentResult | None
    options: OptionsList
    graph: PrunedGraph
    survivors: dict[tuple[Value, ...], frozenset[str]]
    db_queries: int
    graph_ms: float


def run(
    qs: Sequence[ConsistentQuery],
    cfg: ConsistentConfig,
    db: Database,
    sel: SelectionCriterion = MAX,
    first: bool = False,
) -> ConsistentRun:
    users = [cq.user for cq in qs]
    if len(set(users)) != len(users):
        raise ValueError("each user may submit only one query")
    problems = [msg for cq in qs for msg in check_consistency(cq, cfg)]
    if problems:
        raise ValueError("inconsistent queries: " + "; ".join(problems))

    options = compute_options(qs, cfg, db)
    t0 = time.perf_counter()
    pg = pruned_graph(qs, cfg, db, options)
    graph_ms = (time.perf_counter() - t0) * 1000.0

    holders: dict[tuple[Value, ...], list[str]] = {v: [] for v in options.union}
    for u in pg.graph.vertices:
        for v in options.per_query[u]:
            holders[v].append(u)

    survivors: dict[tuple[Value, ...], frozenset[str]] = {}
    candidates: list[Candidate] = []
    for v in options.union:
        alive = clean(holders[v], pg)
        survivors[v] = alive
        if alive:
            candidates.append(Candidate(alive, v))
            if first:
                break

    db_queries = options.db_queries + pg.db_queries
    chosen = sel.choose(candidates)
    result = None
    if chosen is not None:
        v = chosen.tag
        by_user = {cq.user: cq for cq in qs}
        members: dict[str, Value] = {}
        rows: dict[str, tuple[Value, ...]] = {}
        for u in sorted(chosen.members):
            row = _ground_own(by_user[u], cfg, db, v)
            db_queries += 1
            rows[u] = row
            members[u] = row[cfg.key_column]
        choice = {u: next(f for f in pg.friends[u] if f in chosen.members) for u in chosen.members if u in pg.friends}
        result = ConsistentResult(
            v, members, rows, choice, db_queries, [(c.tag, c.sorted_names) for c in candidates]
        )
    return ConsistentRun(result, options, pg, survivors, db_queries, graph_ms)


def _ground_own(cq: ConsistentQuery, cfg: ConsistentConfig, db: Database, v: tuple[Value, ...]) -> tuple[Value, ...]:
    terms = cq.own_terms(cfg)
    for a, val in zip(cfg.coord_attributes, v):
        terms[cfg.attributes.index(a)] = Const(val)
    key = Var("x", cq.query_name)
    a = _subject_atom(cfg, key, terms)
    g = first_grounding(db, [a])
    if g is None:
        raise RuntimeError(f"{cq.user}: no tuple for option {v}; the database changed?")
    return tuple(g.term(t).value for t in a.args)


def evaluate(
    qs: Sequence[ConsistentQuery],
    cfg: ConsistentConfig,
    db: Database,
    sel: SelectionCriterion = MAX,
    first: bool = False,
) -> ConsistentResult | None:
    """Pick a coordination value and the largest set of users who can all agree on it.

    Every value in the options list is tried unless ``first`` is set, in which
    case the first value leaving a nonempty set wins.
    """
    return run(qs, cfg, db, sel, first).result


def witness(result: ConsistentResult, qs: Sequence[ConsistentQuery], cfg: ConsistentConfig) -> Substitution:
    """A ground assignment for the entangled translations of the members.

    Lets the generic coordinating-set checker confirm the result.
    """
    by_user = {cq.user: cq for cq in qs}
    out: dict[Var, Term] = {}

    def bind(atom: Atom, row: tuple[Value, ...]) -> None:
        for t, val in zip(atom.args, row):
            if isinstance(t, Var):
                out[t] = Const(val)

    for u in result.members:
        cq = by_user[u]
        eq = to_entangled(cq, cfg)
        offset = 0
        if cq.has_wildcard:
            out[Var("f", cq.query_name)] = Const(result.friend_choice[u])
            offset = 1
        bind(eq.body[offset], result.rows[u])
        offset += 1
        for i, p in enumerate(cq.partners):
            partner = result.friend_choice[u] if p is WILDCARD else p
            bind(eq.body[offset + i], result.rows[partner])
    return Substitution(out)


def load_queries(data: Iterable[Mapping]) -> list[ConsistentQuery]:
    return [ConsistentQuery.from_json(d) for d in data]

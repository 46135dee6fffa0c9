"""Small random instances shared by the property and acceptance tests."""

from __future__ import annotations

import random

from entangled import graphs
from entangled.consistent_coord import WILDCARD, ConsistentConfig, ConsistentQuery
from entangled.eql import EntangledQuery, QuerySet
from entangled.relstore import Database, Relation
from entangled.terms import Atom, Const, Var

VALUES = (1, 2, 3)


def random_db(rng: random.Random, max_tuples: int = 8) -> Database:
    n = rng.randint(0, max_tuples)
    t_rows = {(rng.choice(VALUES), rng.choice(VALUES)) for _ in range(n)}
    u_rows = {(rng.choice(VALUES),) for _ in range(rng.randint(0, 3))}
    rows = sorted(t_rows)[: max(0, max_tuples - len(u_rows))]
    return Database(
        [
            Relation("T", 2, tuple(rows), types=("int", "int")),
            Relation("U", 1, tuple(sorted(u_rows)), types=("int",)),
        ]
    )


def _term(rng: random.Random, pool: list[Var]):
    if rng.random() < 0.75:
        return rng.choice(pool)
    return Const(rng.choice(VALUES))


def random_query(rng: random.Random, i: int, n: int) -> EntangledQuery:
    name = f"q{i}"
    pool = [Var(v, name) for v in ("x", "y", "z")[: rng.randint(1, 3)]]
    own_tag = f"Q{i}" if rng.random() < 0.85 else f"Q{rng.randrange(n)}"
    heads = [Atom("R", (Const(own_tag), _term(rng, pool)))]
    if rng.random() < 0.2:
        heads.append(Atom("P", (_term(rng, pool),)))
    posts = []
    for _ in range(rng.choice((0, 1, 1, 1, 2))):
        if rng.random() < 0.85:
            posts.append(Atom("R", (Const(f"Q{rng.randrange(n)}"), _term(rng, pool))))
        else:
            posts.append(Atom("P", (_term(rng, pool),)))
    body = []
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.7:
            body.append(Atom("T", (_term(rng, pool), _term(rng, pool))))
        else:
            body.append(Atom("U", (_term(rng, pool),)))
    return EntangledQuery(name, posts, heads, body)


def random_safe_instance(rng: random.Random, max_queries: int = 6) -> tuple[QuerySet, Database]:
    """Rejection-sample a safe query set with at most ``max_queries`` queries."""
    while True:
        n = rng.randint(1, max_queries)
        qs = QuerySet(random_query(rng, i, n) for i in range(n))
        if not graphs.check_safety(graphs.build_extended(qs)):
            return qs, random_db(rng)


USERS = ("Ann", "Bob", "Cy", "Dee")
CITIES = ("Oslo", "Rome")
DAYS = (1, 2)


def random_consistent_instance(
    rng: random.Random, max_users: int = 4, max_tuples: int = 6
) -> tuple[list[ConsistentQuery], ConsistentConfig, Database]:
    """Consistent queries over ``S(id, city, day)`` and a friends table ``F(user, friend)``."""
    coord = rng.choice((("city",), ("day",), ("city", "day")))
    cfg = ConsistentConfig("S", 0, ("city", "day"), coord, "F", friends_user_column=0)
    rows = tuple((k, rng.choice(CITIES), rng.choice(DAYS)) for k in range(1, rng.randint(1, max_tuples) + 1))
    users = list(USERS[: rng.randint(1, max_users)])
    friends = sorted({(rng.choice(users), rng.choice(users)) for _ in range(rng.randint(0, 2 * len(users)))})
    db = Database(
        [
            Relation("S", 3, rows, key_column=0, types=("int", "str", "int"), columns=("id", "city", "day")),
            Relation("F", 2, tuple(friends), types=("str", "str"), columns=("user", "friend")),
        ]
    )
    queries = []
    for u in users:
        own = {}
        if rng.random() < 0.5:
            own["city"] = rng.choice(CITIES)
        if rng.random() < 0.4:
            own["day"] = rng.choice(DAYS)
        # named partners may include someone who never submits a query
        names = [p for p in (*users, "Eve") if rng.random() < 0.25][:2]
        partners = names + ([WILDCARD] if rng.random() < 0.5 else [])
        queries.append(ConsistentQuery.simple(u, own, partners))
    return queries, cfg, db

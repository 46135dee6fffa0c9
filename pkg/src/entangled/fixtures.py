"""Worked examples: flight-hotel, band trip, six-query DAG, and the movies outing."""

from __future__ import annotations

from entangled.eql import QuerySet, parse
from entangled.relstore import Database, Relation

FLIGHT_HOTEL = """\
# Chris, Guy, Jonny and Will book flights (F) and hotels (H) together.
@qC {R(G, x1)} R(C, x1), Q(C, x2) :- F(x1, x), H(x2, x).
@qG {R(C, y1), Q(C, y2)} R(G, y1), Q(G, y2) :- F(y1, Paris), H(y2, Paris).
@qJ {R(C, z1), R(G, z1)} R(J, z1), Q(J, z2) :- F(z1, Athens), H(z2, Athens).
@qW {R(C, w1), Q(J, w2)} R(W, w1), Q(W, w2) :- F(w1, Madrid), H(w2, Madrid).
"""


def flight_hotel() -> QuerySet:
    return parse(FLIGHT_HOTEL)


def flight_hotel_db(rows: dict | None = None) -> Database:
    """Flights and hotels keyed on their ids; Paris-only by default."""
    rows = rows or {"F": [(7, "Paris")], "H": [(3, "Paris")]}
    return Database(
        [
            Relation("F", 2, tuple(rows["F"]), key_column=0, types=("int", "str")),
            Relation("H", 2, tuple(rows["H"]), key_column=0, types=("int", "str")),
        ]
    )


BAND = ("Chris", "Guy", "Jonny", "Will")


def band_trip(with_gwyneth: bool = False) -> QuerySet:
    """Each band member names the other three; Gwyneth optionally names Chris."""
    lines = []
    for me in BAND:
        posts = ", ".join(f"R({other}, x)" for other in BAND if other != me)
        lines.append(f"@{me.lower()} {{{posts}}} R({me}, x) :- Flights(x, Zurich).")
    if with_gwyneth:
        lines.append("@gwyneth {R(Chris, x)} R(Gwyneth, x) :- Flights(x, Zurich).")
    return parse("\n".join(lines))


def zurich_db() -> Database:
    return Database([Relation("Flights", 2, ((101, "Zurich"),), key_column=0, types=("int", "str"))])


SIX_QUERY_DAG = """\
# {q1,q2} is a sink; {q3,q4} and {q5,q6} both depend on it and not on each other.
@q1 {P(Q2, x)} P(Q1, x) :- T(x).
@q2 {P(Q1, x)} P(Q2, x) :- T(x).
@q3 {P(Q4, x), P(Q1, y)} P(Q3, x) :- T(x), T(y).
@q4 {P(Q3, x)} P(Q4, x) :- T(x).
@q5 {P(Q6, x), P(Q2, y)} P(Q5, x) :- T(x), T(y).
@q6 {P(Q5, x)} P(Q6, x) :- T(x).
"""


def six_query_dag() -> QuerySet:
    return parse(SIX_QUERY_DAG)


def six_query_db() -> Database:
    return Database([Relation("T", 1, ((1,), (2,)), types=("int",))])


# -- movies (consistent coordination) ---------------------------------------

MOVIES = (
    (1, "Regal", "Contagion"),
    (2, "AMC", "Project X"),
    (3, "Regal", "Hugo"),
    (4, "AMC", "Hugo"),
    (5, "Cinemark", "Hugo"),
)

# (friend, user): the friends table is read as C(f, User).
FRIENDS = {
    "Chris": ("Jonny", "Guy"),
    "Guy": ("Chris", "Jonny"),
    "Jonny": ("Chris", "Will"),
    "Will": ("Chris", "Guy"),
}


def movies_db() -> Database:
    friend_rows = tuple((f, user) for user, fs in FRIENDS.items() for f in fs)
    return Database(
        [
            Relation("M", 3, MOVIES, key_column=0, types=("int", "str", "str"),
                     columns=("movie_id", "cinema", "movie")),
            Relation("C", 2, friend_rows, types=("str", "str"), columns=("friend", "user")),
        ]
    )


def movies_config():
    from entangled.consistent_coord import ConsistentConfig

    return ConsistentConfig(
        subject_relation="M",
        key_column=0,
        attributes=("cinema", "movie"),
        coord_attributes=("cinema",),
        friends_relation="C",
        friends_user_column=1,
    )


def movies_queries():
    from entangled.consistent_coord import WILDCARD, ConsistentQuery

    return [
        ConsistentQuery.simple("Chris", {"cinema": "Regal", "movie": "Contagion"}, ["Will"]),
        ConsistentQuery.simple("Guy", {"cinema": "AMC", "movie": "Project X"}, [WILDCARD]),
        ConsistentQuery.simple("Jonny", {"movie": "Hugo"}, [WILDCARD]),
        ConsistentQuery.simple("Will", {"movie": "Hugo"}, [WILDCARD]),
    ]

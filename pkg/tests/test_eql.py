from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entangled import fixtures
from entangled.eql import (
    EntangledQuery,
    EqlSyntaxError,
    QuerySet,
    format_queries,
    format_query,
    parse,
    rename_apart,
    validate,
)
from entangled.terms import Atom, Const, Var, atom


def test_parse_single_query():
    (q,) = parse("@q1 {R(Chris,x)} R(Gwyneth,x) :- Flights(x,Zurich).")
    x = Var("x", "q1")
    assert q.name == "q1"
    assert q.post == (atom("R", "Chris", x),)
    assert q.heads == (atom("R", "Gwyneth", x),)
    assert q.body == (atom("Flights", x, "Zurich"),)


def test_empty_postconditions():
    (q,) = parse("@q2 {} R(Chris,y) :- Flights(y,Zurich).")
    assert q.post == ()
    assert len(q.heads) == 1


def test_constants_and_comments():
    (q,) = parse("# leading comment\n@q {P(-3, 'Project X')} P(1, Paris) :- T(x). # trailing")
    assert q.post[0].args == (Const(-3), Const("Project X"))
    assert q.heads[0].args == (Const(1), Const("Paris"))
    (q,) = parse(r"@q {} P('it\'s') :- .")
    assert q.heads[0].args == (Const("it's"),)


@pytest.mark.parametrize(
    "text",
    [
        "@bad {R(x} :- .",
        "@q {} :- T(x).",
        "@q {} R(x) T(x).",
        "@q {} R(x) :- T(x)",
        "q {} R(x) :- T(x).",
        "@q {} R(x) :- T(x, ).",
        "@q {} R(x) :- T(x) & U(x).",
    ],
)
def test_syntax_errors(text):
    with pytest.raises(EqlSyntaxError):
        parse(text)


def test_error_position():
    with pytest.raises(EqlSyntaxError) as err:
        parse("@ok {} R(x) :- T(x).\n@bad {R(x} :- .")
    assert err.value.line == 2
    assert err.value.column == 10


def test_duplicate_name_and_arity():
    with pytest.raises(EqlSyntaxError, match="duplicate"):
        parse("@q {} R(x) :- T(x).\n@q {} R(y) :- T(y).")
    with pytest.raises(EqlSyntaxError, match="arity"):
        parse("@a {} R(x) :- T(x).\n@b {} R(x, y) :- T(x).")


def test_empty_heads_need_flag():
    text = "@f {R1(0)} :- ."
    with pytest.raises(EqlSyntaxError):
        parse(text)
    (q,) = parse(text, allow_empty_heads=True)
    assert q.heads == () and q.body == ()


def test_flight_hotel_validates():
    qs = fixtures.flight_hotel()
    assert validate(qs, fixtures.flight_hotel_db()) == []


def test_validate_diagnostics():
    db = fixtures.zurich_db()
    qs = parse("@a {} R(x) :- R(x).\n@b {} Flights(x, Zurich) :- Flights(x, Zurich).\n@c {Flights(y, Zurich)} S(y) :- Flights(y, Zurich).")
    diags = validate(qs, db)
    assert any("answer relation in body" in d for d in diags)
    assert any("schema relation in head" in d for d in diags)
    assert any("schema relation in postcondition" in d for d in diags)
    assert any("empty head" in d for d in validate(parse("@e {} :- .", True), db))
    assert validate(parse("@e {} :- .", True), db, allow_empty_heads=True) == []


def test_rename_apart():
    q1 = EntangledQuery("q1", [], [atom("R", Var("x"))], [atom("T", Var("x"))])
    q2 = EntangledQuery("q2", [], [atom("S", Var("x"))], [atom("T", Var("x"))])
    qs = rename_apart(QuerySet([q1, q2]))
    assert qs["q1"].variables() == [Var("x", "q1")]
    assert qs["q2"].variables() == [Var("x", "q2")]
    assert rename_apart(qs) == qs


def test_flight_hotel_variables():
    qs = rename_apart(fixtures.flight_hotel())
    keys = sorted(v.key for q in qs for v in q.variables())
    assert keys == sorted(
        ["qC::x1", "qC::x2", "qC::x", "qG::y1", "qG::y2", "qJ::z1", "qJ::z2", "qW::w1", "qW::w2"]
    )


def test_fixture_round_trips():
    qs = fixtures.flight_hotel()
    assert parse(format_queries(qs)) == qs


# -- printer/parser round trip on random queries ---------------------------

idents = st.from_regex(r"[a-z][a-z0-9_]{0,4}", fullmatch=True)
const_values = st.one_of(
    st.integers(-50, 50),
    st.from_regex(r"[A-Z][A-Za-z0-9_]{0,4}", fullmatch=True),
    st.text(st.sampled_from("ab '\\*-"), max_size=5),
)


@st.composite
def query_sets(draw):
    n = draw(st.integers(1, 4))
    names = draw(st.lists(idents, min_size=n, max_size=n, unique=True))
    arity = {"R": 2, "S": 1, "T": 2, "U": 1}
    queries = []
    for name in names:
        def atoms(rels, lo, hi):
            out = []
            for rel in draw(st.lists(st.sampled_from(rels), min_size=lo, max_size=hi)):
                args = [
                    draw(st.one_of(idents.map(lambda v: Var(v, name)), const_values.map(Const)))
                    for _ in range(arity[rel])
                ]
                out.append(Atom(rel, args))
            return out

        queries.append(EntangledQuery(name, atoms("RS", 0, 2), atoms("RS", 1, 2), atoms("TU", 0, 3)))
    return QuerySet(queries)


@given(query_sets())
def test_print_parse_round_trip(qs):
    text = format_queries(qs)
    assert parse(text) == qs
    assert format_queries(parse(text)) == text


@given(query_sets())
def test_variables_never_shared_between_queries(qs):
    seen = {}
    for q in rename_apart(qs):
        for v in q.variables():
            assert seen.setdefault(v, q.name) == q.name


def test_format_query_shape():
    (q,) = parse("@q {} R(C, x) :- F(x, 'Project X').")
    assert format_query(q) == "@q {} R(C, x) :- F(x, 'Project X')."

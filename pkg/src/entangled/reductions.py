"""3-CNF formulas compiled into entangled-query instances.

Three constructions:

* ``gen_theorem1``: deciding whether any coordinating set exists is as hard
  as SAT, over a database holding only ``D = {0, 1}``.
* ``gen_theorem2``: a *safe* instance whose largest coordinating set has
  ``k + m`` queries iff the formula is satisfiable.
* ``gen_appendixB``: consistent-looking queries that coordinate on different
  attribute sets; a coordinating set exists iff the formula is satisfiable.

Variables are numbered from 1, literals are ``(var, polarity)`` pairs.
"""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from entangled.eql import EntangledQuery, QuerySet
from entangled.relstore import Database, Relation
from entangled.terms import Atom, Const, Substitution, Var

Literal = tuple[int, bool]


@dataclass(frozen=True)
class Cnf3:
    num_vars: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[Literal]]):
        cl = tuple(tuple((int(v), bool(p)) for v, p in c) for c in clauses)
        for c in cl:
            if len(c) != 3:
                raise ValueError(f"clause {c} does not have exactly 3 literals")
            for v, _ in c:
                if not 1 <= v <= num_vars:
                    raise ValueError(f"variable {v} outside 1..{num_vars}")
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "clauses", cl)

    @property
    def k(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, h: Mapping[int, bool]) -> bool:
        return all(any(h[v] == p for v, p in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {self.k}"]
        for c in self.clauses:
            lines.append(" ".join(str(v if p else -v) for v, p in c) + " 0")
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return " & ".join(
            "(" + " | ".join(("" if p else "~") + f"x{v}" for v, p in c) + ")" for c in self.clauses
        )


def parse_dimacs(text: str) -> Cnf3:
    """Read DIMACS CNF. Clauses with fewer than 3 literals are padded by repeating literals."""
    num_vars = None
    clauses: list[tuple[Literal, ...]] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ValueError(f"bad problem line: {raw!r}")
            num_vars = int(fields[2])
            continue
        for tok in line.split():
            n = int(tok)
            if n == 0:
                clauses.append(_pad(current))
                current = []
            else:
                current.append(n)
    if current:
        clauses.append(_pad(current))
    if num_vars is None:
        num_vars = max((abs(v) for c in clauses for v, _ in c), default=0)
    return Cnf3(num_vars, clauses)


def _pad(lits: list[int]) -> tuple[Literal, ...]:
    if not lits:
        raise ValueError("empty clause")
    if len(set(lits)) > 3:
        raise ValueError(f"clause {lits} has more than 3 distinct literals")
    # drop exact repeats, then cycle to length 3
    uniq = list(dict.fromkeys(lits))
    padded = [uniq[i % len(uniq)] for i in range(3)]
    return tuple((abs(n), n > 0) for n in padded)


def load_dimacs(path: str | Path) -> Cnf3:
    return parse_dimacs(Path(path).read_text())


def random_cnf(num_vars: int, num_clauses: int, rng: random.Random) -> Cnf3:
    return Cnf3(
        num_vars,
        [
            tuple((rng.randint(1, num_vars), rng.random() < 0.5) for _ in range(3))
            for _ in range(num_clauses)
        ],
    )


def all_clauses(num_vars: int) -> list[tuple[Literal, Literal, Literal]]:
    """Every clause over ``num_vars`` variables as a sorted multiset of 3 literals."""
    lits = [(v, p) for v in range(1, num_vars + 1) for p in (False, True)]
    return list(itertools.combinations_with_replacement(lits, 3))


def all_formulas(num_vars: int, max_clauses: int) -> Iterator[Cnf3]:
    """Every formula with 1..max_clauses clauses, clauses taken as a multiset."""
    cl = all_clauses(num_vars)
    for k in range(1, max_clauses + 1):
        for combo in itertools.combinations_with_replacement(cl, k):
            yield Cnf3(num_vars, combo)


def brute_force_sat(f: Cnf3) -> dict[int, bool] | None:
    """First satisfying assignment in binary counting order, or None."""
    for bits in itertools.product((False, True), repeat=f.num_vars):
        h = {i + 1: b for i, b in enumerate(bits)}
        if f.satisfied_by(h):
            return h
    return None


def _truth_db() -> Database:
    return Database([Relation("D", 1, ((0,), (1,)), types=("int",))])


def _a(rel: str, *args) -> Atom:
    return Atom(rel, [a if isinstance(a, (Var, Const)) else Const(a) for a in args])


def _dedup(atoms: Iterable[Atom]) -> list[Atom]:
    return list(dict.fromkeys(atoms))


# -- first construction ------------------------------------------------------

CLAUSE_QUERY = "clause"


def t1_val(i: int) -> str:
    return f"x{i}_val"


def t1_true(i: int) -> str:
    return f"x{i}_true"


def t1_false(i: int) -> str:
    return f"x{i}_false"


def gen_theorem1(f: Cnf3) -> tuple[QuerySet, Database]:
    """Clause query, plus a value, a true and a false query per variable.

    The clause query needs every ``C_j(1)``; ``x_i``'s true query offers
    ``C_j(1)`` for each clause where ``x_i`` occurs positively and needs
    ``R_i(1)`` from the value query, which can only give one of 0 and 1.
    A variable occurring with one polarity only gets a query with no heads.
    """
    qs = [EntangledQuery(CLAUSE_QUERY, _dedup(_a(f"C{j + 1}", 1) for j in range(f.k)), [_a("C", 1)], [])]
    for i in range(1, f.num_vars + 1):
        x = Var("x", t1_val(i))
        qs.append(EntangledQuery(t1_val(i), [_a("C", 1)], [_a(f"R{i}", x)], [_a("D", x)]))
        for name, pol in ((t1_true(i), True), (t1_false(i), False)):
            heads = _dedup(_a(f"C{j + 1}", 1) for j, c in enumerate(f.clauses) if (i, pol) in c)
            qs.append(EntangledQuery(name, [_a(f"R{i}", int(pol))], heads, []))
    return QuerySet(qs), _truth_db()


def assignment_to_set(f: Cnf3, h: Mapping[int, bool]) -> tuple[frozenset[str], Substitution]:
    """The coordinating set a satisfying assignment picks out, with its variable values."""
    if not f.satisfied_by(h):
        raise ValueError("assignment does not satisfy the formula")
    names = {CLAUSE_QUERY}
    sub: dict[Var, Const] = {}
    for i in range(1, f.num_vars + 1):
        names.add(t1_val(i))
        names.add(t1_true(i) if h[i] else t1_false(i))
        sub[Var("x", t1_val(i))] = Const(int(h[i]))
    return frozenset(names), Substitution(sub)


def set_to_assignment(f: Cnf3, members: Iterable[str]) -> dict[int, bool]:
    """Read a truth assignment off a coordinating set of the first construction."""
    members = set(members)
    if CLAUSE_QUERY not in members:
        raise ValueError("a coordinating set of this instance always contains the clause query")
    h = {}
    for i in range(1, f.num_vars + 1):
        t, fl = t1_true(i) in members, t1_false(i) in members
        assert not (t and fl), f"x{i}: true and false queries cannot coordinate together"
        h[i] = not fl
    return h


# -- second construction -----------------------------------------------------


def t2_var(j: int) -> str:
    return f"v{j}"


def t2_lit(i: int, pos: int) -> str:
    return f"c{i}_{pos}"


def gen_theorem2(f: Cnf3) -> tuple[QuerySet, Database]:
    """Value query per variable, three literal queries per clause.

    The query for the n-th literal of a clause also needs the earlier
    literals of that clause to be false, so at most one query per clause can
    join a coordinating set. Every postcondition has exactly one candidate
    head, the value query of its variable, so the set is safe.
    """
    qs = []
    for j in range(1, f.num_vars + 1):
        x = Var("x", t2_var(j))
        qs.append(EntangledQuery(t2_var(j), [], [_a(f"R{j}", x)], [_a("D", x)]))
    for i, clause in enumerate(f.clauses, start=1):
        for n in range(3):
            v, p = clause[n]
            posts = [_a(f"R{v}", int(p))]
            posts += [_a(f"R{w}", int(not q)) for w, q in reversed(clause[:n])]
            qs.append(EntangledQuery(t2_lit(i, n + 1), _dedup(posts), [_a(f"C{i}", 1)], []))
    return QuerySet(qs), _truth_db()


def theorem2_witness(f: Cnf3, h: Mapping[int, bool]) -> frozenset[str]:
    """A coordinating set of size k + m built from a satisfying assignment."""
    if not f.satisfied_by(h):
        raise ValueError("assignment does not satisfy the formula")
    names = {t2_var(j) for j in range(1, f.num_vars + 1)}
    for i, clause in enumerate(f.clauses, start=1):
        n = next(n for n, (v, p) in enumerate(clause) if h[v] == p)
        names.add(t2_lit(i, n + 1))
    return frozenset(names)


# -- mixed coordination attributes ------------------------------------------

DAY1, DAY2 = "1MAR", "2MAR"


def lit_const(v: int, positive: bool) -> str:
    return f"X{v}" if positive else f"X{v}*"


def gen_appendixB(f: Cnf3) -> tuple[QuerySet, Database]:
    """Flights-and-friends instance where literal queries fly on different days.

    ``qC`` needs every clause user on day 1. Clause user ``C_j`` needs one
    friend, and its friends are the literals satisfying it. The positive and
    negative literal of ``x_i`` fly on day 1 and day 2 and both need ``S_i``,
    whose single flight can only be on one of the days.
    """
    qs = []
    x, ys = Var("x", "qC"), [Var(f"y{j}", "qC") for j in range(1, f.k + 1)]
    qs.append(
        EntangledQuery(
            "qC",
            [_a("R", y, f"C{j}") for j, y in enumerate(ys, start=1)],
            [_a("R", x, "C")],
            [_a("Fl", x, DAY1)] + [_a("Fl", y, DAY1) for y in ys],
        )
    )
    for j in range(1, f.k + 1):
        n = f"qC{j}"
        x, y, fr, d = Var("x", n), Var("y", n), Var("f", n), Var("d", n)
        qs.append(
            EntangledQuery(
                n,
                [_a("R", y, fr)],
                [_a("R", x, f"C{j}")],
                [_a("Fr", f"C{j}", fr), _a("Fl", x, DAY1), _a("Fl", y, d)],
            )
        )
    for i in range(1, f.num_vars + 1):
        for n, lit, day in ((f"qX{i}", lit_const(i, True), DAY1), (f"qX{i}s", lit_const(i, False), DAY2)):
            x, y = Var("x", n), Var("y", n)
            qs.append(
                EntangledQuery(n, [_a("R", y, f"S{i}")], [_a("R", x, lit)], [_a("Fl", x, day), _a("Fl", y, day)])
            )
        n = f"S{i}"
        x, y, d, d2 = Var("x", n), Var("y", n), Var("d", n), Var("e", n)
        qs.append(EntangledQuery(n, [_a("R", y, "C")], [_a("R", x, n)], [_a("Fl", x, d), _a("Fl", y, d2)]))

    fr_rows = tuple(
        dict.fromkeys((f"C{j}", lit_const(v, p)) for j, c in enumerate(f.clauses, start=1) for v, p in c)
    )
    db = Database(
        [
            Relation("Fl", 2, ((1, DAY1), (2, DAY2)), key_column=0, types=("int", "str"), columns=("flight", "date")),
            Relation("Fr", 2, fr_rows, types=("str", "str"), columns=("user", "friend")),
        ]
    )
    return QuerySet(qs), db


GENERATORS = {"thm1": gen_theorem1, "thm2": gen_theorem2, "appB": gen_appendixB}

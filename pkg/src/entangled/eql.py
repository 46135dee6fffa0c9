"""Entangled queries: syntax tree, ``.eql`` parser, canonical printer, validator.

Concrete syntax, one query per statement::

    # Gwyneth flies with Chris
    @q1 {R(Chris, x)} R(Gwyneth, x) :- Flights(x, Zurich).

Identifiers starting with a lowercase letter are variables. Capitalised
identifiers, integers and single-quoted strings are constants.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from entangled.terms import Atom, Const, Term, Var, atoms_variables

_BARE_CONST = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


class EqlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class EntangledQuery:
    name: str
    post: tuple[Atom, ...]
    heads: tuple[Atom, ...]
    body: tuple[Atom, ...]

    def __init__(self, name: str, post: Iterable[Atom], heads: Iterable[Atom], body: Iterable[Atom]):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "post", tuple(post))
        object.__setattr__(self, "heads", tuple(heads))
        object.__setattr__(self, "body", tuple(body))

    def atoms(self) -> Iterator[Atom]:
        yield from self.post
        yield from self.heads
        yield from self.body

    def variables(self) -> list[Var]:
        return atoms_variables(self.atoms())

    def __str__(self) -> str:
        return format_query(self)


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[EntangledQuery, ...]
    _by_name: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, queries: Iterable[EntangledQuery]):
        qs = tuple(queries)
        by_name: dict[str, EntangledQuery] = {}
        for q in qs:
            if q.name in by_name:
                raise ValueError(f"duplicate query name {q.name!r}")
            by_name[q.name] = q
        object.__setattr__(self, "queries", qs)
        object.__setattr__(self, "_by_name", by_name)

    def __iter__(self) -> Iterator[EntangledQuery]:
        return iter(self.queries)

    def __len__(self) -> int:
        return len(self.queries)

    def __getitem__(self, name: str) -> EntangledQuery:
        return self._by_name[name]

    def __contains__(self, name: object) -> bool:
        return name in self._by_name

    @property
    def names(self) -> list[str]:
        return [q.name for q in self.queries]

    def subset(self, names: Iterable[str]) -> QuerySet:
        keep = set(names)
        return QuerySet(q for q in self.queries if q.name in keep)

    def __str__(self) -> str:
        return format_queries(self)


# -- printing ---------------------------------------------------------------


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    v = t.value
    if isinstance(v, int):
        return str(v)
    if _BARE_CONST.match(v):
        return v
    return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_atom(a: Atom) -> str:
    return f"{a.relation}({', '.join(format_term(t) for t in a.args)})"


def _format_atoms(atoms: Sequence[Atom]) -> str:
    return ", ".join(format_atom(a) for a in atoms)


def format_query(q: EntangledQuery) -> str:
    parts = [f"@{q.name}", f"{{{_format_atoms(q.post)}}}"]
    if q.heads:
        parts.append(_format_atoms(q.heads))
    parts.append(":-")
    if q.body:
        parts.append(_format_atoms(q.body))
    return " ".join(parts) + "."


def format_queries(qs: Iterable[EntangledQuery]) -> str:
    return "".join(format_query(q) + "\n" for q in qs)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<neck>:-)
  | (?P<punct>[@{}(),.])
  | (?P<int>-?[0-9]+)
  | (?P<str>'(?:[^'\\\n]|\\.)*')
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise EqlSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            val = m.group()
            toks.append(_Tok("punct" if kind == "neck" else kind, val, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, allow_empty_heads: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_empty_heads = allow_empty_heads
        self.scope = ""

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> EqlSyntaxError:
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return EqlSyntaxError(f"{msg}, found {found!r}", tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != text:
            raise self.error(f"expected {text!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def queries(self) -> list[tuple[EntangledQuery, _Tok]]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.query())
        return out

    def query(self) -> tuple[EntangledQuery, _Tok]:
        start = self.expect("@")
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error("expected query name")
        self.i += 1
        name = tok.text
        self.scope = name
        self.expect("{")
        post = [] if self.at("}") else self.atoms()
        self.expect("}")
        if self.at(":-"):
            if not self.allow_empty_heads:
                raise self.error("expected head atom")
            heads = []
        else:
            heads = self.atoms()
        self.expect(":-")
        body = [] if self.at(".") else self.atoms()
        self.expect(".")
        return EntangledQuery(name, post, heads, body), start

    def atoms(self) -> list[Atom]:
        out = [self.atom()]
        while self.at(","):
            self.i += 1
            out.append(self.atom())
        return out

    def atom(self) -> Atom:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error("expected relation name")
        self.i += 1
        self.expect("(")
        args = [self.term()]
        while self.at(","):
            self.i += 1
            args.append(self.term())
        self.expect(")")
        return Atom(tok.text, args)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident":
            self.i += 1
            if tok.text[0].islower():
                return Var(tok.text, self.scope)
            return Const(tok.text)
        if tok.kind == "int":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "str":
            self.i += 1
            return Const(re.sub(r"\\(.)", r"\1", tok.text[1:-1]))
        raise self.error("expected term")


def parse(text: str, allow_empty_heads: bool = False) -> QuerySet:
    """Parse ``.eql`` text; variables are scoped by their enclosing query's name.

    ``allow_empty_heads`` accepts ``{...} :- body.`` statements, which the
    3SAT reduction generators emit.
    """
    parser = _Parser(text, allow_empty_heads)
    parsed = parser.queries()
    seen: dict[str, _Tok] = {}
    arity: dict[str, tuple[int, str]] = {}
    for q, tok in parsed:
        if q.name in seen:
            raise EqlSyntaxError(f"duplicate query name {q.name!r}", tok.line, tok.col)
        seen[q.name] = tok
        for a in q.atoms():
            prev = arity.setdefault(a.relation, (a.arity, q.name))
            if prev[0] != a.arity:
                raise EqlSyntaxError(
                    f"relation {a.relation} used with arity {a.arity} in {q.name} "
                    f"but arity {prev[0]} in {prev[1]}",
                    tok.line,
                    tok.col,
                )
    return QuerySet(q for q, _ in parsed)


def parse_file(path, allow_empty_heads: bool = False) -> QuerySet:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), allow_empty_heads)


# -- validation and scoping -------------------------------------------------


def validate(qs: QuerySet, schema, allow_empty_heads: bool = False) -> list[str]:
    """Check the syntactic restrictions on entangled queries against a schema.

    ``schema`` is anything with ``in`` over relation names (a Database works).
    Returns human-readable diagnostics; an empty list means the set is valid.
    """
    diags: list[str] = []
    arities: dict[str, int] = {}
    for q in qs:
        if not q.heads and not allow_empty_heads:
            diags.append(f"{q.name}: empty head list")
        for a in q.body:
            if a.relation not in schema:
                diags.append(f"{q.name}: answer relation in body: {a}")
            elif hasattr(schema, "relation") and schema.relation(a.relation).arity != a.arity:
                diags.append(f"{q.name}: {a} does not match arity {schema.relation(a.relation).arity}")
        for kind, atoms in (("head", q.heads), ("postcondition", q.post)):
            for a in atoms:
                if a.relation in schema:
                    diags.append(f"{q.name}: schema relation in {kind}: {a}")
        for a in q.atoms():
            if arities.setdefault(a.relation, a.arity) != a.arity:
                diags.append(f"{q.name}: inconsistent arity for {a.relation}: {a}")
    return diags


def _rescope(t: Term, scope: str) -> Term:
    if isinstance(t, Var) and t.scope != scope:
        return Var(t.name, scope)
    return t


def rename_apart(qs: QuerySet) -> QuerySet:
    """Tag every variable with its query's name, so no two queries share one."""
    out = []
    for q in qs:
        def fix(a: Atom, scope=q.name) -> Atom:
            return Atom(a.relation, (_rescope(t, scope) for t in a.args))

        out.append(EntangledQuery(q.name, map(fix, q.post), map(fix, q.heads), map(fix, q.body)))
    return QuerySet(out)

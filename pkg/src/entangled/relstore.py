"""In-memory relational store with conjunctive-query evaluation.

Evaluation is a backtracking nested-loop join: atoms are matched left to
right, bindings flow forward, and tuples are tried in load order. A key
column, when declared, gets a hash index; nothing else is indexed.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

from entangled.terms import Atom, Const, Substitution, Term, Value, Var, value_key

COLUMN_TYPES = ("int", "str")


class SchemaError(ValueError):
    """Unknown relation or column, or an atom of the wrong arity."""


class LoadError(ValueError):
    """A manifest or data file violates the declared schema."""


class LimitExceeded(RuntimeError):
    """More groundings exist than the caller allowed for."""

    def __init__(self, limit: int):
        super().__init__(f"more than {limit} groundings")
        self.limit = limit


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: tuple[tuple[Value, ...], ...]
    key_column: int | None = None
    types: tuple[str, ...] | None = None
    columns: tuple[str, ...] | None = None
    _members: frozenset = field(init=False, repr=False, compare=False)
    _key_index: Mapping = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise LoadError(f"{self.name}: arity must be positive")
        if self.types is not None:
            if len(self.types) != self.arity:
                raise LoadError(f"{self.name}: {len(self.types)} types for arity {self.arity}")
            for t in self.types:
                if t not in COLUMN_TYPES:
                    raise LoadError(f"{self.name}: unknown column type {t!r}")
        if self.columns is not None and len(self.columns) != self.arity:
            raise LoadError(f"{self.name}: {len(self.columns)} column names for arity {self.arity}")
        if self.key_column is not None and not 0 <= self.key_column < self.arity:
            raise LoadError(f"{self.name}: key column {self.key_column} out of range")

        deduped: dict[tuple[Value, ...], None] = {}
        for row in self.tuples:
            row = tuple(row)
            if len(row) != self.arity:
                raise LoadError(f"{self.name}: row {row!r} has arity {len(row)}, expected {self.arity}")
            for v in row:
                value_key(v)
            deduped.setdefault(row, None)
        rows = tuple(deduped)
        index: dict[Value, tuple[Value, ...]] = {}
        if self.key_column is not None:
            for row in rows:
                k = row[self.key_column]
                if k in index:
                    raise LoadError(f"{self.name}: key {k!r} appears in {index[k]!r} and {row!r}")
                index[k] = row
        object.__setattr__(self, "tuples", rows)
        object.__setattr__(self, "_members", frozenset(rows))
        object.__setattr__(self, "_key_index", MappingProxyType(index))

    def __contains__(self, row: tuple[Value, ...]) -> bool:
        return row in self._members

    def __len__(self) -> int:
        return len(self.tuples)

    def column_index(self, column: int | str) -> int:
        if isinstance(column, int):
            if not 0 <= column < self.arity:
                raise SchemaError(f"{self.name} has no column {column}")
            return column
        if self.columns is None or column not in self.columns:
            raise SchemaError(f"{self.name} has no column named {column!r}")
        return self.columns.index(column)

    def candidates(self, pattern: Sequence[Value | None]) -> Iterable[tuple[Value, ...]]:
        """Tuples that may match ``pattern`` (None = unbound), in load order."""
        if self.key_column is not None:
            k = pattern[self.key_column]
            if k is not None:
                row = self._key_index.get(k)
                return () if row is None else (row,)
        if all(p is not None for p in pattern):
            row = tuple(pattern)
            return (row,) if row in self._members else ()
        return self.tuples


class Database(Mapping[str, Relation]):
    """Named relations; read-only once constructed."""

    def __init__(self, relations: Iterable[Relation] = ()):
        rels: dict[str, Relation] = {}
        for r in relations:
            if r.name in rels:
                raise LoadError(f"duplicate relation name {r.name!r}")
            rels[r.name] = r
        self._relations = MappingProxyType(rels)

    @classmethod
    def from_rows(cls, spec: Mapping[str, Iterable[Sequence[Value]]], keys: Mapping[str, int] | None = None) -> Database:
        """Build a database from ``{name: rows}``; arity taken from the first row."""
        keys = keys or {}
        rels = []
        for name, rows in spec.items():
            rows = [tuple(r) for r in rows]
            if not rows:
                raise LoadError(f"{name}: cannot infer arity of an empty relation")
            rels.append(Relation(name, len(rows[0]), tuple(rows), keys.get(name)))
        return cls(rels)

    def __getitem__(self, name: str) -> Relation:
        return self._relations[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._relations)

    def __len__(self) -> int:
        return len(self._relations)

    def __repr__(self) -> str:
        return f"Database({', '.join(f'{r.name}/{r.arity}[{len(r)}]' for r in self._relations.values())})"

    def relation(self, name: str) -> Relation:
        try:
            return self._relations[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def active_domain(self) -> list[Value]:
        """Every constant stored in the database, sorted."""
        values = {v for r in self._relations.values() for row in r.tuples for v in row}
        return sorted(values, key=value_key)


# -- manifest I/O -----------------------------------------------------------


def _convert(raw: str, typ: str, where: str) -> Value:
    if typ == "int":
        try:
            return int(raw)
        except ValueError:
            raise LoadError(f"{where}: {raw!r} is not an integer") from None
    return raw


def load(manifest: str | Path) -> Database:
    """Load a JSON manifest and the headerless CSV files it names.

    Paths inside the manifest are resolved relative to the manifest's folder.
    Columns are strings unless the manifest declares them ``"int"``.
    """
    manifest = Path(manifest)
    spec = json.loads(manifest.read_text(encoding="utf-8"))
    base = manifest.parent
    rels = []
    seen: set[str] = set()
    for entry in spec.get("relations", []):
        name = entry["name"]
        if name in seen:
            raise LoadError(f"duplicate relation name {name!r}")
        seen.add(name)
        arity = int(entry["arity"])
        types = tuple(entry.get("types") or ("str",) * arity)
        columns = tuple(entry["columns"]) if entry.get("columns") else None
        path = base / entry["file"]
        if not path.exists():
            raise LoadError(f"{name}: missing data file {path}")
        rows = []
        with path.open(newline="", encoding="utf-8") as fh:
            for lineno, raw in enumerate(csv.reader(fh), start=1):
                if not raw:
                    continue
                where = f"{path.name}:{lineno}"
                if len(raw) != arity:
                    raise LoadError(f"{where}: {len(raw)} fields, relation {name} has arity {arity}")
                if len(types) != arity:
                    raise LoadError(f"{name}: {len(types)} types for arity {arity}")
                rows.append(tuple(_convert(v, t, where) for v, t in zip(raw, types)))
        rels.append(Relation(name, arity, tuple(rows), entry.get("key"), types, columns))
    return Database(rels)


def _infer_types(rel: Relation) -> tuple[str, ...]:
    if rel.types is not None:
        return rel.types
    types = []
    for i in range(rel.arity):
        col = [row[i] for row in rel.tuples]
        types.append("int" if col and all(isinstance(v, int) for v in col) else "str")
    return tuple(types)


def dump(db: Database, directory: str | Path, manifest_name: str = "manifest.json") -> Path:
    """Write ``db`` as a manifest plus one CSV per relation; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for rel in db.values():
        types = _infer_types(rel)
        fname = f"{rel.name}.csv"
        with (directory / fname).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows(rel.tuples)
        entry = {"name": rel.name, "arity": rel.arity, "types": list(types), "file": fname}
        if rel.key_column is not None:
            entry["key"] = rel.key_column
        if rel.columns is not None:
            entry["columns"] = list(rel.columns)
        entries.append(entry)
    path = directory / manifest_name
    path.write_text(json.dumps({"relations": entries}, indent=2) + "\n", encoding="utf-8")
    return path


# -- evaluation -------------------------------------------------------------


def _check_atoms(db: Database, body: Sequence[Atom]) -> list[Relation]:
    rels = []
    for a in body:
        rel = db.relation(a.relation)
        if rel.arity != a.arity:
            raise SchemaError(f"{a}: relation {rel.name} has arity {rel.arity}")
        rels.append(rel)
    return rels


def _seed_values(seed: Mapping[Var, Term] | None) -> dict[Var, Value]:
    out: dict[Var, Value] = {}
    for v, t in (seed or {}).items():
        if isinstance(t, Var):
            raise ValueError(f"seed binds {v} to variable {t}; seeds must be ground")
        out[v] = t.value if isinstance(t, Const) else t
    return out


def _match(a: Atom, rel: Relation, env: dict[Var, Value]) -> Iterator[list[Var]]:
    """Yield once per tuple of ``rel`` matching ``a`` under ``env``.

    ``env`` is extended in place; the yielded list names the variables that
    were bound by this match so the caller can undo them on backtrack.
    """
    pattern: list[Value | None] = []
    for t in a.args:
        if isinstance(t, Const):
            pattern.append(t.value)
        else:
            pattern.append(env.get(t))
    for row in rel.candidates(pattern):
        bound: list[Var] = []
        ok = True
        for t, p, val in zip(a.args, pattern, row):
            if p is not None:
                if p != val or type(p) is not type(val):
                    ok = False
                    break
                continue
            cur = env.get(t)
            if cur is None:
                env[t] = val
                bound.append(t)
            elif cur != val or type(cur) is not type(val):
                ok = False
                break
        if ok:
            yield bound
        for v in bound:
            del env[v]


def _search(atoms: Sequence[Atom], rels: Sequence[Relation], env: dict[Var, Value]) -> Iterator[dict[Var, Value]]:
    if not atoms:
        yield env
        return
    stack = [_match(atoms[0], rels[0], env)]
    while stack:
        depth = len(stack) - 1
        try:
            next(stack[-1])
        except StopIteration:
            stack.pop()
            continue
        if depth + 1 == len(atoms):
            yield env
        else:
            stack.append(_match(atoms[depth + 1], rels[depth + 1], env))


def _components(body: Sequence[Atom], env: Mapping[Var, Value]) -> list[list[int]]:
    """Partition atom positions into groups that share no free variable."""
    parent = list(range(len(body)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[Var, int] = {}
    for i, a in enumerate(body):
        for v in a.variables():
            if v in env:
                continue
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    groups: dict[int, list[int]] = {}
    for i in range(len(body)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def first_grounding(db: Database, body: Sequence[Atom], seed: Mapping[Var, Term] | None = None) -> Substitution | None:
    """First ground extension of ``seed`` that satisfies every body atom.

    Returns None when the body is unsatisfiable. Groups of atoms sharing no
    unbound variable are searched independently; the answer is the same as a
    single left-to-right nested loop would find, since for independent groups
    the first joint solution is the first solution of each group.
    """
    body = list(body)
    rels = _check_atoms(db, body)
    env = _seed_values(seed)
    for group in _components(body, env):
        found = next(_search([body[i] for i in group], [rels[i] for i in group], env), None)
        if found is None:
            return None
    return Substitution({v: Const(val) for v, val in env.items()})


def iter_groundings(db: Database, body: Sequence[Atom], seed: Mapping[Var, Term] | None = None) -> Iterator[Substitution]:
    body = list(body)
    rels = _check_atoms(db, body)
    env = _seed_values(seed)
    for found in _search(body, rels, env):
        yield Substitution({v: Const(val) for v, val in found.items()})


def all_groundings(
    db: Database, body: Sequence[Atom], seed: Mapping[Var, Term] | None = None, limit: int = 10_000
) -> list[Substitution]:
    """Every ground extension of ``seed`` satisfying ``body``, in search order.

    Raises LimitExceeded if there are more than ``limit`` of them.
    """
    out = []
    for s in iter_groundings(db, body, seed):
        if len(out) == limit:
            raise LimitExceeded(limit)
        out.append(s)
    return out


def distinct_values(
    db: Database,
    relation: str,
    columns: Sequence[int | str],
    filter: Mapping[int | str, Value] | None = None,
) -> list[tuple[Value, ...]]:
    """Distinct projections onto ``columns`` of the tuples matching ``filter``."""
    rel = db.relation(relation)
    cols = [rel.column_index(c) for c in columns]
    pinned = {rel.column_index(c): v for c, v in (filter or {}).items()}
    pattern: list[Value | None] = [None] * rel.arity
    for i, v in pinned.items():
        pattern[i] = v
    seen: dict[tuple[Value, ...], None] = {}
    for row in rel.candidates(pattern):
        if all(row[i] == v and type(row[i]) is type(v) for i, v in pinned.items()):
            seen.setdefault(tuple(row[i] for i in cols), None)
    return list(seen)

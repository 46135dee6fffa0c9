"""Terms, atoms and substitutions shared by every layer of the engine."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Union

Value = Union[int, str]


def value_key(value: Value) -> tuple[int, int | str]:
    """Total order over constants: integers first, then strings."""
    if isinstance(value, bool):
        raise TypeError("booleans are not valid constants")
    if isinstance(value, int):
        return (0, value)
    return (1, value)


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    scope: str = ""

    @property
    def key(self) -> str:
        return f"{self.scope}::{self.name}" if self.scope else self.name

    def __str__(self) -> str:
        return self.key

    def __lt__(self, other: Var) -> bool:
        return self.key < other.key


@dataclass(frozen=True, slots=True)
class Const:
    value: Value

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, Const]


@dataclass(frozen=True, slots=True)
class Atom:
    relation: str
    args: tuple[Term, ...]

    def __init__(self, relation: str, args: Iterable[Term]):
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "args", tuple(args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[Var]:
        for t in self.args:
            if isinstance(t, Var):
                yield t

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def __str__(self) -> str:
        return f"{self.relation}({', '.join(map(str, self.args))})"


def atom(relation: str, *args: Term | Value) -> Atom:
    """Shorthand used in tests and generators: raw values become constants."""
    return Atom(relation, (a if isinstance(a, (Var, Const)) else Const(a) for a in args))


class Substitution(Mapping[Var, Term]):
    """Immutable mapping from variables to terms.

    Bindings are kept in resolved form: no target is itself a bound variable,
    so applying a substitution twice gives the same result as applying it once.
    """

    __slots__ = ("_map",)

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = dict(bindings)
        for v, t in items.items():
            if not isinstance(v, Var):
                raise TypeError(f"substitution key must be a variable, got {v!r}")
            if not isinstance(t, (Var, Const)):
                t = Const(t)
                items[v] = t
        self._map: dict[Var, Term] = {v: t for v, t in items.items() if v != t}

    def __getitem__(self, v: Var) -> Term:
        return self._map[v]

    def __iter__(self) -> Iterator[Var]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}->{t}" for v, t in sorted(self._map.items(), key=lambda kv: kv[0].key))
        return f"Substitution({{{inner}}})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Substitution):
            return self._map == other._map
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def term(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self._map.get(t, t)
        return t

    def apply(self, a: Atom) -> Atom:
        return Atom(a.relation, (self.term(t) for t in a.args))

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self._map.values())

    def extend(self, bindings: Mapping[Var, Term]) -> Substitution:
        merged = dict(self._map)
        merged.update(bindings)
        return Substitution(merged)

    def values_by_key(self) -> dict[str, Value]:
        """Ground bindings keyed by scoped variable name (JSON friendly)."""
        return {
            v.key: t.value
            for v, t in sorted(self._map.items(), key=lambda kv: kv[0].key)
            if isinstance(t, Const)
        }


def atoms_variables(atoms: Iterable[Atom]) -> list[Var]:
    """Variables of ``atoms`` in first-occurrence order, without repeats."""
    seen: dict[Var, None] = {}
    for a in atoms:
        for v in a.variables():
            seen.setdefault(v, None)
    return list(seen)

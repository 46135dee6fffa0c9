"""Unification of flat atoms and construction of combined queries.

Atoms here have depth one (arguments are variables or constants), so a most
general unifier is a partition of variables into classes, each carrying at
most one constant. A union-find over variables computes it directly.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from entangled.eql import EntangledQuery
from entangled.terms import Atom, Const, Substitution, Term, Var


class UnificationError(Exception):
    """Two terms (or atoms) that must be equal cannot be."""

    def __init__(self, left, right):
        super().__init__(f"cannot unify {left} with {right}")
        self.pair = (left, right)


def unifiable(a: Atom, b: Atom) -> bool:
    """Same relation and arity, and no position holds two different constants."""
    if a.relation != b.relation or a.arity != b.arity:
        return False
    for s, t in zip(a.args, b.args):
        if isinstance(s, Const) and isinstance(t, Const) and s != t:
            return False
    return True


class _Classes:
    def __init__(self):
        self.parent: dict[Var, Var] = {}
        self.anchor: dict[Var, Const] = {}

    def find(self, v: Var) -> Var:
        root = v
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while v != root:
            nxt = self.parent[v]
            self.parent[v] = root
            v = nxt
        self.parent.setdefault(root, root)
        return root

    def union(self, s: Term, t: Term, why) -> None:
        if isinstance(s, Const) and isinstance(t, Const):
            if s != t:
                raise UnificationError(*why)
            return
        if isinstance(s, Const):
            s, t = t, s
        rs = self.find(s)
        if isinstance(t, Const):
            have = self.anchor.get(rs)
            if have is not None and have != t:
                raise UnificationError(*why)
            self.anchor[rs] = t
            return
        rt = self.find(t)
        if rs == rt:
            return
        cs, ct = self.anchor.get(rs), self.anchor.get(rt)
        if cs is not None and ct is not None and cs != ct:
            raise UnificationError(*why)
        # smaller key becomes the root, keeping representatives deterministic
        if rt.key < rs.key:
            rs, rt = rt, rs
            cs, ct = ct, cs
        self.parent[rt] = rs
        if ct is not None:
            self.anchor[rs] = ct
            self.anchor.pop(rt, None)

    def substitution(self) -> Substitution:
        out: dict[Var, Term] = {}
        for v in list(self.parent):
            root = self.find(v)
            target = self.anchor.get(root, root)
            if target != v:
                out[v] = target
        return Substitution(out)


def mgu(constraints: Iterable[tuple[Atom, Atom]], base: Mapping[Var, Term] | None = None) -> Substitution:
    """Most general unifier making every pair syntactically identical.

    ``base`` adds equations ``v = base[v]``. Class representatives are the
    class constant if any, else the variable with the smallest scoped name,
    so the result does not depend on constraint order. Raises
    UnificationError carrying the offending pair.
    """
    classes = _Classes()
    for v, t in (base or {}).items():
        classes.union(v, t, (v, t))
    for a, b in constraints:
        if a.relation != b.relation or a.arity != b.arity:
            raise UnificationError(a, b)
        for s, t in zip(a.args, b.args):
            classes.union(s, t, (a, b))
    return classes.substitution()


@dataclass(frozen=True)
class CombinedQuery:
    heads: tuple[Atom, ...]
    body: tuple[Atom, ...]
    members: frozenset[str]
    unifier: Substitution
    posts: tuple[Atom, ...] = ()


def _dedupe(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


def combine(
    queries: Sequence[EntangledQuery],
    successors: Sequence[CombinedQuery],
    matching: Mapping[tuple[str, int], Atom],
) -> CombinedQuery:
    """Unify ``queries`` with already-combined successor queries.

    ``matching[(name, i)]`` is the head atom that postcondition ``i`` of query
    ``name`` must equal; it has to belong to one of the inputs. The combined
    heads and body are the members' atoms under the joint unifier.
    """
    members = {q.name for q in queries}
    for s in successors:
        members |= s.members
    known_heads: set[Atom] = {h for q in queries for h in q.heads}
    pairs: list[tuple[Atom, Atom]] = []
    for q in queries:
        for i, p in enumerate(q.post):
            try:
                target = matching[(q.name, i)]
            except KeyError:
                raise ValueError(f"no head assigned to postcondition {i} of {q.name}") from None
            pairs.append((p, target))

    for _, target in pairs:
        if target not in known_heads and not any(_covers(s, target) for s in successors):
            raise ValueError(f"matched head {target} is not among the combined queries")

    classes = _Classes()
    for s in successors:
        for v, t in s.unifier.items():
            classes.union(v, t, (v, t))
    for a, b in pairs:
        if a.relation != b.relation or a.arity != b.arity:
            raise UnificationError(a, b)
        for x, y in zip(a.args, b.args):
            classes.union(x, y, (a, b))
    unifier = classes.substitution()
    heads = [unifier.apply(h) for q in queries for h in q.heads]
    heads += [unifier.apply(h) for s in successors for h in s.heads]
    body = [unifier.apply(a) for q in queries for a in q.body]
    body += [unifier.apply(a) for s in successors for a in s.body]
    posts = [unifier.apply(p) for q in queries for p in q.post]
    posts += [unifier.apply(p) for s in successors for p in s.posts]
    return CombinedQuery(_dedupe(heads), _dedupe(body), frozenset(members), unifier, _dedupe(posts))


def _covers(s: CombinedQuery, target: Atom) -> bool:
    return s.unifier.apply(target) in s.heads


def as_combined(q: EntangledQuery) -> CombinedQuery:
    """A single query with no postconditions, viewed as a combined query."""
    if q.post:
        raise ValueError(f"{q.name} has postconditions; use combine()")
    return CombinedQuery(_dedupe(q.heads), _dedupe(q.body), frozenset({q.name}), Substitution(), ())

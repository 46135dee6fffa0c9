"""Choosing one coordinating set among several candidates."""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass


@dataclass(frozen=True)
class Candidate:
    """A discovered coordinating set; ``tag`` says where it came from (DAG node, value)."""

    members: frozenset[str]
    tag: Hashable = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def sorted_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.members))


@dataclass(frozen=True)
class SelectionCriterion:
    """How to choose among discovered coordinating sets.

    ``max`` prefers more members, then the lexicographically smallest sorted
    name list, then discovery order. ``first`` takes the first set found.
    ``contains`` keeps sets containing ``required`` and then acts like ``max``.
    """

    mode: str = "max"
    required: str | None = None

    def __post_init__(self):
        if self.mode not in ("max", "first", "contains"):
            raise ValueError(f"unknown selection mode {self.mode!r}")
        if (self.mode == "contains") != (self.required is not None):
            raise ValueError("'contains' needs a query name, other modes take none")

    @classmethod
    def parse(cls, text: str) -> SelectionCriterion:
        if text in ("max", "first"):
            return cls(text)
        if text.startswith("contains:") and len(text) > len("contains:"):
            return cls("contains", text.split(":", 1)[1])
        raise ValueError(f"unknown selection criterion {text!r}")

    def choose(self, candidates: Sequence[Candidate]) -> Candidate | None:
        pool = list(candidates)
        if self.mode == "first":
            return pool[0] if pool else None
        if self.mode == "contains":
            pool = [c for c in pool if self.required in c.members]
        if not pool:
            return None
        # min() keeps the earliest of equal keys
        return min(pool, key=lambda c: (-c.size, c.sorted_names))


MAX = SelectionCriterion()

"""Histories and the finite substitution closure used by all checkers.

A history records, in order, which names the environment learned as symbolic
inputs (tag "i") and which were extruded as fresh private outputs (tag "o").
A substitution respects a history when it fixes every output name and never
maps a name introduced before an output onto that output.

`representatives` reduces the universal quantification "for all substitutions
respecting h" to a finite set: all idempotent substitutions induced by
partitions of the relevant names, each block collapsing to its
earliest-introduced member, filtered by respectfulness.  Its adequacy is
checked in the test suite against a brute-force enumeration of all name maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .syntax import FreshnessViolation, Name, Substitution, compose  # noqa: F401

INPUT = "i"
OUTPUT = "o"


@dataclass(frozen=True)
class History:
    entries: tuple[tuple[Name, str], ...]

    @staticmethod
    def of(entries: Iterable[tuple[Name, str]]) -> "History":
        out = tuple((n, t) for n, t in entries)
        for _, tag in out:
            if tag not in (INPUT, OUTPUT):
                raise ValueError(f"bad history tag {tag!r}")
        return History(out)

    @staticmethod
    def inputs(names: Iterable[Name]) -> "History":
        seen: list[Name] = []
        for n in names:
            if n not in seen:
                seen.append(n)
        return History(tuple((n, INPUT) for n in seen))

    def free_names(self) -> frozenset[Name]:
        return frozenset(n for n, _ in self.entries)

    def names_in_order(self) -> list[Name]:
        seen: list[Name] = []
        for n, _ in self.entries:
            if n not in seen:
                seen.append(n)
        return seen

    def position(self, name: Name) -> int | None:
        for i, (n, _) in enumerate(self.entries):
            if n == name:
                return i
        return None

    def _extend(self, name: Name, tag: str) -> "History":
        if name in self.free_names():
            raise FreshnessViolation(
                f"{name!r} is not fresh for history {self}")
        return History(self.entries + ((name, tag),))

    def extend_input(self, name: Name) -> "History":
        return self._extend(name, INPUT)

    def extend_output(self, name: Name) -> "History":
        return self._extend(name, OUTPUT)

    def apply(self, sigma: Substitution) -> "History":
        """Image under a substitution; entries may then share names."""
        if sigma.is_identity:
            return self
        return History(tuple((sigma(n), t) for n, t in self.entries))

    def __str__(self) -> str:
        if not self.entries:
            return "-"
        return ".".join(f"{n}^{t}" for n, t in self.entries)


EMPTY_HISTORY = History(())


def respects(sigma: Substitution, h: History) -> bool:
    """Does sigma respect h?

    For every decomposition h = h'.(x^o).h'': sigma fixes x and no name
    occurring in h' is mapped onto x.
    """
    prefix: set[Name] = set()
    for name, tag in h.entries:
        if tag == OUTPUT:
            if sigma(name) != name:
                return False
            if any(sigma(y) == name for y in prefix):
                return False
        prefix.add(name)
    return True


def _order_relevant(h: History, relevant: Iterable[Name]) -> list[Name]:
    # Names absent from the history act as inputs in the past, so they are
    # introduced before every history entry.
    def key(n: Name):
        pos = h.position(n)
        return (0, "", n) if pos is None else (1, pos, n)

    return sorted(set(relevant), key=key)


def _partitions(items: Sequence[Name]) -> Iterator[list[list[Name]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def representatives(h: History, relevant: Iterable[Name]) -> tuple[Substitution, ...]:
    """Finite stand-in for quantification over all substitutions respecting h.

    Every partition of the relevant names induces the idempotent substitution
    collapsing each block onto its earliest-introduced member; the result is
    the respectful subset, ordered with the identity first and then by
    increasing merge count.
    """
    ordered = _order_relevant(h, relevant)
    index = {n: i for i, n in enumerate(ordered)}
    subs = []
    for part in _partitions(ordered):
        mapping: dict[Name, Name] = {}
        for block in part:
            rep = min(block, key=index.__getitem__)
            for member in block:
                if member != rep:
                    mapping[member] = rep
        sigma = Substitution.of(mapping)
        if respects(sigma, h):
            subs.append(sigma)
    subs.sort(key=lambda s: (s.merge_count(), s.pairs))
    return tuple(subs)


def refines(theta: Substitution, sigma: Substitution, names: Iterable[Name]) -> bool:
    """True when theta makes every identification sigma makes (on `names`)."""
    return all(theta(sigma(n)) == theta(n) for n in names)

"""Core term language of the finite pi-calculus and its modal logic.

Names are plain strings.  Processes, transition labels and formulae are
immutable trees of frozen dataclasses; all operations treat binders up to
alpha-equivalence.  Substitutions are finite name-to-name maps that act as
the identity outside their domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union

Name = str


class FreshnessViolation(Exception):
    """A binder was required to be fresh for some term or history but is not."""


def fresh_name(base: Name, avoid: Iterable[Name]) -> Name:
    """Derive a fresh name from `base` by appending the smallest free counter.

    Never returns a name in `avoid`; deterministic for reproducible output.
    """
    taken = set(avoid)
    if base not in taken:
        return base
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


# ---------------------------------------------------------------------------
# Substitutions

@dataclass(frozen=True)
class Substitution:
    """Finite map from names to names, identity outside its domain.

    Stored as a sorted tuple of non-identity pairs so that substitutions are
    hashable and structurally comparable.
    """

    pairs: tuple[tuple[Name, Name], ...]

    @staticmethod
    def of(mapping: dict[Name, Name] | Iterable[tuple[Name, Name]]) -> "Substitution":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return Substitution(tuple(sorted((x, y) for x, y in items if x != y)))

    @cached_property
    def _map(self) -> dict[Name, Name]:
        return dict(self.pairs)

    def __call__(self, name: Name) -> Name:
        return self._map.get(name, name)

    @property
    def is_identity(self) -> bool:
        return not self.pairs

    def domain(self) -> frozenset[Name]:
        return frozenset(x for x, _ in self.pairs)

    def targets(self) -> frozenset[Name]:
        return frozenset(y for _, y in self.pairs)

    def names(self) -> frozenset[Name]:
        return self.domain() | self.targets()

    def without(self, name: Name) -> "Substitution":
        return Substitution(tuple(p for p in self.pairs if p[0] != name))

    def compose(self, other: "Substitution") -> "Substitution":
        """Pointwise composition: x(self.compose(other)) == other(self(x))."""
        dom = self.domain() | other.domain()
        return Substitution.of({x: other(self(x)) for x in dom})

    def merge_count(self) -> int:
        return len(self.pairs)

    def __str__(self) -> str:
        if self.is_identity:
            return "{}"
        return "{" + ", ".join(f"{x}->{y}" for x, y in self.pairs) + "}"


IDENTITY = Substitution(())


def compose(sigma: Substitution, theta: Substitution) -> Substitution:
    return sigma.compose(theta)


# ---------------------------------------------------------------------------
# Action prefixes and processes

class ActionPrefix:
    __slots__ = ()


@dataclass(frozen=True)
class TauPrefix(ActionPrefix):
    pass


@dataclass(frozen=True)
class OutPrefix(ActionPrefix):
    channel: Name
    payload: Name


@dataclass(frozen=True)
class InPrefix(ActionPrefix):
    channel: Name
    binder: Name


TAU = TauPrefix()


class Process:
    __slots__ = ()


@dataclass(frozen=True)
class Nil(Process):
    pass


@dataclass(frozen=True)
class Prefix(Process):
    prefix: ActionPrefix
    body: Process


@dataclass(frozen=True)
class Match(Process):
    left: Name
    right: Name
    body: Process


@dataclass(frozen=True)
class Nu(Process):
    binder: Name
    body: Process


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Sum(Process):
    left: Process
    right: Process


NIL = Nil()


# ---------------------------------------------------------------------------
# Transition labels

class Label:
    __slots__ = ()


@dataclass(frozen=True)
class TauLabel(Label):
    pass


@dataclass(frozen=True)
class FreeOutLabel(Label):
    channel: Name
    payload: Name


@dataclass(frozen=True)
class BoundOutLabel(Label):
    channel: Name
    binder: Name


@dataclass(frozen=True)
class InputLabel(Label):
    channel: Name
    binder: Name


LTAU = TauLabel()


def label_names(label: Label) -> frozenset[Name]:
    match label:
        case TauLabel():
            return frozenset()
        case FreeOutLabel(channel, payload):
            return frozenset((channel, payload))
        case BoundOutLabel(channel, binder) | InputLabel(channel, binder):
            return frozenset((channel, binder))
    raise TypeError(f"not a label: {label!r}")


def bound_label_names(label: Label) -> frozenset[Name]:
    match label:
        case BoundOutLabel(_, binder) | InputLabel(_, binder):
            return frozenset((binder,))
        case _:
            return frozenset()


# ---------------------------------------------------------------------------
# Formulae

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eq(Formula):
    left: Name
    right: Name


@dataclass(frozen=True)
class DiamFree(Formula):
    """Diamond over tau or a free output label."""

    label: Label
    body: Formula


@dataclass(frozen=True)
class BoxFree(Formula):
    label: Label
    body: Formula


@dataclass(frozen=True)
class DiamBoundOut(Formula):
    channel: Name
    binder: Name
    body: Formula


@dataclass(frozen=True)
class BoxBoundOut(Formula):
    channel: Name
    binder: Name
    body: Formula


@dataclass(frozen=True)
class DiamInput(Formula):
    channel: Name
    binder: Name
    body: Formula


@dataclass(frozen=True)
class BoxInput(Formula):
    channel: Name
    binder: Name
    body: Formula


TT = Top()
FF = Bot()


def neg(phi: Formula) -> Formula:
    return Imp(phi, FF)


def big_and(phis: Iterable[Formula]) -> Formula:
    """Fold a conjunction; the empty conjunction is tt."""
    items = list(phis)
    if not items:
        return TT
    out = items[-1]
    for phi in reversed(items[:-1]):
        out = And(phi, out)
    return out


def big_or(phis: Iterable[Formula]) -> Formula:
    """Fold a disjunction; the empty disjunction is ff."""
    items = list(phis)
    if not items:
        return FF
    out = items[-1]
    for phi in reversed(items[:-1]):
        out = Or(phi, out)
    return out


def box_subst(pairs: Iterable[tuple[Name, Name]], phi: Formula) -> Formula:
    """Guard `phi` by the equalities of a substitution given as ordered pairs.

    For pairs [(x1,z1), ..., (xn,zn)] the result is
    (xn=zn) => ... => (x1=z1) => phi; the empty list returns phi unchanged.
    """
    out = phi
    for x, z in pairs:
        out = Imp(Eq(x, z), out)
    return out


# ---------------------------------------------------------------------------
# Free names

Subject = Union[Process, Formula, Label, ActionPrefix]


def free_names(subject) -> frozenset[Name]:
    """Names with a free occurrence; invariant under alpha-renaming."""
    match subject:
        case Nil():
            return frozenset()
        case Prefix(TauPrefix(), body):
            return free_names(body)
        case Prefix(OutPrefix(ch, pay), body):
            return free_names(body) | {ch, pay}
        case Prefix(InPrefix(ch, b), body):
            return (free_names(body) - {b}) | {ch}
        case Match(x, y, body):
            return free_names(body) | {x, y}
        case Nu(b, body):
            return free_names(body) - {b}
        case Par(l, r) | Sum(l, r):
            return free_names(l) | free_names(r)
        case TauLabel() | FreeOutLabel() | BoundOutLabel() | InputLabel():
            return label_names(subject)
        case Top() | Bot():
            return frozenset()
        case And(l, r) | Or(l, r) | Imp(l, r):
            return free_names(l) | free_names(r)
        case Eq(x, y):
            return frozenset((x, y))
        case DiamFree(lbl, body) | BoxFree(lbl, body):
            return label_names(lbl) | free_names(body)
        case (DiamBoundOut(ch, b, body) | BoxBoundOut(ch, b, body)
              | DiamInput(ch, b, body) | BoxInput(ch, b, body)):
            return (free_names(body) - {b}) | {ch}
        case TauPrefix():
            return frozenset()
        case OutPrefix(ch, pay):
            return frozenset((ch, pay))
        case InPrefix(ch, b):
            return frozenset((ch,))
    # Anything else (e.g. a History) provides its own accessor.
    return subject.free_names()


def free_names_ordered(subject) -> list[Name]:
    """Free names in order of first occurrence (deterministic traversal)."""
    seen: list[Name] = []

    def add(names: Iterable[Name]) -> None:
        for n in names:
            if n not in seen:
                seen.append(n)

    def walk(s, bound: frozenset[Name]) -> None:
        match s:
            case Nil() | Top() | Bot() | TauPrefix() | TauLabel():
                pass
            case Prefix(pfx, body):
                walk(pfx, bound)
                match pfx:
                    case InPrefix(_, b):
                        walk(body, bound | {b})
                    case _:
                        walk(body, bound)
            case OutPrefix(ch, pay) | FreeOutLabel(ch, pay):
                add(n for n in (ch, pay) if n not in bound)
            case InPrefix(ch, _) :
                add([ch] if ch not in bound else [])
            case BoundOutLabel(ch, b) | InputLabel(ch, b):
                add([ch] if ch not in bound else [])
                add([b] if b not in bound else [])
            case Match(x, y, body):
                add(n for n in (x, y) if n not in bound)
                walk(body, bound)
            case Nu(b, body):
                walk(body, bound | {b})
            case Par(l, r) | Sum(l, r) | And(l, r) | Or(l, r) | Imp(l, r):
                walk(l, bound)
                walk(r, bound)
            case Eq(x, y):
                add(n for n in (x, y) if n not in bound)
            case DiamFree(lbl, body) | BoxFree(lbl, body):
                walk(lbl, bound)
                walk(body, bound)
            case (DiamBoundOut(ch, b, body) | BoxBoundOut(ch, b, body)
                  | DiamInput(ch, b, body) | BoxInput(ch, b, body)):
                add([ch] if ch not in bound else [])
                walk(body, bound | {b})
            case _:
                add(s.free_names())

    walk(subject, frozenset())
    return seen


# ---------------------------------------------------------------------------
# Capture-avoiding substitution

def _subst_under_binder(binder: Name, body, sigma: Substitution, rec):
    """Apply sigma below a binder, renaming the binder if it would capture."""
    inner = sigma.without(binder)
    body_free = free_names(body) - {binder}
    relevant = Substitution.of({x: inner(x) for x in body_free})
    if binder in relevant.targets():
        avoid = free_names(body) | relevant.names() | {binder}
        fresh = fresh_name(binder, avoid)
        combined = Substitution.of(dict(relevant.pairs) | {binder: fresh})
        return fresh, rec(body, combined)
    return binder, rec(body, relevant)


def apply_subst(subject, sigma: Substitution):
    """Capture-avoiding simultaneous substitution on a process, formula or label."""
    if sigma.is_identity:
        return subject
    match subject:
        case Nil():
            return subject
        case Prefix(TauPrefix(), body):
            return Prefix(TAU, apply_subst(body, sigma))
        case Prefix(OutPrefix(ch, pay), body):
            return Prefix(OutPrefix(sigma(ch), sigma(pay)), apply_subst(body, sigma))
        case Prefix(InPrefix(ch, b), body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return Prefix(InPrefix(sigma(ch), b2), body2)
        case Match(x, y, body):
            return Match(sigma(x), sigma(y), apply_subst(body, sigma))
        case Nu(b, body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return Nu(b2, body2)
        case Par(l, r):
            return Par(apply_subst(l, sigma), apply_subst(r, sigma))
        case Sum(l, r):
            return Sum(apply_subst(l, sigma), apply_subst(r, sigma))
        case TauLabel():
            return subject
        case FreeOutLabel(ch, pay):
            return FreeOutLabel(sigma(ch), sigma(pay))
        case BoundOutLabel(ch, b):
            # Label binders are never renamed by substitution; callers keep
            # them fresh for the substitution (see the transition invariants).
            return BoundOutLabel(sigma(ch), b)
        case InputLabel(ch, b):
            return InputLabel(sigma(ch), b)
        case Top() | Bot():
            return subject
        case And(l, r):
            return And(apply_subst(l, sigma), apply_subst(r, sigma))
        case Or(l, r):
            return Or(apply_subst(l, sigma), apply_subst(r, sigma))
        case Imp(l, r):
            return Imp(apply_subst(l, sigma), apply_subst(r, sigma))
        case Eq(x, y):
            return Eq(sigma(x), sigma(y))
        case DiamFree(lbl, body):
            return DiamFree(apply_subst(lbl, sigma), apply_subst(body, sigma))
        case BoxFree(lbl, body):
            return BoxFree(apply_subst(lbl, sigma), apply_subst(body, sigma))
        case DiamBoundOut(ch, b, body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return DiamBoundOut(sigma(ch), b2, body2)
        case BoxBoundOut(ch, b, body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return BoxBoundOut(sigma(ch), b2, body2)
        case DiamInput(ch, b, body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return DiamInput(sigma(ch), b2, body2)
        case BoxInput(ch, b, body):
            b2, body2 = _subst_under_binder(b, body, sigma, apply_subst)
            return BoxInput(sigma(ch), b2, body2)
    raise TypeError(f"cannot substitute into {subject!r}")


def rename(subject, old: Name, new: Name):
    return apply_subst(subject, Substitution.of({old: new}))


# ---------------------------------------------------------------------------
# Alpha-equivalence via canonical forms

_CANON_PREFIX = "%"


def _canonical(subject, env: dict[Name, Name], counter: list[int]):
    def look(n: Name) -> Name:
        return env.get(n, n)

    def bind(b: Name):
        fresh = f"{_CANON_PREFIX}{counter[0]}"
        counter[0] += 1
        return fresh

    match subject:
        case Nil() | Top() | Bot() | TauLabel() | TauPrefix():
            return subject
        case Prefix(TauPrefix(), body):
            return Prefix(TAU, _canonical(body, env, counter))
        case Prefix(OutPrefix(ch, pay), body):
            return Prefix(OutPrefix(look(ch), look(pay)), _canonical(body, env, counter))
        case Prefix(InPrefix(ch, b), body):
            nb = bind(b)
            return Prefix(InPrefix(look(ch), nb),
                          _canonical(body, {**env, b: nb}, counter))
        case Match(x, y, body):
            return Match(look(x), look(y), _canonical(body, env, counter))
        case Nu(b, body):
            nb = bind(b)
            return Nu(nb, _canonical(body, {**env, b: nb}, counter))
        case Par(l, r):
            return Par(_canonical(l, env, counter), _canonical(r, env, counter))
        case Sum(l, r):
            return Sum(_canonical(l, env, counter), _canonical(r, env, counter))
        case FreeOutLabel(ch, pay):
            return FreeOutLabel(look(ch), look(pay))
        case BoundOutLabel(ch, b):
            return BoundOutLabel(look(ch), look(b))
        case InputLabel(ch, b):
            return InputLabel(look(ch), look(b))
        case And(l, r):
            return And(_canonical(l, env, counter), _canonical(r, env, counter))
        case Or(l, r):
            return Or(_canonical(l, env, counter), _canonical(r, env, counter))
        case Imp(l, r):
            return Imp(_canonical(l, env, counter), _canonical(r, env, counter))
        case Eq(x, y):
            return Eq(look(x), look(y))
        case DiamFree(lbl, body):
            return DiamFree(_canonical(lbl, env, counter), _canonical(body, env, counter))
        case BoxFree(lbl, body):
            return BoxFree(_canonical(lbl, env, counter), _canonical(body, env, counter))
        case DiamBoundOut(ch, b, body):
            nb = bind(b)
            return DiamBoundOut(look(ch), nb, _canonical(body, {**env, b: nb}, counter))
        case BoxBoundOut(ch, b, body):
            nb = bind(b)
            return BoxBoundOut(look(ch), nb, _canonical(body, {**env, b: nb}, counter))
        case DiamInput(ch, b, body):
            nb = bind(b)
            return DiamInput(look(ch), nb, _canonical(body, {**env, b: nb}, counter))
        case BoxInput(ch, b, body):
            nb = bind(b)
            return BoxInput(look(ch), nb, _canonical(body, {**env, b: nb}, counter))
    raise TypeError(f"cannot canonicalize {subject!r}")


def canonical(subject):
    """Alpha-canonical form: binders renamed to reserved names in traversal order."""
    return _canonical(subject, {}, [0])


def alpha_eq(a, b) -> bool:
    """Alpha-equivalence of processes or formulae (also works on labels)."""
    if type(a) is not type(b):
        return False
    return canonical(a) == canonical(b)


def process_size(p: Process) -> int:
    match p:
        case Nil():
            return 1
        case Prefix(_, body) | Match(_, _, body) | Nu(_, body):
            return 1 + process_size(body)
        case Par(l, r) | Sum(l, r):
            return 1 + process_size(l) + process_size(r)
    raise TypeError(f"not a process: {p!r}")

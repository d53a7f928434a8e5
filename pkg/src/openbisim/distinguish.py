"""Construction of verified distinguishing formula pairs from strategies.

For a strategy node the formula biased to the leading process guards a
diamond with the equalities of the node's substitution and conjoins the
recursively built formulae for the leading residual; the formula biased to
the following process guards a box whose body is the disjunction of the
formulae for the responder residuals, extended with equality postconditions
covering responder transitions that only become enabled under substitutions
strictly stronger than the node's.

At a base node the follower box degenerates to the disjunction, over the
minimal substitutions enabling the label for the follower at all, of the
equalities those substitutions force; if nothing enables it the body is ff.

Constructed pairs are never trusted: both formulae are re-checked with the
satisfaction relation and a failure raises `VerificationFailed`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bisim import (
    Bisimilar, LEFT, NotBisimilar, StrategyTree, Verdict, open_bisim_top,
)
from .histories import History, refines, representatives
from .logic import sat
from .lts import transitions_with_label
from .syntax import (
    And, Bot, BoundOutLabel, BoxBoundOut, BoxFree, BoxInput, DiamBoundOut,
    DiamFree, DiamInput, Eq, Formula, FreeOutLabel, Imp, InputLabel, Label,
    Name, Or, Process, Substitution, TauLabel, Top, alpha_eq, apply_subst,
    big_and, big_or, box_subst, canonical, free_names_ordered,
)


class VerificationFailed(Exception):
    """A constructed formula pair failed the satisfaction cross-check."""


@dataclass(frozen=True)
class FormulaPair:
    phi_left: Formula
    phi_right: Formula
    verified: bool


def _diamond(label: Label, body: Formula) -> Formula:
    match label:
        case TauLabel() | FreeOutLabel():
            return DiamFree(label, body)
        case BoundOutLabel(ch, b):
            return DiamBoundOut(ch, b, body)
        case InputLabel(ch, b):
            return DiamInput(ch, b, body)
    raise TypeError(f"not a label: {label!r}")


def _box(label: Label, body: Formula) -> Formula:
    match label:
        case TauLabel() | FreeOutLabel():
            return BoxFree(label, body)
        case BoundOutLabel(ch, b):
            return BoxBoundOut(ch, b, body)
        case InputLabel(ch, b):
            return BoxInput(ch, b, body)
    raise TypeError(f"not a label: {label!r}")


def _subst_pairs(sigma: Substitution, h: History) -> list[tuple[Name, Name]]:
    def key(pair):
        pos = h.position(pair[0])
        return (0, "", pair[0]) if pos is None else (1, pos, pair[0])

    return sorted(sigma.pairs, key=key)


def _relevant(node: StrategyTree) -> list[Name]:
    names = free_names_ordered(node.left)
    for n in free_names_ordered(node.right):
        if n not in names:
            names.append(n)
    return names


def _equalities_beyond(theta: Substitution, sigma: Substitution,
                       names: list[Name]) -> list[Formula]:
    """Equalities that hold under theta but not under sigma, as formulae."""
    out = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if theta(a) == theta(b) and sigma(a) != sigma(b):
                out.append(Eq(a, b))
    return out


def _base_follower_body(node: StrategyTree) -> Formula:
    """Strongest postcondition of the label for a deadlocked follower.

    Disjunction over minimal enabling substitutions of the equalities each
    forces beyond the node's substitution; ff when nothing enables the label.
    """
    names = _relevant(node)
    follower = node.follower_process()
    enabling = []
    for theta in representatives(node.history, names):
        if transitions_with_label(apply_subst(follower, theta),
                                  apply_subst(node.label, theta)):
            enabling.append(theta)
    minimal = [t for t in enabling
               if not any(o is not t and refines(t, o, names) and not refines(o, t, names)
                          for o in enabling)]
    disjuncts = []
    for theta in minimal:
        eqs = _equalities_beyond(theta, node.subst, names)
        if eqs:
            disjuncts.append(big_and(eqs))
    return big_or(_dedup(disjuncts))


def _extra_disjuncts(node: StrategyTree) -> list[Formula]:
    """Postconditions for responder transitions enabled only beyond subst."""
    names = _relevant(node)
    follower = node.follower_process()
    sigma = node.subst
    out = []
    for theta in representatives(node.history, names):
        if theta == sigma or not refines(theta, sigma, names):
            continue
        label_t = apply_subst(node.label, theta)
        images = [canonical(apply_subst(resp, theta)) for resp, _ in node.responses]
        for resid in transitions_with_label(apply_subst(follower, theta), label_t):
            if canonical(resid) not in images:
                eqs = _equalities_beyond(theta, sigma, names)
                if eqs:
                    out.append(big_and(eqs))
                break
    return _dedup(out)


def _conjunct_set(phi: Formula) -> frozenset:
    items = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, And):
            stack.extend((f.left, f.right))
        else:
            items.add(canonical(f))
    return frozenset(items)


def _dedup(disjuncts: list[Formula]) -> list[Formula]:
    """Drop equality conjunctions subsumed by a weaker one already present."""
    sets = [_conjunct_set(d) for d in disjuncts]
    out = []
    for i, d in enumerate(disjuncts):
        if any(j != i and sets[j] < sets[i] for j in range(len(disjuncts))):
            continue
        if any(sets[j] == sets[i] for j in range(i)):
            continue
        out.append(d)
    return out


def _build(node: StrategyTree) -> tuple[Formula, Formula]:
    """Formulae biased to node.left and node.right respectively."""
    pairs = _subst_pairs(node.subst, node.history)
    to_leader_parts = []
    to_follower_parts = []
    for resp, sub in node.responses:
        bl, br = _build(sub)
        if node.leader == LEFT:
            to_leader_parts.append(bl)
            to_follower_parts.append(br)
        else:
            to_leader_parts.append(br)
            to_follower_parts.append(bl)
    leader_phi = box_subst(pairs, _diamond(node.label, big_and(to_leader_parts)))
    if node.is_base:
        follower_phi = _box(node.label, _base_follower_body(node))
    else:
        body = big_or(to_follower_parts + _extra_disjuncts(node))
        follower_phi = box_subst(pairs, _box(node.label, body))
    if node.leader == LEFT:
        return leader_phi, follower_phi
    return follower_phi, leader_phi


def _simplify(phi: Formula) -> Formula:
    """Identity laws only: drop tt conjuncts, ff disjuncts, duplicated twins."""
    match phi:
        case And(l, r):
            l, r = _simplify(l), _simplify(r)
            if isinstance(l, Top):
                return r
            if isinstance(r, Top):
                return l
            if alpha_eq(l, r):
                return l
            return And(l, r)
        case Or(l, r):
            l, r = _simplify(l), _simplify(r)
            if isinstance(l, Bot):
                return r
            if isinstance(r, Bot):
                return l
            if alpha_eq(l, r):
                return l
            return Or(l, r)
        case Imp(l, r):
            return Imp(_simplify(l), _simplify(r))
        case DiamFree(lbl, b):
            return DiamFree(lbl, _simplify(b))
        case BoxFree(lbl, b):
            return BoxFree(lbl, _simplify(b))
        case DiamBoundOut(ch, z, b):
            return DiamBoundOut(ch, z, _simplify(b))
        case BoxBoundOut(ch, z, b):
            return BoxBoundOut(ch, z, _simplify(b))
        case DiamInput(ch, z, b):
            return DiamInput(ch, z, _simplify(b))
        case BoxInput(ch, z, b):
            return BoxInput(ch, z, _simplify(b))
        case _:
            return phi


def _distinguishes(left: Process, right: Process, h: History,
                   phi_l: Formula, phi_r: Formula) -> bool:
    return (sat(left, h, phi_l) and not sat(right, h, phi_l)
            and sat(right, h, phi_r) and not sat(left, h, phi_r))


def distinguish(strategy: StrategyTree) -> FormulaPair:
    """Build and verify a pair of formulae realizing the strategy.

    The left formula holds for the strategy's left process and fails for the
    right one; the right formula is biased the other way.  The pair is only
    returned once both verdicts have been confirmed by the satisfaction
    checker.
    """
    raw_l, raw_r = _build(strategy)
    h = strategy.history
    candidates = [(_simplify(raw_l), _simplify(raw_r)), (raw_l, raw_r)]
    for phi_l, phi_r in candidates:
        if _distinguishes(strategy.left, strategy.right, h, phi_l, phi_r):
            return FormulaPair(phi_l, phi_r, verified=True)
    raise VerificationFailed(
        f"constructed pair does not distinguish {strategy.left} and {strategy.right}")


def distinguish_pair(p: Process, q: Process) -> Verdict | FormulaPair:
    """Decide the pair; on non-bisimilarity return a verified formula pair."""
    verdict = open_bisim_top(p, q)
    if isinstance(verdict, Bisimilar):
        return verdict
    return distinguish(verdict.strategy)

"""Open bisimilarity checking and extraction of distinguishing strategies.

The check plays the two-player game directly: at every node the pair is
instantiated by each representative substitution, each side may lead with
each of its transitions, and the other side must answer with a residual pair
that is again related.  Finite processes shrink with every move, so plain
recursion with memoization terminates.

On failure the engine returns the winning strategy: the substitution, the
leading transition and, for every residual the responder can offer, a
sub-strategy.  An empty response list is a base case (the responder cannot
match the move at all).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .histories import History, representatives
from .lts import Transition, transitions, transitions_with_label
from .syntax import (
    BoundOutLabel, InputLabel, Label, Name, Process, Substitution, alpha_eq,
    apply_subst, canonical, free_names, free_names_ordered, fresh_name,
)

LEFT = "left"
RIGHT = "right"

EXTEND_NONE = None
EXTEND_OUTPUT = "o"
EXTEND_INPUT = "i"


@dataclass(frozen=True)
class StrategyTree:
    left: Process
    right: Process
    history: History
    leader: str  # LEFT or RIGHT
    subst: Substitution
    label: Label  # the leading label, already instantiated by subst
    leader_residual: Process
    responses: tuple[tuple[Process, "StrategyTree"], ...]
    history_extension: Optional[str]  # EXTEND_NONE, EXTEND_OUTPUT or EXTEND_INPUT

    @property
    def is_base(self) -> bool:
        return not self.responses

    def depth(self) -> int:
        if self.is_base:
            return 1
        return 1 + max(sub.depth() for _, sub in self.responses)

    def child_history(self) -> History:
        h = self.history.apply(self.subst)
        match self.label:
            case BoundOutLabel(_, z):
                return h.extend_output(z)
            case InputLabel(_, z):
                return h.extend_input(z)
            case _:
                return h
        raise AssertionError

    def leader_process(self) -> Process:
        return self.left if self.leader == LEFT else self.right

    def follower_process(self) -> Process:
        return self.right if self.leader == LEFT else self.left


@dataclass(frozen=True)
class Bisimilar:
    relation: frozenset[tuple[Process, Process, tuple]]


@dataclass(frozen=True)
class NotBisimilar:
    strategy: StrategyTree


Verdict = Union[Bisimilar, NotBisimilar]


def _extension_for(label: Label) -> Optional[str]:
    match label:
        case BoundOutLabel():
            return EXTEND_OUTPUT
        case InputLabel():
            return EXTEND_INPUT
        case _:
            return EXTEND_NONE


def _normalize_binder(t: Transition, avoid: frozenset[Name]) -> Transition:
    b = t.binder()
    if b is None or b not in avoid:
        return t
    from .syntax import rename  # local import to keep module top uncluttered
    nb = fresh_name(b, avoid | free_names(t.residual))
    match t.label:
        case BoundOutLabel(ch, _):
            return Transition(BoundOutLabel(ch, nb), rename(t.residual, b, nb))
        case InputLabel(ch, _):
            return Transition(InputLabel(ch, nb), rename(t.residual, b, nb))
    return t


class _Engine:
    def __init__(self) -> None:
        self.memo: dict[tuple, Optional[StrategyTree]] = {}
        self.positives: set[tuple] = set()

    def search(self, p: Process, q: Process, h: History) -> Optional[StrategyTree]:
        key = (canonical(p), canonical(q), h.entries)
        if key in self.memo:
            return self.memo[key]
        result = self._node(p, q, h)
        self.memo[key] = result
        return result

    def _node(self, p: Process, q: Process, h: History) -> Optional[StrategyTree]:
        relevant = free_names_ordered(p)
        for n in free_names_ordered(q):
            if n not in relevant:
                relevant.append(n)
        instances = []
        for sigma in representatives(h, relevant):
            ps = apply_subst(p, sigma)
            qs = apply_subst(q, sigma)
            hs = h.apply(sigma)
            for leader in (LEFT, RIGHT):
                lead_proc, follow_proc = (ps, qs) if leader == LEFT else (qs, ps)
                node = self._try_leader(p, q, h, sigma, leader,
                                        lead_proc, follow_proc, hs)
                if node is not None:
                    return node
            instances.append((ps, qs, hs))
        # Only now is the pair known bisimilar; the identity representative
        # covers (p, q, h) itself.
        for ps, qs, hs in instances:
            self._record(ps, qs, hs)
        return None

    def _try_leader(self, p, q, h, sigma, leader, lead_proc, follow_proc,
                    hs) -> Optional[StrategyTree]:
        avoid = free_names(lead_proc) | free_names(follow_proc) | hs.free_names()
        for t in transitions(lead_proc):
            t = _normalize_binder(t, avoid)
            label = t.label
            match _extension_for(label):
                case "o":
                    h2 = hs.extend_output(t.binder())
                case "i":
                    h2 = hs.extend_input(t.binder())
                case _:
                    h2 = hs
            responders = transitions_with_label(follow_proc, label)
            responses = []
            matched = False
            for resp in responders:
                cl, cr = (t.residual, resp) if leader == LEFT else (resp, t.residual)
                sub = self.search(cl, cr, h2)
                if sub is None:
                    matched = True
                    break
                responses.append((resp, sub))
            if matched:
                continue
            return StrategyTree(
                left=p, right=q, history=h, leader=leader, subst=sigma,
                label=label, leader_residual=t.residual,
                responses=tuple(responses),
                history_extension=_extension_for(label))
        return None

    def _record(self, p: Process, q: Process, h: History) -> None:
        cp, cq = canonical(p), canonical(q)
        self.positives.add((cp, cq, h.entries))
        self.positives.add((cq, cp, h.entries))


def open_bisim(p: Process, q: Process, h: History) -> Verdict:
    """Decide open bisimilarity of p and q at history h."""
    engine = _Engine()
    strategy = engine.search(p, q, h)
    if strategy is None:
        return Bisimilar(frozenset(engine.positives))
    return NotBisimilar(strategy)


def open_bisim_top(p: Process, q: Process) -> Verdict:
    """Open bisimilarity with all free names recorded as inputs."""
    names = free_names_ordered(p)
    for n in free_names_ordered(q):
        if n not in names:
            names.append(n)
    return open_bisim(p, q, History.inputs(names))


class InvalidStrategy(Exception):
    pass


def validate_strategy(node: StrategyTree) -> None:
    """Re-check a strategy against the transition semantics.

    Confirms that the substitution respects the node history, the leading
    transition exists, the responses are exhaustive, and base nodes have no
    possible response.
    """
    from .histories import respects

    if not respects(node.subst, node.history):
        raise InvalidStrategy(f"substitution {node.subst} violates {node.history}")
    lead = apply_subst(node.leader_process(), node.subst)
    follow = apply_subst(node.follower_process(), node.subst)
    lead_residuals = transitions_with_label(lead, node.label)
    if not any(alpha_eq(r, node.leader_residual) for r in lead_residuals):
        raise InvalidStrategy(
            f"leader has no {node.label} transition to the stated residual")
    follow_residuals = transitions_with_label(follow, node.label)
    stated = [resp for resp, _ in node.responses]
    if len(stated) != len(follow_residuals):
        raise InvalidStrategy("responses are not exhaustive")
    for resp in follow_residuals:
        if not any(alpha_eq(resp, s) for s in stated):
            raise InvalidStrategy(f"missing response {resp}")
    h2 = node.child_history()
    for resp, sub in node.responses:
        want = ((node.leader_residual, resp) if node.leader == LEFT
                else (resp, node.leader_residual))
        if not (alpha_eq(sub.left, want[0]) and alpha_eq(sub.right, want[1])):
            raise InvalidStrategy("sub-strategy relates the wrong pair")
        if sub.history != h2:
            raise InvalidStrategy("sub-strategy has the wrong history")
        validate_strategy(sub)

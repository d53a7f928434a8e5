"""Satisfaction of modal formulae over processes indexed by a history.

Diamond modalities inspect transitions of the process as it stands; box
modalities and implication are closed under every substitution respecting
the history, realized by the finite representative set.  Bound modalities
extend the history with the (fresh) binder, tagged as output or input.

`sat_top` closes a judgement by recording all free names as inputs in the
past.  The late variant of the input box (used by the spectrum module)
existentially instantiates the binder instead of extending the history; its
fresh witness is recorded as an output so that it stays rigid.
"""

from __future__ import annotations

from .histories import History, representatives
from .lts import transitions_with_label
from .syntax import (
    And, Bot, BoundOutLabel, BoxBoundOut, BoxFree, BoxInput, DiamBoundOut,
    DiamFree, DiamInput, Eq, Formula, FreeOutLabel, Imp, InputLabel, Name,
    Or, Process, Substitution, Top, apply_subst, canonical, free_names,
    free_names_ordered, fresh_name,
)

OM = "om"
LATE_BOX_INPUT = "late-box"


class IllFormedJudgement(Exception):
    """A free name of the process or formula is missing from the history."""


def _relevant(p: Process, phi: Formula) -> list[Name]:
    out = free_names_ordered(p)
    for n in free_names_ordered(phi):
        if n not in out:
            out.append(n)
    return out


class _Sat:
    def __init__(self, mode: str):
        self.mode = mode
        self.memo: dict[tuple, bool] = {}

    def check(self, p: Process, h: History, phi: Formula) -> bool:
        key = (canonical(p), h.entries, canonical(phi))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        result = self._eval(p, h, phi)
        self.memo[key] = result
        return result

    def _worlds(self, p: Process, h: History, phi: Formula):
        for sigma in representatives(h, _relevant(p, phi)):
            yield sigma, apply_subst(p, sigma), h.apply(sigma)

    def _fresh_binder(self, b: Name, p: Process, h: History, body: Formula) -> Name:
        avoid = free_names(p) | h.free_names() | (free_names(body) - {b})
        return b if b not in avoid else fresh_name(b, avoid)

    def _eval(self, p: Process, h: History, phi: Formula) -> bool:
        match phi:
            case Top():
                return True
            case Bot():
                return False
            case Eq(x, y):
                return x == y
            case And(l, r):
                return self.check(p, h, l) and self.check(p, h, r)
            case Or(l, r):
                return self.check(p, h, l) or self.check(p, h, r)
            case Imp(l, r):
                for sigma, ps, hs in self._worlds(p, h, phi):
                    if self.check(ps, hs, apply_subst(l, sigma)) and \
                            not self.check(ps, hs, apply_subst(r, sigma)):
                        return False
                return True
            case DiamFree(lbl, body):
                return any(self.check(q, h, body)
                           for q in transitions_with_label(p, lbl))
            case DiamBoundOut(ch, b, body):
                z = self._fresh_binder(b, p, h, body)
                body = body if z == b else apply_subst(body, Substitution.of({b: z}))
                h2 = h.extend_output(z)
                return any(self.check(q, h2, body)
                           for q in transitions_with_label(p, BoundOutLabel(ch, z)))
            case DiamInput(ch, b, body):
                z = self._fresh_binder(b, p, h, body)
                body = body if z == b else apply_subst(body, Substitution.of({b: z}))
                h2 = h.extend_input(z)
                return any(self.check(q, h2, body)
                           for q in transitions_with_label(p, InputLabel(ch, z)))
            case BoxFree(lbl, body):
                for sigma, ps, hs in self._worlds(p, h, phi):
                    ls = apply_subst(lbl, sigma)
                    bs = apply_subst(body, sigma)
                    if not all(self.check(q, hs, bs)
                               for q in transitions_with_label(ps, ls)):
                        return False
                return True
            case BoxBoundOut(ch, b, body):
                z = self._fresh_binder(b, p, h, body)
                body = body if z == b else apply_subst(body, Substitution.of({b: z}))
                for sigma, ps, hs in self._worlds(p, h, phi):
                    bs = apply_subst(body, sigma)
                    h2 = hs.extend_output(z)
                    if not all(self.check(q, h2, bs)
                               for q in transitions_with_label(ps, BoundOutLabel(sigma(ch), z))):
                        return False
                return True
            case BoxInput(ch, b, body):
                if self.mode == LATE_BOX_INPUT:
                    return self._box_input_late(p, h, phi)
                z = self._fresh_binder(b, p, h, body)
                body = body if z == b else apply_subst(body, Substitution.of({b: z}))
                for sigma, ps, hs in self._worlds(p, h, phi):
                    bs = apply_subst(body, sigma)
                    h2 = hs.extend_input(z)
                    if not all(self.check(q, h2, bs)
                               for q in transitions_with_label(ps, InputLabel(sigma(ch), z))):
                        return False
                return True
        raise TypeError(f"not a formula: {phi!r}")

    def _box_input_late(self, p: Process, h: History, phi: Formula) -> bool:
        # The continuation is checked under some instantiation of the input
        # binder: any name of the judgement, or one fresh name kept rigid by
        # recording it as an output.
        assert isinstance(phi, BoxInput)
        ch, b, body = phi.channel, phi.binder, phi.body
        z = self._fresh_binder(b, p, h, body)
        body = body if z == b else apply_subst(body, Substitution.of({b: z}))
        for sigma, ps, hs in self._worlds(p, h, phi):
            bs = apply_subst(body, sigma)
            candidates = hs.names_in_order()
            for q in transitions_with_label(ps, InputLabel(sigma(ch), z)):
                found = any(
                    self.check(apply_subst(q, Substitution.of({z: w})), hs,
                               apply_subst(bs, Substitution.of({z: w})))
                    for w in candidates)
                if not found:
                    found = self.check(q, hs.extend_output(z), bs)
                if not found:
                    return False
        return True


def _well_formed(p: Process, h: History, phi: Formula) -> None:
    missing = (free_names(p) | free_names(phi)) - h.free_names()
    if missing:
        raise IllFormedJudgement(
            f"free names {sorted(missing)} do not occur in history {h}")


def sat(p: Process, h: History, phi: Formula, *, mode: str = OM) -> bool:
    """Does p satisfy phi at history h?"""
    _well_formed(p, h, phi)
    return _Sat(mode).check(p, h, phi)


def sat_top(p: Process, phi: Formula, *, mode: str = OM) -> bool:
    """Satisfaction with all free names recorded as inputs in the past."""
    h = History.inputs(_relevant(p, phi))
    return _Sat(mode).check(p, h, phi)

"""Late labelled transition semantics for finite processes.

`transitions` returns the complete, finite set of transitions in a
deterministic structural order (left to right), with duplicates removed up to
alpha-equivalence.  Residuals of bound labels keep the label's binder free;
the binder is guaranteed fresh for the source process.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    BoundOutLabel, FreeOutLabel, FreshnessViolation, InPrefix, InputLabel,
    Label, LTAU, Match, Name, Nil, Nu, OutPrefix, Par, Prefix, Process,
    Substitution, Sum, TauLabel, TauPrefix, apply_subst, canonical,
    free_names, fresh_name, label_names, rename,
)


@dataclass(frozen=True)
class Transition:
    label: Label
    residual: Process

    def binder(self) -> Name | None:
        match self.label:
            case BoundOutLabel(_, b) | InputLabel(_, b):
                return b
            case _:
                return None


def _rename_binder(t: Transition, avoid: frozenset[Name]) -> Transition:
    b = t.binder()
    if b is None or b not in avoid:
        return t
    nb = fresh_name(b, avoid | free_names(t.residual) | label_names(t.label))
    match t.label:
        case BoundOutLabel(ch, _):
            lbl: Label = BoundOutLabel(ch, nb)
        case InputLabel(ch, _):
            lbl = InputLabel(ch, nb)
        case _:  # pragma: no cover
            return t
    return Transition(lbl, rename(t.residual, b, nb))


def _raw(p: Process) -> list[Transition]:
    match p:
        case Nil():
            return []
        case Prefix(TauPrefix(), body):
            return [Transition(LTAU, body)]
        case Prefix(OutPrefix(ch, pay), body):
            return [Transition(FreeOutLabel(ch, pay), body)]
        case Prefix(InPrefix(ch, b), body):
            return [Transition(InputLabel(ch, b), body)]
        case Match(x, y, body):
            return _raw(body) if x == y else []
        case Sum(l, r):
            return _raw(l) + _raw(r)
        case Nu(b, body):
            out = []
            for t in _raw(body):
                t = _rename_binder(t, frozenset((b,)))
                match t.label:
                    case FreeOutLabel(ch, pay) if pay == b and ch != b:
                        out.append(Transition(BoundOutLabel(ch, b), t.residual))
                    case lbl if b in label_names(lbl):
                        continue
                    case _:
                        out.append(Transition(t.label, Nu(b, t.residual)))
            return out
        case Par(l, r):
            lt, rt = _raw(l), _raw(r)
            out = []
            for t in lt:
                t = _rename_binder(t, free_names(r))
                out.append(Transition(t.label, Par(t.residual, r)))
            for t in rt:
                t = _rename_binder(t, free_names(l))
                out.append(Transition(t.label, Par(l, t.residual)))
            out.extend(_interactions(lt, rt, swap=False))
            out.extend(_interactions(rt, lt, swap=True))
            return out
    raise TypeError(f"not a process: {p!r}")


def _interactions(senders: list[Transition], receivers: list[Transition],
                  swap: bool) -> list[Transition]:
    """Free communications and closes with the sender on the given side."""
    out = []
    for ts in senders:
        match ts.label:
            case FreeOutLabel(ch, pay):
                for tr in receivers:
                    match tr.label:
                        case InputLabel(ch2, b) if ch2 == ch:
                            recv = apply_subst(tr.residual, Substitution.of({b: pay}))
                            pair = (recv, ts.residual) if swap else (ts.residual, recv)
                            out.append(Transition(LTAU, Par(*pair)))
            case BoundOutLabel(ch, z):
                for tr in receivers:
                    match tr.label:
                        case InputLabel(ch2, b) if ch2 == ch:
                            avoid = ((free_names(ts.residual) - {z})
                                     | (free_names(tr.residual) - {b}) | {ch})
                            nz = z if z not in (free_names(tr.residual) - {b}) \
                                else fresh_name(z, avoid | {z, b})
                            send = rename(ts.residual, z, nz) if nz != z else ts.residual
                            recv = rename(tr.residual, b, nz) if nz != b else tr.residual
                            pair = (recv, send) if swap else (send, recv)
                            out.append(Transition(LTAU, Nu(nz, Par(*pair))))
    return out


def _canonical_key(t: Transition):
    b = t.binder()
    if b is None:
        return (t.label, canonical(t.residual))
    res = rename(t.residual, b, "%l") if b != "%l" else t.residual
    match t.label:
        case BoundOutLabel(ch, _):
            return (BoundOutLabel(ch, "%l"), canonical(res))
        case InputLabel(ch, _):
            return (InputLabel(ch, "%l"), canonical(res))


def transitions(p: Process) -> tuple[Transition, ...]:
    """All late transitions of p, deduplicated up to alpha-equivalence.

    Bound labels carry a binder fresh for p.
    """
    fn = free_names(p)
    seen = set()
    out = []
    for t in _raw(p):
        t = _rename_binder(t, fn)
        key = _canonical_key(t)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return tuple(out)


def transitions_with_label(p: Process, label: Label) -> tuple[Process, ...]:
    """Residuals of p under exactly `label`.

    Bound residuals are alpha-adjusted to use the label's binder, which must
    be fresh for p.
    """
    match label:
        case TauLabel() | FreeOutLabel():
            return tuple(t.residual for t in transitions(p) if t.label == label)
        case BoundOutLabel(ch, z) | InputLabel(ch, z):
            if z in free_names(p):
                raise FreshnessViolation(
                    f"binder {z!r} of {label} occurs free in the source process")
            out = []
            want = type(label)
            for t in transitions(p):
                if type(t.label) is want and t.label.channel == ch:
                    b = t.binder()
                    out.append(t.residual if b == z else rename(t.residual, b, z))
            return tuple(out)
    raise TypeError(f"not a label: {label!r}")

"""Grammar-based recognisers for normal forms, clashes and clash-free
normal forms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .reduction import ARG, BODY, FUN, SCRUT, Position, render_position
from .syntax import Abs, App, Case, Data, Match, PData, Term, Var, const_tag, core, free_vars


# ------------------------------------------------------------ normal forms


@dataclass(frozen=True)
class NfClass:
    """``kind`` is one of not-normal, neutral, neutral-data, normal."""

    kind: str
    tag: Optional[str] = None

    def __str__(self) -> str:
        if self.kind in ("not-normal", "neutral"):
            return self.kind
        return f"{self.kind}({self.tag or ''})"


NOT_NORMAL = NfClass("not-normal")
NEUTRAL = NfClass("neutral")


def in_ne(t: Term) -> bool:
    """``ne ::= x | na t | ne[c'(p)/no_¬c'] | case no_¬{c1..cn} of b``"""
    if isinstance(t, Var):
        return True
    if isinstance(t, App):
        return in_na_any(t.fun)
    if isinstance(t, Match):
        return isinstance(t.pattern, PData) and in_ne(t.body) and in_no_not(t.arg, {t.pattern.tag})
    if isinstance(t, Case):
        return in_no_not(t.scrutinee, {b.pattern.tag for b in t.branches})
    return False


def in_na(t: Term, c: str) -> bool:
    """``na_c ::= ne | c(t) | na_c[c'(p)/no_¬c']``"""
    if isinstance(t, Data):
        return t.tag == c
    if isinstance(t, Match) and isinstance(t.pattern, PData):
        if in_no_not(t.arg, {t.pattern.tag}) and in_na(t.body, c):
            return True
    return in_ne(t)


def in_no(t: Term, c: str) -> bool:
    """``no_c ::= na_c | λp.t | no_c[c'(p)/no_¬c']``"""
    if isinstance(t, Abs):
        return True
    if isinstance(t, Match) and isinstance(t.pattern, PData):
        if in_no_not(t.arg, {t.pattern.tag}) and in_no(t.body, c):
            return True
    return in_na(t, c)


def in_na_any(t: Term) -> bool:
    """``na = ∪_c na_c``: it suffices to try the exposed tag."""
    c = const_tag(t)
    return in_na(t, c) if c is not None else in_ne(t)


def in_no_any(t: Term) -> bool:
    c = const_tag(t)
    return in_no(t, c) if c is not None else _in_no_untagged(t)


def _in_no_untagged(t: Term) -> bool:
    # no_c for a term exposing no tag does not depend on c
    if isinstance(t, Abs):
        return True
    if isinstance(t, Match) and isinstance(t.pattern, PData):
        if in_no_not(t.arg, {t.pattern.tag}) and _in_no_untagged(t.body):
            return True
    return in_ne(t)


def in_no_not(t: Term, tags: set[str]) -> bool:
    """``no_¬S``: member of some ``no_c`` with ``c ∉ S``."""
    c = const_tag(t)
    if c is None:
        return _in_no_untagged(t)
    return c not in tags and in_no(t, c)


def nf_class(t: Term) -> NfClass:
    """Most specific normal-form class of ``t``."""
    if in_ne(t):
        return NEUTRAL
    c = const_tag(t)
    if c is not None:
        return NfClass("neutral-data", c) if in_na(t, c) else NOT_NORMAL
    return NfClass("normal") if _in_no_untagged(t) else NOT_NORMAL


def is_normal(t: Term) -> bool:
    return nf_class(t) != NOT_NORMAL


# ------------------------------------------------------------------ clashes


@dataclass(frozen=True)
class ClashReport:
    is_clash: bool
    witness: Optional[Position] = None
    kind: Optional[str] = None

    def __bool__(self) -> bool:
        return self.is_clash

    def __str__(self) -> str:
        return f"yes@{render_position(self.witness)}" if self.is_clash else "no"


# base clash kinds
DATA_APPLIED = "data-applied"
MATCH_ABS = "match-abstraction"
MATCH_TAG = "match-tag-mismatch"
CASE_ABS = "case-abstraction"
CASE_TAG = "case-unmatched-tag"


def base_clash(t: Term) -> Optional[str]:
    if isinstance(t, App):
        return DATA_APPLIED if isinstance(core(t.fun), Data) else None
    if isinstance(t, Match) and isinstance(t.pattern, PData):
        k = core(t.arg)
        if isinstance(k, Abs):
            return MATCH_ABS
        if isinstance(k, Data) and k.tag != t.pattern.tag:
            return MATCH_TAG
        return None
    if isinstance(t, Case):
        k = core(t.scrutinee)
        if isinstance(k, Abs):
            return CASE_ABS
        if isinstance(k, Data) and k.tag not in {b.pattern.tag for b in t.branches}:
            return CASE_TAG
    return None


def is_clash(t: Term) -> ClashReport:
    """Membership in ``Cl``; the witness is the innermost, leftmost base clash."""
    return _clash(t, ())


def _clash(t: Term, pos: Position) -> ClashReport:
    kids: list[tuple[str, Term]] = []
    if isinstance(t, App):
        kids = [(FUN, t.fun)]
    elif isinstance(t, Match):
        kids = [(BODY, t.body), (ARG, t.arg)]
    elif isinstance(t, Case):
        kids = [(SCRUT, t.scrutinee)]
    for step, u in kids:
        r = _clash(u, pos + (step,))
        if r:
            return r
    k = base_clash(t)
    if k is not None:
        return ClashReport(True, pos, k)
    return ClashReport(False)


# ---------------------------------------------------------------- clash-free


def in_ncf(t: Term) -> bool:
    """``ncf ::= x | ncf t | ncf[c(p)/ncf] | case ncf of b``"""
    if isinstance(t, Var):
        return True
    if isinstance(t, App):
        return in_ncf(t.fun)
    if isinstance(t, Match):
        return isinstance(t.pattern, PData) and in_ncf(t.body) and in_ncf(t.arg)
    if isinstance(t, Case):
        return in_ncf(t.scrutinee)
    return False


def is_clash_free_nf(t: Term) -> bool:
    """``cf ::= ncf | λp.t | c(t) | cf[c(p)/ncf]``"""
    if isinstance(t, (Abs, Data)):
        return True
    if isinstance(t, Match) and isinstance(t.pattern, PData):
        if in_ncf(t.arg) and is_clash_free_nf(t.body):
            return True
    return in_ncf(t)


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class Shape:
    kind: str  # abstraction | data
    tag: Optional[str] = None

    def __str__(self) -> str:
        return "abstraction" if self.kind == "abstraction" else f"data({self.tag})"


def closed_nf_shape(t: Term) -> Shape:
    if free_vars(t):
        raise PreconditionViolated("term is open")
    if not is_normal(t):
        raise PreconditionViolated("term is reducible")
    if is_clash(t):
        raise PreconditionViolated("term is a clash")
    if isinstance(t, Abs):
        return Shape("abstraction")
    if isinstance(t, Data):
        return Shape("data", t.tag)
    raise AssertionError("closed clash-free normal form is neither an abstraction nor data")

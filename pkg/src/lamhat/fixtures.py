"""Worked terms and the hand-built derivation used as reference fixtures."""

from __future__ import annotations

from .syntax import Case, Term, Var
from .text import parse
from .types import EMPTY, Context, DataType, mset
from .typesys import (
    Derivation,
    abs_implicit,
    app,
    ax,
    case,
    const,
    empty_many,
    many,
    type_pattern,
)

T0_TEXT = r"(\x. case x of {Pair(x,y) -> y | Triple(x,y,z) -> x}) Triple(C0,C1,C2)"

# (name, source text, note)
TERMS: list[tuple[str, str, str]] = [
    ("t0", T0_TEXT, "evaluates to C0 in 6 steps, counters (1,1,0,4)"),
    ("stuck-match", r"y[Pair(x,y)/Duo(t,u)]", "tag mismatch under a matching closure"),
    ("case-duo", r"case Duo(I,I) of {Pair(x,y) -> y}", "neutral, and a clash"),
    ("case-abs", r"case I of {Pair(x,y) -> y}", "neutral, and a clash"),
    ("pair-redex", r"Pair(I I, I)", "normal data, not a clash"),
    ("pair-applied", r"Pair(I I, I) I", "normal, and a clash"),
    ("reaches-clash", r"((\x.Pair(I,I)) I) I", "evaluates to the clash Pair(I,I) I"),
    ("omega", r"(\x.x x) (\x.x x)", "diverges"),
    ("t1", r"case V(\w.w) of {V(x) -> x C0 | E(y) -> y}", "value branch: u{x/v}"),
    ("t2", r"case E(C0) of {V(x) -> x | E(y) -> y}", "exception returned: r"),
    ("t3", r"case E(C0) of {V(x) -> x | E(y) -> E(y)}", "exception re-raised: E(r)"),
]


def t0() -> Term:
    return parse(T0_TEXT)


def sigma() -> Derivation:
    """The size-11 derivation of ``⊢ t0 : C0``.

    Ψ1's abstraction leaves its variable-pattern premise implicit, as drawn."""
    t = t0()
    c0 = DataType("C0")
    triple = DataType("Triple", (mset(c0), EMPTY, EMPTY))
    body: Case = t.fun.body
    phi1 = many(Var("x"), [ax("x", triple)])
    phi2 = type_pattern(body.branches[1].pattern, Context.of({"x": mset(c0)}))
    psi1 = abs_implicit("x", case(body, 1, phi1, phi2, ax("x", c0)))
    d = t.arg
    psi2 = many(
        d,
        [const("Triple", [many(d.args[0], [const("C0", [])]), empty_many(d.args[1]), empty_many(d.args[2])])],
    )
    return app(psi1, psi2)

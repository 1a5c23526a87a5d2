"""Type derivations: construction, checking, size, split/merge, relevance,
serialisation and clash untypability evidence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .classify import (
    CASE_ABS,
    CASE_TAG,
    DATA_APPLIED,
    MATCH_ABS,
    MATCH_TAG,
    base_clash,
    is_clash,
)
from .reduction import ARG, BODY, FUN, SCRUT, Position, render_position, subterm_at
from .syntax import (
    Abs,
    App,
    Branch,
    Case,
    Data,
    Match,
    PData,
    PVar,
    Pattern,
    Term,
    Var,
    core,
    free_vars,
    pattern_vars,
)
from .text import Registry, parse, parse_pattern, pretty, pretty_pattern
from .types import (
    EMPTY,
    EMPTY_CTX,
    STAR,
    Arrow,
    Context,
    DataType,
    Multiset,
    Star,
    TermType,
    parse_any_type,
    parse_multiset,
)

PATTERN_RULES = ("patv", "patc")
TERM_RULES = ("ax", "many", "abs", "absb", "app", "const", "match", "case")
RULES = PATTERN_RULES + TERM_RULES
UNCOUNTED = ("many", "match")


@dataclass(frozen=True)
class Derivation:
    rule: str
    context: Context
    subject: Union[Term, Pattern]
    type: Union[TermType, Multiset]
    children: tuple[Derivation, ...] = ()
    selected_branch: Optional[int] = None

    def __str__(self) -> str:
        subj = pretty_pattern(self.subject) if self.rule in PATTERN_RULES else pretty(self.subject)
        turn = "||-" if self.rule in PATTERN_RULES else "|-"
        return f"{self.context} {turn} {subj} : {self.type} ({self.rule})"


# ---------------------------------------------------------------- builders


def patv(x: str, m: Multiset) -> Derivation:
    return Derivation("patv", Context.of({x: m}), PVar(x), m)


def patc(tag: str, kids: list[Derivation]) -> Derivation:
    ctx = EMPTY_CTX
    for k in kids:
        ctx = ctx + k.context
    ty = Multiset.of([DataType(tag, tuple(k.type for k in kids))])
    return Derivation("patc", ctx, PData(tag, tuple(k.subject for k in kids)), ty, tuple(kids))


def ax(x: str, sigma: TermType) -> Derivation:
    return Derivation("ax", Context.of({x: Multiset.of([sigma])}), Var(x), sigma)


def many(subject: Term, kids: list[Derivation]) -> Derivation:
    ctx = EMPTY_CTX
    for k in kids:
        ctx = ctx + k.context
    return Derivation("many", ctx, subject, Multiset.of([k.type for k in kids]), tuple(kids))


def empty_many(subject: Term) -> Derivation:
    return Derivation("many", EMPTY_CTX, subject, EMPTY)


def abs_(body: Derivation, pat: Derivation) -> Derivation:
    p = pat.subject
    return Derivation(
        "abs",
        body.context.remove(pattern_vars(p)),
        Abs(p, body.subject),
        Arrow(pat.type, body.type),
        (body, pat),
    )


def abs_implicit(x: str, body: Derivation) -> Derivation:
    """Abstraction over a variable whose ``patv`` premise is left implicit."""
    return Derivation(
        "abs", body.context.remove([x]), Abs(PVar(x), body.subject), Arrow(body.context(x), body.type), (body,)
    )


def absb(t: Abs) -> Derivation:
    return Derivation("absb", EMPTY_CTX, t, STAR)


def app(fun: Derivation, arg: Derivation) -> Derivation:
    assert isinstance(fun.type, Arrow)
    return Derivation("app", fun.context + arg.context, App(fun.subject, arg.subject), fun.type.cod, (fun, arg))


def const(tag: str, kids: list[Derivation]) -> Derivation:
    ctx = EMPTY_CTX
    for k in kids:
        ctx = ctx + k.context
    return Derivation(
        "const", ctx, Data(tag, tuple(k.subject for k in kids)), DataType(tag, tuple(k.type for k in kids)), tuple(kids)
    )


def match(body: Derivation, pat: Derivation, arg: Derivation) -> Derivation:
    p = pat.subject
    return Derivation(
        "match",
        body.context.remove(pattern_vars(p)) + arg.context,
        Match(body.subject, p, arg.subject),
        body.type,
        (body, pat, arg),
    )


def case(template: Case, k: int, scrut: Derivation, pat: Derivation, body: Derivation) -> Derivation:
    bs = list(template.branches)
    bs[k] = Branch(pat.subject, body.subject)
    subj = Case(scrut.subject, tuple(bs))
    ctx = body.context.remove(pattern_vars(pat.subject)) + scrut.context
    return Derivation("case", ctx, subj, body.type, (scrut, pat, body), k)


def type_pattern(p: Pattern, ctx: Context) -> Derivation:
    """The unique pattern derivation concluding ``ctx|var(p) ||- p : M``."""
    if isinstance(p, PVar):
        return patv(p.name, ctx(p.name))
    return patc(p.tag, [type_pattern(q, ctx) for q in p.args])


# -------------------------------------------------------------------- size


def size(d: Derivation) -> int:
    own = 0 if d.rule in UNCOUNTED else 1
    return own + sum(size(c) for c in d.children)


# ----------------------------------------------------------------- checker


@dataclass(frozen=True)
class RuleViolation:
    path: tuple[int, ...]
    rule: str
    message: str

    def __str__(self) -> str:
        where = "/".join(map(str, self.path)) or "root"
        return f"{where} ({self.rule}): {self.message}"


def check_derivation(d: Derivation) -> list[RuleViolation]:
    """All rule violations, bottom-up; empty iff ``d`` is a valid derivation."""
    out: list[RuleViolation] = []
    arities: dict[str, int] = {}
    _check(d, (), out, arities)
    return out


def _is_mset(x) -> bool:
    return isinstance(x, Multiset)


def _check(d: Derivation, path, out: list, arities: dict) -> None:
    for i, c in enumerate(d.children):
        _check(c, path + (i,), out, arities)

    def bad(msg: str) -> None:
        out.append(RuleViolation(path, d.rule, msg))

    def kids(n: int) -> bool:
        if len(d.children) != n:
            bad(f"expected {n} premises, got {len(d.children)}")
            return False
        return True

    def arity(tag: str, n: int) -> None:
        if arities.setdefault(tag, n) != n:
            bad(f"tag {tag} used with arities {arities[tag]} and {n}")

    def expect_ctx(ctx: Context) -> None:
        if d.context != ctx:
            bad(f"context should be {{{ctx}}}, found {{{d.context}}}")

    def is_pattern_node(c: Derivation) -> bool:
        return c.rule in PATTERN_RULES

    def term_judgment(c: Derivation, subj, what: str) -> bool:
        if c.rule in PATTERN_RULES or _is_mset(c.type):
            bad(f"{what} premise must assign a term type")
            return False
        if c.subject != subj:
            bad(f"{what} premise types {pretty(c.subject)}, expected {pretty(subj)}")
            return False
        return True

    def mset_judgment(c: Derivation, subj, what: str) -> bool:
        if c.rule != "many":
            bad(f"{what} premise must be a multiset judgment (many)")
            return False
        if c.subject != subj:
            bad(f"{what} premise types {pretty(c.subject)}, expected {pretty(subj)}")
            return False
        return True

    def pattern_judgment(c: Derivation, p: Pattern, body_ctx: Context, what: str) -> bool:
        if not is_pattern_node(c):
            bad(f"{what} premise must be a pattern judgment")
            return False
        if c.subject != p:
            bad(f"{what} premise types pattern {pretty_pattern(c.subject)}, expected {pretty_pattern(p)}")
            return False
        want = body_ctx.restrict(pattern_vars(p))
        if c.context != want:
            bad(f"pattern context should be {{{want}}}, found {{{c.context}}}")
            return False
        return True

    r, s, ty = d.rule, d.subject, d.type
    if r not in RULES:
        bad(f"unknown rule {r!r}")
        return
    if r in PATTERN_RULES:
        if not isinstance(s, (PVar, PData)):
            bad("pattern rule with a term subject")
            return
        if not _is_mset(ty):
            bad("pattern judgments assign multiset types")
            return
    else:
        if not isinstance(s, (Var, Abs, App, Match, Data, Case)):
            bad("term rule with a pattern subject")
            return
        if r == "many":
            if not _is_mset(ty):
                bad("many concludes a multiset type")
                return
        elif _is_mset(ty):
            bad("rule concludes a multiset where a term type is required")
            return
    if r != "case" and d.selected_branch is not None:
        bad("selected_branch only applies to case")

    if r == "patv":
        if not isinstance(s, PVar):
            bad("patv types a variable pattern")
        elif kids(0):
            expect_ctx(Context.of({s.name: ty}))
    elif r == "patc":
        if not isinstance(s, PData):
            bad("patc types a data pattern")
        elif kids(len(s.args)):
            arity(s.tag, len(s.args))
            ok = True
            for c, q in zip(d.children, s.args):
                if not is_pattern_node(c) or c.subject != q:
                    bad(f"premise should type subpattern {pretty_pattern(q)}")
                    ok = False
            if ok:
                ctx = EMPTY_CTX
                for c in d.children:
                    ctx = ctx + c.context
                expect_ctx(ctx)
                want = Multiset.of([DataType(s.tag, tuple(c.type for c in d.children))])
                if ty != want:
                    bad(f"type should be {want}, found {ty}")
    elif r == "ax":
        if not isinstance(s, Var):
            bad("ax types a variable")
        elif kids(0):
            expect_ctx(Context.of({s.name: Multiset.of([ty])}))
    elif r == "many":
        ok = all(term_judgment(c, s, "many") for c in d.children)
        if ok:
            ctx = EMPTY_CTX
            for c in d.children:
                ctx = ctx + c.context
            expect_ctx(ctx)
            want = Multiset.of([c.type for c in d.children])
            if ty != want:
                bad(f"multiset mismatch: premises give {want}, conclusion says {ty}")
    elif r == "abs":
        if not isinstance(s, Abs):
            bad("abs types an abstraction")
        elif len(d.children) == 1 and isinstance(s.pattern, PVar):
            body = d.children[0]
            if term_judgment(body, s.body, "body"):
                x = s.pattern.name
                expect_ctx(body.context.remove([x]))
                want = Arrow(body.context(x), body.type)
                if ty != want:
                    bad(f"type should be {want}, found {ty}")
        elif kids(2):
            body, pat = d.children
            if term_judgment(body, s.body, "body") and pattern_judgment(pat, s.pattern, body.context, "pattern"):
                expect_ctx(body.context.remove(pattern_vars(s.pattern)))
                want = Arrow(pat.type, body.type)
                if ty != want:
                    bad(f"type should be {want}, found {ty}")
    elif r == "absb":
        if not isinstance(s, Abs):
            bad("absb types an abstraction")
        elif kids(0):
            expect_ctx(EMPTY_CTX)
            if not isinstance(ty, Star):
                bad("absb concludes type *")
    elif r == "app":
        if not isinstance(s, App):
            bad("app types an application")
        elif kids(2):
            f, a = d.children
            if term_judgment(f, s.fun, "function") and mset_judgment(a, s.arg, "argument"):
                if not isinstance(f.type, Arrow):
                    bad(f"function premise must have an arrow type, found {f.type}")
                else:
                    if f.type.dom != a.type:
                        bad(f"multiset mismatch: function expects {f.type.dom}, argument gives {a.type}")
                    if ty != f.type.cod:
                        bad(f"type should be {f.type.cod}, found {ty}")
                expect_ctx(f.context + a.context)
    elif r == "const":
        if not isinstance(s, Data):
            bad("const types a data term")
        elif kids(len(s.args)):
            arity(s.tag, len(s.args))
            if all(mset_judgment(c, a, "argument") for c, a in zip(d.children, s.args)):
                ctx = EMPTY_CTX
                for c in d.children:
                    ctx = ctx + c.context
                expect_ctx(ctx)
                want = DataType(s.tag, tuple(c.type for c in d.children))
                if ty != want:
                    bad(f"type should be {want}, found {ty}")
    elif r == "match":
        if not isinstance(s, Match):
            bad("match types a matching closure")
        elif kids(3):
            body, pat, arg = d.children
            if (
                term_judgment(body, s.body, "body")
                and pattern_judgment(pat, s.pattern, body.context, "pattern")
                and mset_judgment(arg, s.arg, "argument")
            ):
                if pat.type != arg.type:
                    bad(f"multiset mismatch: pattern has {pat.type}, argument has {arg.type}")
                if ty != body.type:
                    bad(f"type should be {body.type}, found {ty}")
                expect_ctx(body.context.remove(pattern_vars(s.pattern)) + arg.context)
    elif r == "case":
        k = d.selected_branch
        if not isinstance(s, Case):
            bad("case types a case expression")
        elif k is None or not (0 <= k < len(s.branches)):
            bad("case needs a valid selected_branch")
        elif kids(3):
            scr, pat, body = d.children
            br = s.branches[k]
            if (
                mset_judgment(scr, s.scrutinee, "scrutinee")
                and term_judgment(body, br.body, "branch")
                and pattern_judgment(pat, br.pattern, body.context, "pattern")
            ):
                if pat.type != scr.type:
                    bad(f"multiset mismatch: branch pattern has {pat.type}, scrutinee has {scr.type}")
                if ty != body.type:
                    bad(f"type should be {body.type}, found {ty}")
                expect_ctx(body.context.remove(pattern_vars(br.pattern)) + scr.context)


# ------------------------------------------------------------- relevance


def relevance_check(d: Derivation) -> list[RuleViolation]:
    out: list[RuleViolation] = []
    _relevance(d, (), out)
    return out


def _relevance(d: Derivation, path, out) -> None:
    allowed = set(pattern_vars(d.subject)) if d.rule in PATTERN_RULES else free_vars(d.subject)
    extra = d.context.dom() - allowed
    if extra:
        out.append(RuleViolation(path, d.rule, f"context mentions non-free variables {sorted(extra)}"))
    for i, c in enumerate(d.children):
        _relevance(c, path + (i,), out)


# ------------------------------------------------------------ split/merge


class InvalidPartition(ValueError):
    pass


def split(d: Derivation, parts: list[Multiset]) -> list[Derivation]:
    """Split a ``many`` derivation along a multiset partition of its type."""
    if d.rule != "many":
        raise InvalidPartition("only many-rooted derivations can be split")
    total = EMPTY
    for p in parts:
        total = total + p
    if total != d.type:
        raise InvalidPartition(f"{' + '.join(map(str, parts))} is not a partition of {d.type}")
    pool = list(d.children)
    out = []
    for p in parts:
        taken = []
        for sigma in p.items:
            i = next(i for i, c in enumerate(pool) if c.type == sigma)
            taken.append(pool.pop(i))
        out.append(many(d.subject, taken))
    return out


def merge(ds: list[Derivation], subject: Term | None = None) -> Derivation:
    if not ds:
        if subject is None:
            raise InvalidPartition("merging nothing needs a subject")
        return empty_many(subject)
    subj = ds[0].subject
    if any(x.rule != "many" or x.subject != subj for x in ds):
        raise InvalidPartition("merge expects many derivations of one subject")
    return many(subj, [c for x in ds for c in x.children])


# --------------------------------------------------------- serialisation


def to_json(d: Derivation) -> dict:
    subj = pretty_pattern(d.subject) if d.rule in PATTERN_RULES else pretty(d.subject)
    out = {
        "rule": d.rule,
        "conclusion": {"context": d.context.to_json(), "subject": subj, "type": str(d.type)},
        "children": [to_json(c) for c in d.children],
    }
    if d.selected_branch is not None:
        out["selected_branch"] = d.selected_branch
    return out


def from_json(obj: dict, registry: Registry | None = None) -> Derivation:
    reg = registry if registry is not None else Registry()
    return _from_json(obj, reg)


def _from_json(obj: dict, reg: Registry) -> Derivation:
    rule = obj["rule"]
    concl = obj["conclusion"]
    if rule in PATTERN_RULES:
        subj = parse_pattern(concl["subject"], reg)
    else:
        subj = parse(concl["subject"], reg)
    ctx = Context.of({k: parse_multiset(v) for k, v in concl.get("context", {}).items()})
    ty = parse_any_type(concl["type"])
    kids = tuple(_from_json(c, reg) for c in obj.get("children", []))
    return Derivation(rule, ctx, subj, ty, kids, obj.get("selected_branch"))


def dumps(d: Derivation) -> str:
    return json.dumps(to_json(d), indent=2, ensure_ascii=False)


def loads(text: str) -> Derivation:
    return from_json(json.loads(text))


# ------------------------------------------------------ clash evidence


class NotAClash(ValueError):
    pass


class ClashTypable(AssertionError):
    """The clash sits under a variable-pattern argument, which may be typed
    by the empty multiset, so the untypability argument does not apply."""

    def __init__(self, msg: str, derivation: Derivation | None = None):
        super().__init__(msg)
        self.derivation = derivation


@dataclass(frozen=True)
class ClashEvidence:
    kind: str
    position: Position
    core: Term
    demands: list[str] = field(default_factory=list)
    reason: str = ""

    def __str__(self) -> str:
        chain = "; ".join(self.demands)
        return f"{self.kind} at {render_position(self.position)}: {self.reason}" + (f" ({chain})" if chain else "")


_REASONS = {
    DATA_APPLIED: "a data term can only be assigned a data type, but app needs an arrow type",
    MATCH_ABS: "the data pattern forces a data type, but an abstraction only gets an arrow type or *",
    MATCH_TAG: "the data pattern forces a data type with its own tag, the argument has another tag",
    CASE_ABS: "branch patterns force data types, but an abstraction only gets an arrow type or *",
    CASE_TAG: "the scrutinee's tag is not among the branch tags, so no branch pattern has its type",
}


def clash_positions(t: Term) -> list[tuple[Position, str]]:
    """Every base clash reachable through the clash closure, outermost first."""
    out: list[tuple[Position, str]] = []

    def go(u: Term, pos: Position) -> None:
        k = base_clash(u)
        if k is not None:
            out.append((pos, k))
        if isinstance(u, App):
            go(u.fun, pos + (FUN,))
        elif isinstance(u, Match):
            go(u.body, pos + (BODY,))
            go(u.arg, pos + (ARG,))
        elif isinstance(u, Case):
            go(u.scrutinee, pos + (SCRUT,))

    go(t, ())
    return out


def _demands(t: Term, pos: Position) -> Optional[list[str]]:
    """Why each enclosing node forces a term type on the next subterm; None
    if some step crosses the argument of a variable-pattern closure."""
    out = []
    u = t
    for s in pos:
        if s == FUN:
            out.append("app: the function premise needs an arrow type")
            u = u.fun
        elif s == BODY:
            out.append("match: the body premise has the conclusion's term type")
            u = u.body
        elif s == ARG:
            if isinstance(u.pattern, PVar):
                return None
            out.append("match: a data pattern types its argument with a singleton multiset")
            u = u.arg
        else:
            out.append("case: the scrutinee gets the singleton multiset of a branch pattern")
            u = u.scrutinee
    return out


def assert_clash_untypable(t: Term) -> ClashEvidence:
    """Structural reason why no ``Γ ⊢ t : σ`` exists, following the case
    analysis of the untypability argument."""
    positions = clash_positions(t)
    if not positions:
        raise NotAClash("term is not a clash")
    for pos, kind in positions:
        dem = _demands(t, pos)
        if dem is not None:
            return ClashEvidence(kind, pos, subterm_at(t, pos), dem, _REASONS[kind])
    pos, kind = positions[0]
    raise ClashTypable(
        f"every base clash ({kind} at {render_position(pos)}) lies in the argument of a "
        "variable-pattern closure, which the empty multiset may type"
    )

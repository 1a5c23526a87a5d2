"""Derivation transformers behind the typability characterisation:
weighted (anti-)substitution, subject reduction and expansion along the
deterministic strategy, and the fuel-bounded typability oracle.

Every transformer first renames its input apart (all binders distinct and
distinct from free variables) so the constructions can use plain
syntactic replacement, then realigns the result to the exact target term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .classify import is_clash, is_clash_free_nf
from .reduction import Normal, Position, Trace, evaluate, root_rule, step_det
from .syntax import (
    Abs,
    App,
    Case,
    Data,
    Match,
    PData,
    PVar,
    Pattern,
    Term,
    Var,
    alpha_eq,
    const_tag,
    decompose_list_context,
    free_vars,
    is_abs,
    pattern_vars,
    rename_apart,
    substitute,
)
from .types import EMPTY, Multiset
from .typesys import (
    Derivation,
    abs_,
    abs_implicit,
    absb,
    app,
    ax,
    case,
    const,
    empty_many,
    many,
    match,
    merge,
    patc,
    patv,
    size,
    split,
)


class MultisetMismatch(ValueError):
    pass


class SubjectMismatch(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


class OpenTerm(ValueError):
    pass


# ------------------------------------------------------------- alignment


def align(d: Derivation, target: Union[Term, Pattern], ren: Optional[dict] = None) -> Derivation:
    """Rename the bound variables of ``d`` so that its subject is ``target``.

    ``target`` must be alpha-equivalent to ``d.subject``.
    """
    ren = ren or {}
    ctx = d.context.rename(ren) if ren else d.context
    r = d.rule
    kids = d.children
    if r == "patv":
        return Derivation(r, ctx, target, d.type)
    if r == "patc":
        return Derivation(r, ctx, target, d.type, tuple(align(c, q, ren) for c, q in zip(kids, target.args)))
    if r in ("ax", "absb"):
        return Derivation(r, ctx, target, d.type)
    if r == "many":
        return Derivation(r, ctx, target, d.type, tuple(align(c, target, ren) for c in kids))
    if r == "app":
        return Derivation(r, ctx, target, d.type, (align(kids[0], target.fun, ren), align(kids[1], target.arg, ren)))
    if r == "const":
        return Derivation(r, ctx, target, d.type, tuple(align(c, a, ren) for c, a in zip(kids, target.args)))
    if r == "abs":
        inner = _extend(ren, d.subject.pattern, target.pattern)
        new = [align(kids[0], target.body, inner)]
        if len(kids) == 2:
            new.append(align(kids[1], target.pattern, inner))
        return Derivation(r, ctx, target, d.type, tuple(new))
    if r == "match":
        inner = _extend(ren, d.subject.pattern, target.pattern)
        return Derivation(
            r,
            ctx,
            target,
            d.type,
            (align(kids[0], target.body, inner), align(kids[1], target.pattern, inner), align(kids[2], target.arg, ren)),
        )
    if r == "case":
        k = d.selected_branch
        inner = _extend(ren, d.subject.branches[k].pattern, target.branches[k].pattern)
        return Derivation(
            r,
            ctx,
            target,
            d.type,
            (
                align(kids[0], target.scrutinee, ren),
                align(kids[1], target.branches[k].pattern, inner),
                align(kids[2], target.branches[k].body, inner),
            ),
            k,
        )
    raise ValueError(f"unknown rule {r}")


def _extend(ren: dict, old: Pattern, new: Pattern) -> dict:
    out = dict(ren)
    out.update(zip(pattern_vars(old), pattern_vars(new)))
    return out


def realign(d: Derivation, target: Term) -> Derivation:
    if d.subject == target:
        return d
    if not alpha_eq(d.subject, target):
        raise SubjectMismatch("derivation subject is not alpha-equivalent to the target term")
    return align(d, target)


# ---------------------------------------------------- weighted substitution


def weighted_substitute(phi_t: Derivation, x: str, phi_u: Derivation) -> Derivation:
    """From ``Γ; x:M ⊢ t : σ`` and ``Δ ⊢ u : M`` build ``Γ+Δ ⊢ t{x/u} : σ``
    of size ``size(phi_t) + size(phi_u) - |M|``."""
    if phi_u.rule != "many":
        raise MultisetMismatch("the substituted derivation must be a multiset (many) judgment")
    if phi_t.context(x) != phi_u.type:
        raise MultisetMismatch(f"{x} has type {phi_t.context(x)} but the argument is typed {phi_u.type}")
    t, u = phi_t.subject, phi_u.subject
    t_b = rename_apart(t, free_vars(u) | {x})
    res = _ws(align(phi_t, t_b), x, phi_u)
    return realign(res, substitute(t, x, u))


def _ws(d: Derivation, x: str, du: Derivation) -> Derivation:
    u = du.subject
    r = d.rule
    if r == "ax":
        if d.subject.name == x:
            return du.children[0]
        return d
    if r == "absb":
        return absb(substitute(d.subject, x, u))
    if r == "abs":
        body = _ws(d.children[0], x, du)
        if len(d.children) == 1:
            return abs_implicit(d.subject.pattern.name, body)
        return abs_(body, d.children[1])
    parts = _term_children(d)
    pieces = split(du, [c.context(x) for c in parts])
    new = [_ws(c, x, p) for c, p in zip(parts, pieces)]
    if r == "many":
        return many(substitute(d.subject, x, u), new)
    if r == "app":
        return app(new[0], new[1])
    if r == "const":
        return const(d.subject.tag, new)
    if r == "match":
        return match(new[0], d.children[1], new[1])
    if r == "case":
        return case(substitute(d.subject, x, u), d.selected_branch, new[0], d.children[1], new[1])
    raise ValueError(f"rule {r} cannot type a term")


def _term_children(d: Derivation) -> list[Derivation]:
    if d.rule == "match":
        return [d.children[0], d.children[2]]
    if d.rule == "case":
        return [d.children[0], d.children[2]]
    return list(d.children)


# ---------------------------------------------------- anti-substitution


def anti_substitute(phi: Derivation, t: Term, x: str, u: Term) -> tuple[Derivation, Derivation, Multiset]:
    """Split a derivation of ``t{x/u}`` into ``Σ; x:M ⊢ t`` and ``Δ ⊢ u : M``."""
    target = substitute(t, x, u)
    if not alpha_eq(phi.subject, target):
        raise SubjectMismatch("the derivation does not type t{x/u}")
    t_b = rename_apart(t, free_vars(u) | {x})
    phi_b = align(phi, substitute(t_b, x, u))
    dt, du = _anti(phi_b, t_b, x, u)
    return realign(dt, t), du, du.type


def _anti(d: Derivation, t: Term, x: str, u: Term) -> tuple[Derivation, Derivation]:
    r = d.rule
    if isinstance(t, Var) and t.name == x:
        if r == "many":
            return many(t, [ax(x, c.type) for c in d.children]), d
        return ax(x, d.type), many(u, [d])
    if isinstance(t, Var):
        return d, empty_many(u)
    if r == "many":
        pairs = [_anti(c, t, x, u) for c in d.children]
        return many(t, [p[0] for p in pairs]), merge([p[1] for p in pairs], u)
    if r == "absb":
        return absb(t), empty_many(u)
    if r == "abs":
        bt, bu = _anti(d.children[0], t.body, x, u)
        if len(d.children) == 1:
            return abs_implicit(t.pattern.name, bt), bu
        return abs_(bt, d.children[1]), bu
    if r == "app":
        (ft, fu), (at, au) = _anti(d.children[0], t.fun, x, u), _anti(d.children[1], t.arg, x, u)
        return app(ft, at), merge([fu, au], u)
    if r == "const":
        pairs = [_anti(c, a, x, u) for c, a in zip(d.children, t.args)]
        return const(t.tag, [p[0] for p in pairs]), merge([p[1] for p in pairs], u)
    if r == "match":
        (bt, bu), (at, au) = _anti(d.children[0], t.body, x, u), _anti(d.children[2], t.arg, x, u)
        return match(bt, d.children[1], at), merge([bu, au], u)
    if r == "case":
        k = d.selected_branch
        (st, su) = _anti(d.children[0], t.scrutinee, x, u)
        (bt, bu) = _anti(d.children[2], t.branches[k].body, x, u)
        return case(t, k, st, d.children[1], bt), merge([su, bu], u)
    raise ValueError(f"rule {r} cannot type a term")


# ------------------------------------------------------ subject reduction


def _peel(d: Derivation, n: int) -> tuple[list[tuple[Derivation, Derivation]], Derivation]:
    """Strip ``n`` match frames; returns (frames outermost first, core)."""
    frames = []
    for _ in range(n):
        if d.rule != "match":
            raise SubjectMismatch("expected a match frame")
        frames.append((d.children[1], d.children[2]))
        d = d.children[0]
    return frames, d


def _rewrap(d: Derivation, frames: list[tuple[Derivation, Derivation]]) -> Derivation:
    for pat, arg in reversed(frames):
        d = match(d, pat, arg)
    return d


def _only(d: Derivation) -> Derivation:
    if d.rule != "many" or len(d.children) != 1:
        raise SubjectMismatch("expected a singleton multiset judgment")
    return d.children[0]


def _distribute(d: Derivation, pats: tuple[Derivation, ...], data: Derivation) -> Derivation:
    """``d[p1/s1]...[pn/sn]`` from a const derivation of ``c(s1..sn)``."""
    frames, k = _peel(data, len(decompose_list_context(data.subject)[0]))
    if k.rule != "const":
        raise SubjectMismatch("expected a const derivation")
    for pi, si in zip(pats, k.children):
        d = match(d, pi, si)
    return _rewrap(d, frames)


def transport_step(phi: Derivation) -> Derivation:
    """Derivation of the deterministic reduct, strictly smaller, same
    context and type."""
    t = phi.subject
    r = step_det(t)
    if r is None:
        raise PreconditionViolated("subject is in normal form")
    t_b = rename_apart(t)
    res = _transport(align(phi, t_b))
    return realign(res, r[0])


def _dB(f: Derivation, a: Derivation) -> Derivation:
    if f.rule == "match":
        return match(_dB(f.children[0], a), f.children[1], f.children[2])
    if f.rule != "abs":
        raise SubjectMismatch("applied abstraction must be typed by abs")
    body = f.children[0]
    if len(f.children) == 1:
        x = f.subject.pattern.name
        pat = patv(x, body.context(x))
    else:
        pat = f.children[1]
    return match(body, pat, a)


def _transport(d: Derivation) -> Derivation:
    t = d.subject
    if isinstance(t, App):
        f, a = d.children
        if is_abs(t.fun):
            return _dB(f, a)
        return app(_transport(f), a)
    if isinstance(t, Match):
        body, pat, arg = d.children
        if isinstance(t.pattern, PVar):
            return _ws(body, t.pattern.name, arg)
        if const_tag(t.arg) == t.pattern.tag:
            return _distribute(body, pat.children, _only(arg))
        if step_det(t.body) is not None:
            return match(_transport(body), pat, arg)
        return match(body, pat, _many1(_transport(_only(arg))))
    if isinstance(t, Case):
        scr, pat, body = d.children
        if root_rule(t) == "c":
            return _distribute(body, pat.children, _only(scr))
        return case(t, d.selected_branch, _many1(_transport(_only(scr))), pat, body)
    raise PreconditionViolated("no step applies")


def _many1(d: Derivation) -> Derivation:
    return many(d.subject, [d])


# ------------------------------------------------------- subject expansion


def expand_step(phi_next: Derivation, t: Term) -> Derivation:
    """Derivation of ``t`` from one of its deterministic reduct; strictly
    larger, same context and type."""
    r = step_det(t)
    if r is None:
        raise PreconditionViolated("term is in normal form")
    if not alpha_eq(phi_next.subject, r[0]):
        raise SubjectMismatch("derivation does not type the reduct of t")
    t_b = rename_apart(t)
    nxt = step_det(t_b)[0]
    res = _expand(align(phi_next, nxt), t_b)
    return realign(res, t)


def _expand(d: Derivation, t: Term) -> Derivation:
    if isinstance(t, App):
        if is_abs(t.fun):
            frames, inner = _peel(d, len(decompose_list_context(t.fun)[0]))
            body, pat, arg = inner.children
            return app(_rewrap(abs_(body, pat), frames), arg)
        f, a = d.children
        return app(_expand(f, t.fun), a)
    if isinstance(t, Match):
        if isinstance(t.pattern, PVar):
            x = t.pattern.name
            dt, du = _anti(d, t.body, x, t.arg)
            return match(dt, patv(x, du.type), du)
        if const_tag(t.arg) == t.pattern.tag:
            frames, inner = _peel(d, len(decompose_list_context(t.arg)[0]))
            body, pats, args = _undistribute(inner, len(t.pattern.args))
            data = _rewrap(const(t.pattern.tag, args), frames)
            return match(body, patc(t.pattern.tag, pats), _many1(data))
        body, pat, arg = d.children
        if step_det(t.body) is not None:
            return match(_expand(body, t.body), pat, arg)
        return match(body, pat, _many1(_expand(_only(arg), t.arg)))
    if isinstance(t, Case):
        if root_rule(t) == "c":
            tag = const_tag(t.scrutinee)
            k = next(i for i, b in enumerate(t.branches) if b.pattern.tag == tag)
            frames, inner = _peel(d, len(decompose_list_context(t.scrutinee)[0]))
            body, pats, args = _undistribute(inner, len(t.branches[k].pattern.args))
            data = _rewrap(const(tag, args), frames)
            return case(t, k, _many1(data), patc(tag, pats), body)
        scr, pat, body = d.children
        return case(t, d.selected_branch, _many1(_expand(_only(scr), t.scrutinee)), pat, body)
    raise PreconditionViolated("no step applies")


def _undistribute(d: Derivation, n: int):
    frames, body = _peel(d, n)
    frames.reverse()
    return body, [p for p, _ in frames], [a for _, a in frames]


# ----------------------------------------------------------- normal forms


def type_cf_normal_form(t: Term) -> Derivation:
    """Size-1 derivation of a closed clash-free normal form."""
    if free_vars(t):
        raise PreconditionViolated("term is open")
    if step_det(t) is not None or not is_clash_free_nf(t):
        raise PreconditionViolated("term is not a clash-free normal form")
    if isinstance(t, Abs):
        return absb(t)
    if isinstance(t, Data):
        return const(t.tag, [empty_many(a) for a in t.args])
    raise PreconditionViolated("closed clash-free normal form expected")


# --------------------------------------------------------------- oracle


@dataclass
class Typable:
    derivation: Derivation
    bound: int
    steps: int
    trace: Trace


@dataclass
class Untypable:
    normal_form: Term
    witness: Position
    steps: int
    trace: Trace


@dataclass
class Unknown:
    fuel: int


SynthesisOutcome = Union[Typable, Untypable, Unknown]


def synthesize(t: Term, fuel: int = 10000) -> SynthesisOutcome:
    if free_vars(t):
        raise OpenTerm("synthesis is only defined for closed terms")
    res = evaluate(t, fuel)
    if not isinstance(res, Normal):
        return Unknown(fuel)
    rep = is_clash(res.term)
    if rep:
        return Untypable(res.term, rep.witness, len(res.trace), res.trace)
    phi = type_cf_normal_form(res.term)
    for s in reversed(res.trace.steps):
        phi = expand_step(phi, s.before)
    return Typable(phi, size(phi), len(res.trace), res.trace)


def transport_sizes(phi: Derivation) -> list[int]:
    """Sizes along forward transport until the subject is normal."""
    out = [size(phi)]
    while step_det(phi.subject) is not None:
        phi = transport_step(phi)
        out.append(size(phi))
    return out

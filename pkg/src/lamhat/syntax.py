"""Terms, patterns, binding structure and capture-avoiding substitution."""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Union


def _node(cls):
    """Frozen dataclass with a cached structural hash; terms are hashed
    constantly when deduplicating states."""
    cls = dataclass(frozen=True)(cls)
    names = tuple(f.name for f in fields(cls))

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return NotImplemented
        if hash(self) != hash(other):
            return False
        return all(getattr(self, n) == getattr(other, n) for n in names)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


# ---------------------------------------------------------------- patterns


@_node
class PVar:
    name: str


@_node
class PData:
    tag: str
    args: tuple[Pattern, ...] = ()


Pattern = Union[PVar, PData]


# ------------------------------------------------------------------- terms


@_node
class Var:
    name: str


@_node
class Abs:
    pattern: Pattern
    body: Term


@_node
class App:
    fun: Term
    arg: Term


@_node
class Match:
    """The matching closure ``body[pattern/arg]``."""

    body: Term
    pattern: Pattern
    arg: Term


@_node
class Data:
    tag: str
    args: tuple[Term, ...] = ()


@_node
class Branch:
    pattern: PData
    body: Term


@_node
class Case:
    scrutinee: Term
    branches: tuple[Branch, ...]


Term = Union[Var, Abs, App, Match, Data, Case]

IDENTITY = Abs(PVar("x"), Var("x"))


# ---------------------------------------------------------- variable sets


def pattern_vars(p: Pattern) -> list[str]:
    """Variables of ``p`` in left-to-right order."""
    if isinstance(p, PVar):
        return [p.name]
    out: list[str] = []
    for q in p.args:
        out.extend(pattern_vars(q))
    return out


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Abs):
        return free_vars(t.body) - set(pattern_vars(t.pattern))
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, Match):
        return (free_vars(t.body) - set(pattern_vars(t.pattern))) | free_vars(t.arg)
    if isinstance(t, Data):
        return frozenset().union(*(free_vars(a) for a in t.args))
    out = set(free_vars(t.scrutinee))
    for b in t.branches:
        out |= free_vars(b.body) - set(pattern_vars(b.pattern))
    return frozenset(out)


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, free or bound."""
    acc: set[str] = set()
    _collect_names(t, acc)
    return acc


def _collect_names(t: Term, acc: set[str]) -> None:
    if isinstance(t, Var):
        acc.add(t.name)
    elif isinstance(t, Abs):
        acc.update(pattern_vars(t.pattern))
        _collect_names(t.body, acc)
    elif isinstance(t, App):
        _collect_names(t.fun, acc)
        _collect_names(t.arg, acc)
    elif isinstance(t, Match):
        acc.update(pattern_vars(t.pattern))
        _collect_names(t.body, acc)
        _collect_names(t.arg, acc)
    elif isinstance(t, Data):
        for a in t.args:
            _collect_names(a, acc)
    else:
        _collect_names(t.scrutinee, acc)
        for b in t.branches:
            acc.update(pattern_vars(b.pattern))
            _collect_names(b.body, acc)


def is_closed(t: Term) -> bool:
    return not free_vars(t)


# ------------------------------------------------------------ fresh names

_TRAILING_DIGITS = re.compile(r"\d+$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """Smallest ``stem<N>`` (N >= 1) not in ``avoid``; deterministic."""
    avoid = set(avoid)
    stem = _TRAILING_DIGITS.sub("", base) or "v"
    n = 1
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


# --------------------------------------------------- renaming in patterns


def rename_pattern(p: Pattern, ren: Mapping[str, str]) -> Pattern:
    if isinstance(p, PVar):
        return PVar(ren.get(p.name, p.name))
    return PData(p.tag, tuple(rename_pattern(q, ren) for q in p.args))


def _freshen_binder(p: Pattern, body: Term, avoid: set[str]) -> tuple[Pattern, Term]:
    """Rename the variables of ``p`` that lie in ``avoid``, inside ``body`` too."""
    clash = [v for v in pattern_vars(p) if v in avoid]
    if not clash:
        return p, body
    used = set(avoid) | all_names(body) | set(pattern_vars(p))
    ren: dict[str, str] = {}
    for v in clash:
        new = fresh_name(v, used)
        used.add(new)
        ren[v] = new
    return rename_pattern(p, ren), rename_free(body, ren)


def rename_free(t: Term, ren: Mapping[str, str]) -> Term:
    """Rename free variables by a variable-to-fresh-variable map."""
    if not ren:
        return t
    return substitute_many(t, {k: Var(v) for k, v in ren.items()})


# ------------------------------------------------------------ substitution


def substitute(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding ``t{x/u}``."""
    return substitute_many(t, {x: u})


def substitute_many(t: Term, sub: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    sub = {k: v for k, v in sub.items() if not (isinstance(v, Var) and v.name == k)}
    if not sub:
        return t
    fvs: set[str] = set()
    for v in sub.values():
        fvs |= free_vars(v)
    return _subst(t, sub, fvs)


def _under_binder(p: Pattern, body: Term, sub: dict[str, Term], fvs: set[str]):
    bound = set(pattern_vars(p))
    inner = {k: v for k, v in sub.items() if k not in bound}
    if not inner:
        return p, body
    if any(k in free_vars(body) for k in inner):
        inner_fvs: set[str] = set()
        for v in inner.values():
            inner_fvs |= free_vars(v)
        p, body = _freshen_binder(p, body, inner_fvs | set(inner))
        return p, _subst(body, inner, inner_fvs)
    return p, body


def _subst(t: Term, sub: dict[str, Term], fvs: set[str]) -> Term:
    if isinstance(t, Var):
        return sub.get(t.name, t)
    if isinstance(t, Abs):
        p, b = _under_binder(t.pattern, t.body, sub, fvs)
        return Abs(p, b)
    if isinstance(t, App):
        return App(_subst(t.fun, sub, fvs), _subst(t.arg, sub, fvs))
    if isinstance(t, Match):
        arg = _subst(t.arg, sub, fvs)
        p, b = _under_binder(t.pattern, t.body, sub, fvs)
        return Match(b, p, arg)
    if isinstance(t, Data):
        return Data(t.tag, tuple(_subst(a, sub, fvs) for a in t.args))
    scr = _subst(t.scrutinee, sub, fvs)
    bs = []
    for br in t.branches:
        p, b = _under_binder(br.pattern, br.body, sub, fvs)
        bs.append(Branch(p, b))
    return Case(scr, tuple(bs))


# --------------------------------------------------------- alpha equality


def canonical(t: Term) -> Term:
    """Representative of the alpha class: binders renamed ``_0, _1, ...``.

    Numbering follows a fixed traversal, so alpha-equivalent terms map to
    the same value. ``_k`` names cannot clash with source variables.
    """
    counter = [0]
    return _canon(t, {}, counter)


def _canon_pattern(p: Pattern, env: dict[str, str], counter: list[int]) -> Pattern:
    if isinstance(p, PVar):
        new = f"_{counter[0]}"
        counter[0] += 1
        env[p.name] = new
        return PVar(new)
    return PData(p.tag, tuple(_canon_pattern(q, env, counter) for q in p.args))


def _canon(t: Term, env: dict[str, str], counter: list[int]) -> Term:
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, Abs):
        inner = dict(env)
        p = _canon_pattern(t.pattern, inner, counter)
        return Abs(p, _canon(t.body, inner, counter))
    if isinstance(t, App):
        return App(_canon(t.fun, env, counter), _canon(t.arg, env, counter))
    if isinstance(t, Match):
        arg = _canon(t.arg, env, counter)
        inner = dict(env)
        p = _canon_pattern(t.pattern, inner, counter)
        return Match(_canon(t.body, inner, counter), p, arg)
    if isinstance(t, Data):
        return Data(t.tag, tuple(_canon(a, env, counter) for a in t.args))
    scr = _canon(t.scrutinee, env, counter)
    bs = []
    for br in t.branches:
        inner = dict(env)
        p = _canon_pattern(br.pattern, inner, counter)
        bs.append(Branch(p, _canon(br.body, inner, counter)))
    return Case(scr, tuple(bs))


def alpha_key(t: Term) -> tuple:
    """Hashable alpha-invariant key: nested tuples, bound variables as
    binder numbers. Cheaper to hash and compare than ``canonical``."""
    return _key(t, {}, [0])


def _key_pattern(p: Pattern, env: dict, counter: list[int]):
    if isinstance(p, PVar):
        env[p.name] = counter[0]
        counter[0] += 1
        return 0
    return (p.tag,) + tuple(_key_pattern(q, env, counter) for q in p.args)


def _key(t: Term, env: dict, counter: list[int]):
    if isinstance(t, Var):
        return env.get(t.name, t.name)
    if isinstance(t, Abs):
        inner = dict(env)
        return ("L", _key_pattern(t.pattern, inner, counter), _key(t.body, inner, counter))
    if isinstance(t, App):
        return ("@", _key(t.fun, env, counter), _key(t.arg, env, counter))
    if isinstance(t, Match):
        arg = _key(t.arg, env, counter)
        inner = dict(env)
        return ("M", _key_pattern(t.pattern, inner, counter), _key(t.body, inner, counter), arg)
    if isinstance(t, Data):
        return ("D", t.tag) + tuple(_key(a, env, counter) for a in t.args)
    out = ["C", _key(t.scrutinee, env, counter)]
    for br in t.branches:
        inner = dict(env)
        out.append((_key_pattern(br.pattern, inner, counter), _key(br.body, inner, counter)))
    return tuple(out)


def alpha_eq(t: Term, u: Term) -> bool:
    return t is u or alpha_key(t) == alpha_key(u)


def rename_apart(t: Term, avoid: Iterable[str] = ()) -> Term:
    """Alpha-variant whose binders are pairwise distinct and distinct from
    free variables and from ``avoid``."""
    used = set(all_names(t)) | set(avoid)
    return _apart(t, {}, used)


def _apart_pattern(p: Pattern, env: dict[str, str], used: set[str]) -> Pattern:
    if isinstance(p, PVar):
        new = fresh_name(p.name, used)
        used.add(new)
        env[p.name] = new
        return PVar(new)
    return PData(p.tag, tuple(_apart_pattern(q, env, used) for q in p.args))


def _apart(t: Term, env: dict[str, str], used: set[str]) -> Term:
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, Abs):
        inner = dict(env)
        p = _apart_pattern(t.pattern, inner, used)
        return Abs(p, _apart(t.body, inner, used))
    if isinstance(t, App):
        return App(_apart(t.fun, env, used), _apart(t.arg, env, used))
    if isinstance(t, Match):
        arg = _apart(t.arg, env, used)
        inner = dict(env)
        p = _apart_pattern(t.pattern, inner, used)
        return Match(_apart(t.body, inner, used), p, arg)
    if isinstance(t, Data):
        return Data(t.tag, tuple(_apart(a, env, used) for a in t.args))
    scr = _apart(t.scrutinee, env, used)
    bs = []
    for br in t.branches:
        inner = dict(env)
        p = _apart_pattern(br.pattern, inner, used)
        bs.append(Branch(p, _apart(br.body, inner, used)))
    return Case(scr, tuple(bs))


# ---------------------------------------------------------- list contexts


@dataclass(frozen=True)
class ListContext:
    """``L ::= ◊ | L[p/t]``; frames listed innermost first."""

    frames: tuple[tuple[Pattern, Term], ...] = ()

    def plug(self, t: Term) -> Term:
        for p, u in self.frames:
            t = Match(t, p, u)
        return t

    def bound_vars(self) -> set[str]:
        out: set[str] = set()
        for p, _ in self.frames:
            out.update(pattern_vars(p))
        return out

    def free_vars(self) -> set[str]:
        out: set[str] = set()
        for p, u in self.frames:
            out |= free_vars(u)
        return out

    def __len__(self) -> int:
        return len(self.frames)


def decompose_list_context(t: Term) -> tuple[ListContext, Term]:
    """Peel the maximal suffix of matching closures off ``t``."""
    frames = []
    while isinstance(t, Match):
        frames.append((t.pattern, t.arg))
        t = t.body
    frames.reverse()
    return ListContext(tuple(frames)), t


def core(t: Term) -> Term:
    while isinstance(t, Match):
        t = t.body
    return t


def is_abs(t: Term) -> bool:
    return isinstance(core(t), Abs)


def is_case(t: Term) -> bool:
    return isinstance(core(t), Case)


def const_tag(t: Term) -> str | None:
    """The ``c`` with ``const_c(t)``, if any."""
    c = core(t)
    return c.tag if isinstance(c, Data) else None


def is_const(t: Term, tag: str | None = None) -> bool:
    c = const_tag(t)
    return c is not None and (tag is None or c == tag)


# ------------------------------------------------------------- well-formed


@dataclass(frozen=True)
class Violation:
    kind: str  # ArityMismatch | NonlinearPattern | DuplicateBranchTag | EmptyCase | BranchNotData
    subject: object
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def well_formed(t: Term, registry: Mapping[str, int] | None = None) -> list[Violation]:
    """Empty list iff ``t`` is well formed.

    Without a registry, arities are fixed at first use.
    """
    reg = dict(registry) if registry is not None else {}
    fixed = registry is not None
    out: list[Violation] = []
    _wf(t, reg, fixed, out)
    return out


def _check_arity(tag: str, n: int, reg: dict[str, int], fixed: bool, subj, out) -> None:
    if tag not in reg:
        if fixed:
            out.append(Violation("ArityMismatch", subj, f"undeclared tag {tag}"))
            return
        reg[tag] = n
    elif reg[tag] != n:
        out.append(Violation("ArityMismatch", subj, f"{tag} expects {reg[tag]} arguments, got {n}"))


def _wf_pattern(p: Pattern, reg, fixed, out) -> None:
    vs = pattern_vars(p)
    if len(vs) != len(set(vs)):
        out.append(Violation("NonlinearPattern", p, f"repeated variable in pattern"))
    _wf_pattern_arity(p, reg, fixed, out)


def _wf_pattern_arity(p: Pattern, reg, fixed, out) -> None:
    if isinstance(p, PData):
        _check_arity(p.tag, len(p.args), reg, fixed, p, out)
        for q in p.args:
            _wf_pattern_arity(q, reg, fixed, out)


def _wf(t: Term, reg, fixed, out) -> None:
    if isinstance(t, Var):
        return
    if isinstance(t, Abs):
        _wf_pattern(t.pattern, reg, fixed, out)
        _wf(t.body, reg, fixed, out)
    elif isinstance(t, App):
        _wf(t.fun, reg, fixed, out)
        _wf(t.arg, reg, fixed, out)
    elif isinstance(t, Match):
        _wf(t.body, reg, fixed, out)
        _wf_pattern(t.pattern, reg, fixed, out)
        _wf(t.arg, reg, fixed, out)
    elif isinstance(t, Data):
        _check_arity(t.tag, len(t.args), reg, fixed, t, out)
        for a in t.args:
            _wf(a, reg, fixed, out)
    else:
        _wf(t.scrutinee, reg, fixed, out)
        if not t.branches:
            out.append(Violation("EmptyCase", t, "case with no branches"))
        seen: set[str] = set()
        for br in t.branches:
            if not isinstance(br.pattern, PData):
                out.append(Violation("BranchNotData", t, "branch pattern must be a data pattern"))
                continue
            if br.pattern.tag in seen:
                out.append(Violation("DuplicateBranchTag", t, f"tag {br.pattern.tag} repeated"))
            seen.add(br.pattern.tag)
            _wf_pattern(br.pattern, reg, fixed, out)
            _wf(br.body, reg, fixed, out)


def tags_of(t: Term) -> dict[str, int]:
    """Tag arities used in ``t`` (first use wins)."""
    reg: dict[str, int] = {}
    _wf(t, reg, False, [])
    return reg

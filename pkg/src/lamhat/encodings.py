"""Source calculi (CBN, CBV, bang), their translations into the pattern
calculus, simulation certificates, and the exception encoding."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from .reduction import ARG, BODY, FUN, SCRUT, NotARedex, Position, Step, Trace, apply_at, step_det, successors
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
    all_names,
    alpha_eq,
    alpha_key,
    free_vars,
    fresh_name,
    pattern_vars,
    rename_free,
)
from .text import TokenStream

VALUE_TAG = "V"
BANG_TAG = "B"
EXC_TAG = "E"


# ---------------------------------------------------------- source terms


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SAbs:
    name: str
    body: "Source"


@dataclass(frozen=True)
class SApp:
    fun: "Source"
    arg: "Source"


@dataclass(frozen=True)
class SBang:
    body: "Source"


@dataclass(frozen=True)
class SSub:
    """Explicit substitution ``body[name/arg]`` of the bang calculus."""

    body: "Source"
    name: str
    arg: "Source"


Source = Union[SVar, SAbs, SApp, SBang, SSub]


def s_free_vars(t: Source) -> set[str]:
    if isinstance(t, SVar):
        return {t.name}
    if isinstance(t, SAbs):
        return s_free_vars(t.body) - {t.name}
    if isinstance(t, SApp):
        return s_free_vars(t.fun) | s_free_vars(t.arg)
    if isinstance(t, SBang):
        return s_free_vars(t.body)
    return (s_free_vars(t.body) - {t.name}) | s_free_vars(t.arg)


def s_names(t: Source) -> set[str]:
    if isinstance(t, SVar):
        return {t.name}
    if isinstance(t, SAbs):
        return s_names(t.body) | {t.name}
    if isinstance(t, SApp):
        return s_names(t.fun) | s_names(t.arg)
    if isinstance(t, SBang):
        return s_names(t.body)
    return s_names(t.body) | s_names(t.arg) | {t.name}


def _s_rename(t: Source, x: str, y: str) -> Source:
    return s_substitute(t, x, SVar(y))


def _binder(name: str, body: Source, x: str, u: Source) -> tuple[str, Source]:
    """Substitute under a binder, renaming it if it would capture."""
    if name == x:
        return name, body
    if name in s_free_vars(u):
        new = fresh_name(name, s_names(body) | s_names(u) | {x})
        name, body = new, _s_rename(body, name, new)
    return name, s_substitute(body, x, u)


def s_substitute(t: Source, x: str, u: Source) -> Source:
    if isinstance(t, SVar):
        return u if t.name == x else t
    if isinstance(t, SAbs):
        return SAbs(*_binder(t.name, t.body, x, u))
    if isinstance(t, SApp):
        return SApp(s_substitute(t.fun, x, u), s_substitute(t.arg, x, u))
    if isinstance(t, SBang):
        return SBang(s_substitute(t.body, x, u))
    name, body = _binder(t.name, t.body, x, u)
    return SSub(body, name, s_substitute(t.arg, x, u))


def s_alpha_eq(t: Source, u: Source) -> bool:
    return _s_canon(t, {}, [0]) == _s_canon(u, {}, [0])


def _s_canon(t: Source, env: dict, n: list) -> tuple:
    if isinstance(t, SVar):
        return ("v", env.get(t.name, t.name))
    if isinstance(t, SApp):
        return ("a", _s_canon(t.fun, env, n), _s_canon(t.arg, env, n))
    if isinstance(t, SBang):
        return ("!", _s_canon(t.body, env, n))
    k = n[0]
    n[0] += 1
    inner = {**env, t.name: k}
    if isinstance(t, SAbs):
        return ("l", _s_canon(t.body, inner, n))
    return ("s", _s_canon(t.body, inner, n), _s_canon(t.arg, env, n))


def is_value(t: Source) -> bool:
    return isinstance(t, (SVar, SAbs))


# ---------------------------------------------------------- source steps


def cbn_step(t: Source) -> Optional[Source]:
    """Head beta step under ``N ::= □ | N t``."""
    if isinstance(t, SApp):
        if isinstance(t.fun, SAbs):
            return s_substitute(t.fun.body, t.fun.name, t.arg)
        f = cbn_step(t.fun)
        return None if f is None else SApp(f, t.arg)
    return None


def cbv_steps(t: Source, liberal: bool = False) -> list[Source]:
    """All beta_v steps under ``V ::= □ | V t | v V``; ``liberal`` adds
    ``t V`` so arguments may also step before the function is a value."""
    if not isinstance(t, SApp):
        return []
    out: list[Source] = []
    if isinstance(t.fun, SAbs) and is_value(t.arg):
        out.append(s_substitute(t.fun.body, t.fun.name, t.arg))
    out += [SApp(f, t.arg) for f in cbv_steps(t.fun, liberal)]
    if liberal or is_value(t.fun):
        out += [SApp(t.fun, a) for a in cbv_steps(t.arg, liberal)]
    return out


def cbv_step(t: Source, liberal: bool = False) -> Optional[Source]:
    s = cbv_steps(t, liberal)
    return s[0] if s else None


def _s_decompose(t: Source) -> tuple[list[tuple[str, Source]], Source]:
    frames = []
    while isinstance(t, SSub):
        frames.append((t.name, t.arg))
        t = t.body
    frames.reverse()
    return frames, t


def _s_plug(frames: list[tuple[str, Source]], t: Source) -> Source:
    for name, arg in frames:
        t = SSub(t, name, arg)
    return t


def _s_frames_apart(frames, core: Source, avoid: set[str]):
    """Rename list-context binders away from ``avoid``."""
    used = set(avoid) | s_names(core) | {n for n, a in frames} | set().union(*(s_names(a) for _, a in frames))
    out: list[tuple[str, Source]] = []
    for name, arg in frames:
        if name in avoid:
            # frames are innermost first: this binder scopes over the core and inner args
            new = fresh_name(name, used)
            used.add(new)
            core = _s_rename(core, name, new)
            out = [(n, _s_rename(a, name, new)) for n, a in out]
            name = new
        out.append((name, arg))
    return out, core


def _bang_root(t: Source) -> Optional[Source]:
    if isinstance(t, SApp):
        frames, core = _s_decompose(t.fun)
        if isinstance(core, SAbs):
            frames, core = _s_frames_apart(frames, core, s_free_vars(t.arg))
            return _s_plug(frames, SSub(core.body, core.name, t.arg))
    if isinstance(t, SSub):
        frames, core = _s_decompose(t.arg)
        if isinstance(core, SBang):
            frames, core = _s_frames_apart(frames, core, s_free_vars(t.body) - {t.name})
            return _s_plug(frames, s_substitute(t.body, t.name, core.body))
    return None


def bang_steps(t: Source) -> list[Source]:
    """Steps under ``W ::= □ | W t | W[x/u] | t[x/W]``, leftmost first."""
    out: list[Source] = []
    r = _bang_root(t)
    if r is not None:
        out.append(r)
    if isinstance(t, SApp):
        out += [SApp(f, t.arg) for f in bang_steps(t.fun)]
    elif isinstance(t, SSub):
        out += [SSub(b, t.name, t.arg) for b in bang_steps(t.body)]
        out += [SSub(t.body, t.name, a) for a in bang_steps(t.arg)]
    return out


def bang_step(t: Source) -> Optional[Source]:
    s = bang_steps(t)
    return s[0] if s else None


# ----------------------------------------------------------- translations


def _require_lambda(t: Source) -> None:
    if isinstance(t, SVar):
        return
    if isinstance(t, SAbs):
        return _require_lambda(t.body)
    if isinstance(t, SApp):
        _require_lambda(t.fun)
        return _require_lambda(t.arg)
    raise ValueError("bang and explicit substitutions only exist in the bang calculus")


def embed_cbn(t: Source) -> Term:
    _require_lambda(t)
    return _embed(t)


def _embed(t: Source) -> Term:
    if isinstance(t, SVar):
        return Var(t.name)
    if isinstance(t, SAbs):
        return Abs(PVar(t.name), _embed(t.body))
    return App(_embed(t.fun), _embed(t.arg))


def _vtag(t: Term) -> Term:
    return Data(VALUE_TAG, (t,))


def _vpat(x: str) -> PData:
    return PData(VALUE_TAG, (PVar(x),))


def translate_cbv(t: Source) -> Term:
    """``⌈v⌉ = V(⌊v⌋)``, ``⌈t u⌉ = (x y)[V(y)/⌈u⌉][V(x)/⌈t⌉]``.

    Fresh names are the first ``x<N>`` / ``y<N>`` not used anywhere in the
    source, numbered in pre-order, so the output is reproducible."""
    _require_lambda(t)
    used = s_names(t)
    return _cbv(t, used)


def _cbv(t: Source, used: set[str]) -> Term:
    if is_value(t):
        return _vtag(_cbv_value(t, used))
    x = fresh_name("x", used)
    used.add(x)
    y = fresh_name("y", used)
    used.add(y)
    tt = _cbv(t.fun, used)
    uu = _cbv(t.arg, used)
    return Match(Match(App(Var(x), Var(y)), _vpat(y), uu), _vpat(x), tt)


def _cbv_value(v: Source, used: set[str]) -> Term:
    if isinstance(v, SVar):
        return Var(v.name)
    return Abs(PVar(v.name), _cbv(v.body, used))


def cbv_value_body(v: Source) -> Term:
    """``⌊v⌋``."""
    _require_lambda(v)
    if not is_value(v):
        raise ValueError("not a value")
    return _cbv_value(v, s_names(v))


def _bpat(x: str) -> PData:
    return PData(BANG_TAG, (PVar(x),))


def translate_bang(t: Source) -> Term:
    if isinstance(t, SVar):
        return Var(t.name)
    if isinstance(t, SAbs):
        return Abs(_bpat(t.name), translate_bang(t.body))
    if isinstance(t, SApp):
        return App(translate_bang(t.fun), translate_bang(t.arg))
    if isinstance(t, SBang):
        return Data(BANG_TAG, (translate_bang(t.body),))
    return Match(translate_bang(t.body), _bpat(t.name), translate_bang(t.arg))


# ------------------------------------------------------------- simulation


KINDS = ("cbn", "cbv", "bang")


class SearchBoundExceeded(RuntimeError):
    pass


@dataclass
class SimulationCertificate:
    kind: str
    source_before: Source
    source_after: Source
    target_before: Term
    target_after: Term
    trace: Trace

    @property
    def rules(self) -> list[str]:
        return self.trace.rules


@dataclass
class CounterexampleReport:
    kind: str
    source_before: Source
    source_after: Source
    target_before: Term
    target_after: Term
    reason: str


def translate(t: Source, kind: str) -> Term:
    return {"cbn": embed_cbn, "cbv": translate_cbv, "bang": translate_bang}[kind](t)


def source_steps(t: Source, kind: str, liberal: bool = False) -> list[Source]:
    if kind == "cbn":
        s = cbn_step(t)
        return [] if s is None else [s]
    if kind == "cbv":
        return cbv_steps(t, liberal)
    return bang_steps(t)


def find_certificate(start: Term, goal: Term, bound: int = 64) -> Trace | str:
    """A nonempty →H path from ``start`` to a term alpha-equal to ``goal``.

    When the two terms differ inside a single weak head subterm, that pair is
    searched first and the path lifted back. Otherwise, or if lifting fails,
    tries the deterministic strategy and then breadth-first search with
    alpha-canonical deduplication. Returns a reason string if the reachable
    space is exhausted; raises SearchBoundExceeded at the depth bound."""
    # the deepest differing subterm need not be the redex, so try every depth
    for pos, s, g in reversed(_focus(start, goal)):
        try:
            inner = _search(s, g, bound)
        except SearchBoundExceeded:
            continue
        if isinstance(inner, Trace):
            lifted = _lift(start, pos, inner)
            if lifted is not None and alpha_eq(lifted.steps[-1].after, goal):
                return lifted
    return _search(start, goal, bound)


def _same_shape(p: Pattern, q: Pattern) -> bool:
    if isinstance(p, PVar):
        return isinstance(q, PVar)
    return (
        isinstance(q, PData)
        and p.tag == q.tag
        and len(p.args) == len(q.args)
        and all(_same_shape(a, b) for a, b in zip(p.args, q.args))
    )


def _focus(s: Term, g: Term) -> list[tuple[Position, Term, Term]]:
    """Descend while ``s`` and ``g`` agree everywhere but one weak head child;
    every proper subterm pair met on the way, outermost first."""
    pos: Position = ()
    out = []
    while True:
        if pos:
            out.append((pos, s, g))
        if isinstance(s, App) and isinstance(g, App) and alpha_key(s.arg) == alpha_key(g.arg):
            pos, s, g = pos + (FUN,), s.fun, g.fun
        elif isinstance(s, Match) and isinstance(g, Match) and _same_shape(s.pattern, g.pattern):
            ren = dict(zip(pattern_vars(g.pattern), pattern_vars(s.pattern)))
            if set(ren.values()) & (free_vars(g.body) - set(ren)):
                break
            gb = rename_free(g.body, ren)
            if isinstance(s.pattern, PData) and alpha_key(s.body) == alpha_key(gb):
                pos, s, g = pos + (ARG,), s.arg, g.arg
            elif alpha_key(s.arg) == alpha_key(g.arg):
                pos, s, g = pos + (BODY,), s.body, gb
            else:
                break
        elif (
            isinstance(s, Case)
            and isinstance(g, Case)
            and alpha_key(Case(Var("_"), s.branches)) == alpha_key(Case(Var("_"), g.branches))
        ):
            pos, s, g = pos + (SCRUT,), s.scrutinee, g.scrutinee
        else:
            break
    return out


def _lift(t: Term, pos: Position, inner: Trace) -> Optional[Trace]:
    out = Trace()
    for st in inner.steps:
        at = pos + st.position
        try:
            u = apply_at(t, at, st.rule)
        except NotARedex:
            return None
        out.steps.append(Step(st.rule, at, t, u))
        t = u
    return out


def _search(start: Term, goal: Term, bound: int) -> Trace | str:
    tr = Trace()
    t = start
    for _ in range(bound):
        r = step_det(t)
        if r is None:
            break
        tr.steps.append(Step(r[1], r[2], t, r[0]))
        t = r[0]
        if alpha_eq(t, goal):
            return tr
    goal_key = alpha_key(goal)
    seen = {alpha_key(start)}
    frontier = deque([(start, ())])
    depth = 0
    while frontier:
        if depth >= bound:
            raise SearchBoundExceeded(f"no path within {bound} steps")
        nxt = deque()
        for t, path in frontier:
            for pos, rule, u in successors(t):
                p2 = path + (Step(rule, pos, t, u),)
                k = alpha_key(u)
                if k == goal_key:
                    return Trace(list(p2))
                if k not in seen:
                    seen.add(k)
                    nxt.append((u, p2))
        frontier = nxt
        depth += 1
    return "every →H path from the translation ends without reaching the translated reduct"


def check_simulation(
    t: Source, kind: str, max_steps: int = 10, bound: int = 64, liberal: bool = False
) -> list[SimulationCertificate] | CounterexampleReport:
    """Certify each source step along the leftmost source run; for CBV every
    enumerated step from each visited term is certified independently."""
    if kind not in KINDS:
        raise ValueError(f"unknown source calculus {kind!r}")
    certs: list[SimulationCertificate] = []
    cur = t
    for _ in range(max_steps):
        nexts = source_steps(cur, kind, liberal)
        if not nexts:
            break
        for s in nexts:
            a, b = translate(cur, kind), translate(s, kind)
            res = find_certificate(a, b, bound)
            if isinstance(res, str):
                return CounterexampleReport(kind, cur, s, a, b, res)
            certs.append(SimulationCertificate(kind, cur, s, a, b, res))
        cur = nexts[0]
    return certs


# ------------------------------------------------------------- exceptions


def _avoid(*ts: Term) -> set[str]:
    out: set[str] = set()
    for t in ts:
        out |= all_names(t)
    return out


def moggi_app(t: Term, u: Term) -> Term:
    """``case t of {V(x) -> case u of {V(y) -> x y | E(z) -> E(z)} | E(z) -> E(z)}``"""
    used = _avoid(t, u)
    x = fresh_name("x", used)
    y = fresh_name("y", used | {x})
    z = fresh_name("z", used | {x, y})
    exc = Branch(PData(EXC_TAG, (PVar(z),)), Data(EXC_TAG, (Var(z),)))
    inner = Case(u, (Branch(_vpat(y), App(Var(x), Var(y))), exc))
    return Case(t, (Branch(_vpat(x), inner), exc))


def _handler(scrut: Term, x: str, u: Term, y: str, rethrow: bool) -> Term:
    exc_body = Data(EXC_TAG, (Var(y),)) if rethrow else Var(y)
    return Case(scrut, (Branch(_vpat(x), u), Branch(PData(EXC_TAG, (PVar(y),)), exc_body)))


def exception_t1(v: Term, u: Term, x: str = "x", y: str = "y") -> Term:
    """``case V(v) of {V(x) -> u | E(y) -> y}``; evaluates to ``u{x/v}``."""
    return _handler(Data(VALUE_TAG, (v,)), x, u, y, False)


def exception_t2(r: Term, u: Term, x: str = "x", y: str = "y") -> Term:
    """``case E(r) of {V(x) -> u | E(y) -> y}``; evaluates to ``r``."""
    return _handler(Data(EXC_TAG, (r,)), x, u, y, False)


def exception_t3(r: Term, u: Term, x: str = "x", y: str = "y") -> Term:
    """``case E(r) of {V(x) -> u | E(y) -> E(y)}``; evaluates to ``E(r)``."""
    return _handler(Data(EXC_TAG, (r,)), x, u, y, True)


# ------------------------------------------------------------ source text


class _SourceParser:
    """``t ::= \\x.t | t t | !t | t[x/u] | x | (t)``; ``!`` binds tightest."""

    def __init__(self, text: str):
        self.ts = TokenStream(text)

    def term(self) -> Source:
        if self.ts.at("\\"):
            return self.lam()
        return self.app()

    def lam(self) -> Source:
        ts = self.ts
        ts.expect("\\")
        tok = ts.peek
        if tok.kind != "var":
            ts.error("expected a variable")
        ts.next()
        ts.expect(".")
        return SAbs(tok.value, self.term())

    def _starts(self) -> bool:
        t = self.ts.peek
        return t.kind == "var" or (t.kind == "sym" and t.value in ("(", "!"))

    def app(self) -> Source:
        if not self._starts():
            self.ts.error("expected a term")
        t = self.postfix()
        while True:
            if self._starts():
                t = SApp(t, self.postfix())
            elif self.ts.at("\\"):
                return SApp(t, self.lam())
            else:
                return t

    def postfix(self) -> Source:
        ts = self.ts
        t = self.atom()
        while ts.at("["):
            ts.next()
            tok = ts.peek
            if tok.kind != "var":
                ts.error("expected a variable")
            ts.next()
            ts.expect("/")
            u = self.term()
            ts.expect("]")
            t = SSub(t, tok.value, u)
        return t

    def atom(self) -> Source:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "var":
            ts.next()
            return SVar(tok.value)
        if ts.at("!"):
            ts.next()
            return SBang(self.atom())
        if ts.at("("):
            ts.next()
            t = self.term()
            ts.expect(")")
            return t
        ts.error("expected a term")


def parse_source(text: str, kind: str = "bang") -> Source:
    p = _SourceParser(text)
    t = p.term()
    if p.ts.peek.kind != "eof":
        p.ts.error("unexpected trailing input")
    if kind in ("cbn", "cbv"):
        try:
            _require_lambda(t)
        except ValueError as e:
            raise ValueError(f"{kind} terms use only variables, abstractions and applications") from e
    return t


def pretty_source(t: Source) -> str:
    return _sp(t, 0)


def _sp(t: Source, level: int) -> str:
    if isinstance(t, SVar):
        return t.name
    if isinstance(t, SAbs):
        s = f"\\{t.name}.{_sp(t.body, 0)}"
        return f"({s})" if level > 0 else s
    if isinstance(t, SApp):
        s = f"{_sp(t.fun, 1)} {_sp(t.arg, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(t, SBang):
        return f"!{_sp(t.body, 3)}"
    s = f"{_sp(t.body, 2)}[{t.name}/{_sp(t.arg, 0)}]"
    return f"({s})" if level > 2 else s

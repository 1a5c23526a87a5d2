"""Weak head reduction: the nondeterministic relation, the deterministic
strategy, traces and exhaustive path enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .syntax import (
    Abs,
    App,
    Branch,
    Case,
    Data,
    Match,
    PData,
    PVar,
    Term,
    all_names,
    alpha_key,
    canonical,
    const_tag,
    decompose_list_context,
    free_vars,
    fresh_name,
    is_abs,
    pattern_vars,
    rename_free,
    rename_pattern,
    substitute,
)

RULES = ("dB", "c", "m", "e")
COUNTER_INDEX = {"dB": 0, "c": 1, "m": 2, "e": 3}

# position steps: H t | H[p/u] | t[p^/H] | case H of b
FUN, BODY, ARG, SCRUT = "fun", "body", "arg", "scrut"

Position = tuple[str, ...]


class NotARedex(ValueError):
    pass


def render_position(pos: Position) -> str:
    return ".".join(pos) if pos else "root"


def subterm_at(t: Term, pos: Position) -> Term:
    for s in pos:
        if s == FUN and isinstance(t, App):
            t = t.fun
        elif s == BODY and isinstance(t, Match):
            t = t.body
        elif s == ARG and isinstance(t, Match):
            t = t.arg
        elif s == SCRUT and isinstance(t, Case):
            t = t.scrutinee
        else:
            raise NotARedex(f"position {render_position(pos)} does not exist")
    return t


def replace_at(t: Term, pos: Position, new: Term) -> Term:
    if not pos:
        return new
    s, rest = pos[0], pos[1:]
    if s == FUN:
        return App(replace_at(t.fun, rest, new), t.arg)
    if s == BODY:
        return Match(replace_at(t.body, rest, new), t.pattern, t.arg)
    if s == ARG:
        return Match(t.body, t.pattern, replace_at(t.arg, rest, new))
    return Case(replace_at(t.scrutinee, rest, new), t.branches)


# ------------------------------------------------------------- hygiene


def _context_apart(t: Term, avoid: set[str]) -> Term:
    """Alpha-rename the list-context binders of ``t`` away from ``avoid``."""
    if not isinstance(t, Match):
        return t
    inner, p = t.body, t.pattern
    clash = [v for v in pattern_vars(p) if v in avoid]
    if clash:
        used = avoid | all_names(t)
        ren = {}
        for v in clash:
            ren[v] = fresh_name(v, used)
            used.add(ren[v])
        p = rename_pattern(p, ren)
        inner = rename_free(inner, ren)
    return Match(_context_apart(inner, avoid), p, t.arg)


def _pattern_apart(p: PData, body: Term, avoid: set[str]) -> tuple[PData, Term]:
    clash = [v for v in pattern_vars(p) if v in avoid]
    if not clash:
        return p, body
    used = avoid | all_names(body) | set(pattern_vars(p))
    ren = {}
    for v in clash:
        ren[v] = fresh_name(v, used)
        used.add(ren[v])
    return rename_pattern(p, ren), rename_free(body, ren)


def _distribute(body: Term, pats: tuple, args: tuple) -> Term:
    for p, u in zip(pats, args):
        body = Match(body, p, u)
    return body


# ----------------------------------------------------------- root rules


def root_rule(t: Term) -> Optional[str]:
    """The rule whose left-hand side ``t`` is, if any."""
    if isinstance(t, App) and is_abs(t.fun):
        return "dB"
    if isinstance(t, Match):
        if isinstance(t.pattern, PVar):
            return "e"
        if const_tag(t.arg) == t.pattern.tag:
            return "m"
        return None
    if isinstance(t, Case):
        c = const_tag(t.scrutinee)
        if c is not None and any(b.pattern.tag == c for b in t.branches):
            return "c"
    return None


def fire(t: Term, rule: str) -> Term:
    """Contract the root redex of ``t`` with ``rule``."""
    if root_rule(t) != rule:
        raise NotARedex(f"{rule} does not apply at this position")
    if rule == "dB":
        fun = _context_apart(t.fun, set(free_vars(t.arg)))
        L, lam = decompose_list_context(fun)
        return L.plug(Match(lam.body, lam.pattern, t.arg))
    if rule == "e":
        return substitute(t.body, t.pattern.name, t.arg)
    if rule == "m":
        pat, body, arg = t.pattern, t.body, t.arg
    else:
        c = const_tag(t.scrutinee)
        br = next(b for b in t.branches if b.pattern.tag == c)
        pat, body, arg = br.pattern, br.body, t.scrutinee
    arg = _context_apart(arg, set(free_vars(Abs(pat, body))))
    L, data = decompose_list_context(arg)
    pat, body = _pattern_apart(pat, body, set(free_vars(data)))
    return L.plug(_distribute(body, pat.args, data.args))


# ------------------------------------------------- nondeterministic ->H


def enumerate_redexes(t: Term) -> list[tuple[Position, str]]:
    """All weak-head redex occurrences, leftmost-outermost."""
    out: list[tuple[Position, str]] = []
    _enum(t, (), out)
    return out


def _enum(t: Term, pos: Position, out: list) -> None:
    r = root_rule(t)
    if r is not None:
        out.append((pos, r))
    if isinstance(t, App):
        _enum(t.fun, pos + (FUN,), out)
    elif isinstance(t, Match):
        _enum(t.body, pos + (BODY,), out)
        if isinstance(t.pattern, PData):
            _enum(t.arg, pos + (ARG,), out)
    elif isinstance(t, Case):
        _enum(t.scrutinee, pos + (SCRUT,), out)


def apply_at(t: Term, pos: Position, rule: str) -> Term:
    if (pos, rule) not in enumerate_redexes(t):
        raise NotARedex(f"no {rule} redex at {render_position(pos)}")
    return replace_at(t, pos, fire(subterm_at(t, pos), rule))


def successors(t: Term) -> list[tuple[Position, str, Term]]:
    return [(pos, r, replace_at(t, pos, fire(subterm_at(t, pos), r))) for pos, r in enumerate_redexes(t)]


# ------------------------------------------------ deterministic strategy


def step_det(t: Term) -> Optional[tuple[Term, str, Position]]:
    """One step of the deterministic strategy, or ``None`` if ``t`` is stuck.

    Returns (reduct, rule, position of the contracted redex).
    """
    if isinstance(t, App):
        if is_abs(t.fun):
            return fire(t, "dB"), "dB", ()
        r = step_det(t.fun)
        if r is None:
            return None
        return App(r[0], t.arg), r[1], (FUN,) + r[2]
    if isinstance(t, Match):
        if isinstance(t.pattern, PVar):
            return fire(t, "e"), "e", ()
        if const_tag(t.arg) == t.pattern.tag:
            return fire(t, "m"), "m", ()
        r = step_det(t.body)
        if r is not None:
            return Match(r[0], t.pattern, t.arg), r[1], (BODY,) + r[2]
        r = step_det(t.arg)
        if r is not None:
            return Match(t.body, t.pattern, r[0]), r[1], (ARG,) + r[2]
        return None
    if isinstance(t, Case):
        if root_rule(t) == "c":
            return fire(t, "c"), "c", ()
        r = step_det(t.scrutinee)
        if r is None:
            return None
        return Case(r[0], t.branches), r[1], (SCRUT,) + r[2]
    return None


# --------------------------------------------------------------- traces


@dataclass(frozen=True)
class Step:
    rule: str
    position: Position
    before: Term
    after: Term


@dataclass
class Trace:
    steps: list[Step] = field(default_factory=list)

    @property
    def counters(self) -> tuple[int, int, int, int]:
        c = [0, 0, 0, 0]
        for s in self.steps:
            c[COUNTER_INDEX[s.rule]] += 1
        return tuple(c)

    @property
    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class Normal:
    term: Term
    trace: Trace


@dataclass
class OutOfFuel:
    term: Term
    trace: Trace


def evaluate(t: Term, fuel: int = 10000) -> Normal | OutOfFuel:
    tr = Trace()
    while True:
        r = step_det(t)
        if r is None:
            return Normal(t, tr)
        if len(tr) >= fuel:
            return OutOfFuel(t, tr)
        new, rule, pos = r
        tr.steps.append(Step(rule, pos, t, new))
        t = new


def det_steps(t: Term) -> Iterator[Step]:
    """The deterministic evaluation sequence of ``t`` (possibly infinite)."""
    while True:
        r = step_det(t)
        if r is None:
            return
        yield Step(r[1], r[2], t, r[0])
        t = r[0]


# ----------------------------------------------------- path enumeration


class Exceeded(Exception):
    """Some reduction path reaches the length bound."""


@dataclass(frozen=True)
class PathSummary:
    """Every maximal ->H path, summarised as (length, alpha-canonical end)."""

    outcomes: frozenset[tuple[int, Term]]

    @property
    def lengths(self) -> set[int]:
        return {n for n, _ in self.outcomes}

    @property
    def endpoints(self) -> set[Term]:
        return {e for _, e in self.outcomes}


def path_summary(t: Term, bound: int, max_states: int = 100000) -> PathSummary:
    """Explore all ->H paths from ``t``; raises Exceeded past ``bound`` steps
    or ``max_states`` distinct states.

    States are deduplicated by alpha-canonical form.
    """
    memo: dict[Term, frozenset] = {}

    def go(u: Term, depth: int) -> frozenset:
        key = alpha_key(u)
        if key in memo:
            res = memo[key]
            if depth + max(n for n, _ in res) > bound:
                raise Exceeded
            return res
        if len(memo) >= max_states:
            raise Exceeded
        succ = successors(u)
        if not succ:
            res = frozenset({(0, canonical(u))})
        else:
            if depth >= bound:
                raise Exceeded
            acc = set()
            for _, _, v in succ:
                for n, e in go(v, depth + 1):
                    acc.add((n + 1, e))
            res = frozenset(acc)
        memo[key] = res
        return res

    return PathSummary(go(t, 0))


def all_paths_to_nf(t: Term, bound: int, limit: int = 100000) -> list[Trace]:
    """Every maximal ->H reduction sequence from ``t`` (at most ``limit``).

    Raises Exceeded if a path reaches ``bound`` steps.
    """
    out: list[Trace] = []

    def go(u: Term, acc: list[Step]) -> None:
        succ = successors(u)
        if not succ:
            out.append(Trace(list(acc)))
            if len(out) > limit:
                raise Exceeded
            return
        if len(acc) >= bound:
            raise Exceeded
        for pos, r, v in succ:
            acc.append(Step(r, pos, u, v))
            go(v, acc)
            acc.pop()

    go(t, [])
    return out

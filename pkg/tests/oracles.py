"""Independent reference implementations and values copied from the source
material. Nothing here imports the package's own alpha-equivalence,
substitution or size code."""

from __future__ import annotations

from lamhat.syntax import Abs, App, Case, Data, Match, PData, PVar, Var

# ---------------------------------------------------------- literal values

T0 = r"(\x. case x of {Pair(x,y) -> y | Triple(x,y,z) -> x}) Triple(C0,C1,C2)"
T0_STEPS = 6
T0_COUNTERS = (1, 1, 0, 4)
T0_NORMAL = "C0"
# the written-out evaluation of t0, one term per line, with the rule used
T0_TRACE = [
    ("dB", r"case x of {Pair(x,y) -> y | Triple(x,y,z) -> x}[x/Triple(C0,C1,C2)]"),
    ("e", r"case Triple(C0,C1,C2) of {Pair(x,y) -> y | Triple(x,y,z) -> x}"),
    ("c", r"x[x/C0][y/C1][z/C2]"),
    ("e", r"x[x/C0][y/C1]"),
    ("e", r"x[x/C0]"),
    ("e", r"C0"),
]
SIGMA_SIZE = 11
PHI2_SIZE = 4
SIGMA_DB_SIZE = 10
CBV_BETA_RULES = ["m", "e", "m", "e", "dB", "e"]
CBN_BETA_RULES = ["dB", "e"]
BANG_DB_RULES = ["dB"]
BANG_S_RULES = ["m", "e"]

NEUTRAL = ["case Duo(I,I) of {Pair(x,y) -> y}", "case I of {Pair(x,y) -> y}"]
CLASHES = ["case Duo(I,I) of {Pair(x,y) -> y}", "case I of {Pair(x,y) -> y}", "Pair(I I, I) I"]
NOT_CLASH = ["Pair(I I, I)"]


# ------------------------------------------------------ locally nameless


def _pat_shape(p, names: list[str]):
    if isinstance(p, PVar):
        names.append(p.name)
        return ("pv",)
    return ("pc", p.tag, tuple(_pat_shape(q, names) for q in p.args))


def nameless(t, env: tuple = ()):
    """Bound occurrences become (binder distance, slot); free stay named."""
    if isinstance(t, Var):
        for i, frame in enumerate(env):
            if t.name in frame:
                return ("bv", i, frame.index(t.name))
        return ("fv", t.name)
    if isinstance(t, Abs):
        names: list[str] = []
        shape = _pat_shape(t.pattern, names)
        return ("abs", shape, nameless(t.body, (names,) + env))
    if isinstance(t, App):
        return ("app", nameless(t.fun, env), nameless(t.arg, env))
    if isinstance(t, Match):
        names = []
        shape = _pat_shape(t.pattern, names)
        return ("match", nameless(t.body, (names,) + env), shape, nameless(t.arg, env))
    if isinstance(t, Data):
        return ("data", t.tag, tuple(nameless(a, env) for a in t.args))
    bs = []
    for b in t.branches:
        names = []
        shape = _pat_shape(b.pattern, names)
        bs.append((shape, nameless(b.body, (names,) + env)))
    return ("case", nameless(t.scrutinee, env), tuple(bs))


def alpha_equal(t, u) -> bool:
    return nameless(t) == nameless(u)


def nameless_subst(n, x: str, m):
    """Replace free ``x``; no shifting is needed in the locally nameless form."""
    if n == ("fv", x):
        return m
    if isinstance(n, tuple):
        return tuple(nameless_subst(c, x, m) for c in n)
    return n


def nameless_fv(n) -> set[str]:
    if isinstance(n, tuple) and len(n) == 2 and n[0] == "fv":
        return {n[1]}
    out: set[str] = set()
    if isinstance(n, tuple):
        for c in n:
            out |= nameless_fv(c)
    return out


# --------------------------------------------------------- size recount

EXEMPT = {"many", "match"}


def json_size(obj: dict) -> int:
    """Count JSON derivation nodes other than many/match."""
    own = 0 if obj["rule"] in EXEMPT else 1
    return own + sum(json_size(c) for c in obj.get("children", []))

import random

import pytest

import gen
import oracles
from lamhat.syntax import (
    Abs,
    App,
    Data,
    Match,
    PData,
    PVar,
    Var,
    alpha_eq,
    alpha_key,
    canonical,
    decompose_list_context,
    free_vars,
    rename_apart,
    substitute,
    well_formed,
)
from lamhat.text import parse, pretty


def test_free_vars_examples():
    assert free_vars(parse(r"\x. x y")) == {"y"}
    assert free_vars(parse("case w of {Pair(x,y) -> x z}")) == {"w", "z"}
    # the argument of a closure is outside the pattern's scope
    assert free_vars(parse("x[x/x]")) == {"x"}


def test_substitute_avoids_capture():
    t = parse(r"\y. x y")
    s = substitute(t, "x", Var("y"))
    assert alpha_eq(s, parse(r"\z. y z"))
    assert free_vars(s) == {"y"}


def test_substitute_respects_shadowing():
    t = parse(r"\x. x")
    assert substitute(t, "x", Var("q")) == t
    t = parse("x[Pair(x,y)/x]")
    assert alpha_eq(substitute(t, "x", Var("q")), parse("x[Pair(x,y)/q]"))


def test_substitute_keeps_names_when_safe():
    t = parse(r"\y. x y")
    assert substitute(t, "x", Var("z")) == parse(r"\y. z y")


def test_alpha_eq():
    assert alpha_eq(parse(r"\x.x"), parse(r"\y.y"))
    assert not alpha_eq(parse(r"\x.y"), parse(r"\x.z"))
    assert alpha_eq(parse("case a of {P(x,y) -> y}"), parse("case a of {P(u,v) -> v}"))
    assert not alpha_eq(parse("case a of {P(x,y) -> y}"), parse("case a of {P(u,v) -> u}"))


def test_alpha_key_matches_oracle():
    ts = gen.terms(300, seed=11)
    rng = random.Random(0)
    for t in ts:
        r = rename_apart(t)
        assert alpha_key(r) == alpha_key(t)
        assert oracles.alpha_equal(r, t)
        u = rng.choice(ts)
        assert (alpha_key(t) == alpha_key(u)) == oracles.alpha_equal(t, u)
        assert (canonical(t) == canonical(u)) == oracles.alpha_equal(t, u)


def test_rename_apart_is_barendregt():
    t = parse(r"(\x. x[x/x]) (\x.x)")
    r = rename_apart(t)
    assert alpha_eq(r, t)
    binders = []

    def walk(u):
        if isinstance(u, Abs):
            binders.append(u.pattern.name)
            walk(u.body)
        elif isinstance(u, App):
            walk(u.fun)
            walk(u.arg)
        elif isinstance(u, Match):
            binders.append(u.pattern.name)
            walk(u.body)
            walk(u.arg)

    walk(r)
    assert len(binders) == len(set(binders))
    assert not set(binders) & free_vars(r)


def test_decompose_list_context():
    t = parse(r"(\x.x)[y/A][z/B]")
    L, core = decompose_list_context(t)
    assert core == parse(r"\x.x")
    assert len(L) == 2
    assert L.bound_vars() == {"y", "z"}
    assert L.plug(core) == t


def test_well_formed_reports():
    bad_arity = App(Data("P", (Var("a"),)), Data("P", (Var("a"), Var("b"))))
    kinds = {v.kind for v in well_formed(bad_arity)}
    assert "ArityMismatch" in kinds
    nonlinear = Abs(PData("P", (PVar("x"), PVar("x"))), Var("x"))
    assert {v.kind for v in well_formed(nonlinear)} == {"NonlinearPattern"}
    assert well_formed(parse(oracles.T0)) == []


def test_registry_arity_enforced():
    assert {v.kind for v in well_formed(Data("A", ()), {"A": 1})} == {"ArityMismatch"}


@pytest.mark.parametrize("seed", range(3))
def test_pretty_round_trip(seed):
    for t in gen.terms(300, seed=100 + seed):
        assert oracles.alpha_equal(parse(pretty(t)), t)

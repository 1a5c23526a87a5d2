from dataclasses import replace

import pytest

import oracles
from lamhat.fixtures import sigma
from lamhat.text import parse, parse_pattern
from lamhat.types import Context, parse_multiset, parse_type
from lamhat.typesys import (
    ClashTypable,
    InvalidPartition,
    NotAClash,
    abs_implicit,
    absb,
    app,
    assert_clash_untypable,
    ax,
    check_derivation,
    dumps,
    loads,
    many,
    merge,
    relevance_check,
    size,
    split,
    to_json,
    type_pattern,
)


def test_sigma_is_valid_with_size_11():
    s = sigma()
    assert check_derivation(s) == []
    assert relevance_check(s) == []
    assert size(s) == oracles.SIGMA_SIZE
    assert str(s.type) == "C0"


def test_sigma_size_matches_json_oracle():
    assert oracles.json_size(to_json(sigma())) == size(sigma())


def test_deleted_premise_is_located():
    s = sigma()
    f, a = s.children
    c = a.children[0]
    m = c.children[0]
    broken = replace(s, children=(f, replace(a, children=(replace(c, children=(replace(m, children=()),) + c.children[1:]),))))
    vs = check_derivation(broken)
    assert [(v.path, v.rule) for v in vs] == [((1, 0, 0), "many")]
    vs = check_derivation(replace(s, children=(f,)))
    assert vs[0].path == () and vs[0].rule == "app"


def test_json_round_trip():
    s = sigma()
    assert loads(dumps(s)) == s


def test_context_algebra():
    g = Context.of({"x": parse_multiset("[A]")}) + Context.of({"x": parse_multiset("[B]"), "y": parse_multiset("[*]")})
    assert g("x") == parse_multiset("[B, A]")
    assert g("z") == parse_multiset("[]")
    assert g.dom() == {"x", "y"}
    assert g.remove(["x"]).dom() == {"y"}


def test_type_pattern():
    g = Context.of({"x": parse_multiset("[A, B]"), "y": parse_multiset("[*]")})
    d = type_pattern(parse_pattern("Pair(x, y)"), g)
    assert str(d.type) == "[Pair([A, B], [*])]"
    assert d.rule == "patc" and size(d) == 3
    # an unused pattern variable gets the empty multiset
    d = type_pattern(parse_pattern("Pair(x, z)"), g)
    assert str(d.type) == "[Pair([A, B], [])]"


def test_split_and_merge():
    d = many(parse("y"), [ax("y", parse_type(t)) for t in "ABA"])
    parts = split(d, [parse_multiset("[A]"), parse_multiset("[A, B]")])
    assert [str(p.type) for p in parts] == ["[A]", "[A, B]"]
    assert merge(parts).type == d.type
    assert merge(parts).context == d.context
    with pytest.raises(InvalidPartition):
        split(d, [parse_multiset("[B, B]")])
    assert merge([], parse("y")).type == parse_multiset("[]")


def test_relevance_violation():
    # a hand-built abs over a body that mentions a variable not free in it
    body = ax("x", parse_type("A"))
    d = replace(abs_implicit("x", body), context=Context.of({"w": parse_multiset("[A]")}))
    assert relevance_check(d)


def test_app_of_identity():
    i = parse(r"\x.x")
    f = abs_implicit("x", ax("x", parse_type("*")))
    d = app(f, many(i, [absb(i)]))
    assert check_derivation(d) == []
    assert str(d.type) == "*"


@pytest.mark.parametrize("text", oracles.CLASHES)
def test_clash_evidence(text):
    ev = assert_clash_untypable(parse(text))
    assert ev.reason


def test_clash_under_variable_closure_is_not_covered():
    with pytest.raises(ClashTypable):
        assert_clash_untypable(parse("I[z/Pair(I,I) I]"))
    with pytest.raises(NotAClash):
        assert_clash_untypable(parse("x"))

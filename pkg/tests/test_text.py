import pytest

from lamhat.fixtures import TERMS
from lamhat.syntax import IDENTITY, Case, Data, Match, PData
from lamhat.text import ParseError, Registry, parse, parse_program, parse_pattern, pretty


def test_t0_tree():
    t = parse(r"(\x. case x of {Pair(x,y) -> y | Triple(x,y,z) -> x}) Triple(C0,C1,C2)")
    assert isinstance(t.fun.body, Case)
    assert t.arg == Data("Triple", (Data("C0"), Data("C1"), Data("C2")))


def test_stuck_match_is_match_node():
    t = parse("y[Pair(x,y)/Duo(t,u)]")
    assert isinstance(t, Match) and isinstance(t.pattern, PData)


def test_empty_case_rejected():
    with pytest.raises(ParseError):
        parse("case t of {}")


def test_identity_sugar_and_print():
    assert parse("I") == IDENTITY
    assert pretty(IDENTITY) == r"\x.x"


def test_match_suffix_order():
    t = parse("t[x/u][y/v]")
    assert t.pattern.name == "y" and t.body.pattern.name == "x"
    assert pretty(t) == "t[x/u][y/v]"


def test_application_left_assoc_and_trailing_lambda():
    assert pretty(parse(r"f a \x.x")) == r"f a (\x.x)"
    assert parse("f a b") == parse("(f a) b")


def test_positioned_errors():
    with pytest.raises(ParseError) as e:
        parse("(x y")
    assert str(e.value).startswith("1:5:")


def test_registry_conflict_is_parse_error():
    with pytest.raises(ParseError):
        parse("Pair(a, b) Pair(a)")
    with pytest.raises(ParseError):
        parse_program("tag Pair/2; Pair(a)")
    t, reg = parse_program("tag Nil/0; # comment\nNil")
    assert reg == Registry(Nil=0)


def test_nonlinear_and_duplicate_branches():
    with pytest.raises(ParseError):
        parse(r"\Pair(x,x).x")
    with pytest.raises(ParseError):
        parse("case a of {P(x) -> x | P(y) -> y}")
    with pytest.raises(ParseError):
        parse("case a of {x -> x}")


def test_reserved_identity_tag():
    with pytest.raises(ParseError):
        parse("I(a)")


def test_patterns():
    assert parse_pattern("Triple(x, y, z)") == PData("Triple", tuple(parse_pattern(v) for v in "xyz"))


@pytest.mark.parametrize("name,text,note", TERMS)
def test_fixture_round_trip(name, text, note):
    t = parse(text)
    assert parse(pretty(t)) == t

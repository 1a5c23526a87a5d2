import pytest

import oracles
from lamhat.classify import (
    DATA_APPLIED,
    CASE_ABS,
    CASE_TAG,
    MATCH_ABS,
    MATCH_TAG,
    PreconditionViolated,
    closed_nf_shape,
    in_na,
    in_no,
    is_clash,
    is_clash_free_nf,
    nf_class,
)
from lamhat.text import parse


@pytest.mark.parametrize("text", oracles.NEUTRAL)
def test_neutral_examples(text):
    assert str(nf_class(parse(text))) == "neutral"


def test_nested_classes():
    t = parse("Pair(I I, I)")
    assert str(nf_class(t)) == "neutral-data(Pair)"
    assert in_na(t, "Pair") and in_no(t, "Pair")
    assert str(nf_class(parse("Pair(I I, I) I"))) == "neutral"
    assert str(nf_class(parse(r"\x.x"))) == "normal()"
    assert str(nf_class(parse(r"(\x.x) y"))) == "not-normal"


@pytest.mark.parametrize("text", oracles.CLASHES)
def test_clash_examples(text):
    assert is_clash(parse(text))
    assert not is_clash_free_nf(parse(text))


@pytest.mark.parametrize("text", oracles.NOT_CLASH)
def test_not_clash(text):
    assert not is_clash(parse(text))
    assert is_clash_free_nf(parse(text))


def test_clash_kinds_and_witness():
    cases = {
        "Pair(I,I) I": DATA_APPLIED,
        r"y[Pair(x,y)/\z.z]": MATCH_ABS,
        "y[Pair(x,y)/Duo(t,u)]": MATCH_TAG,
        "case I of {Pair(x,y) -> y}": CASE_ABS,
        "case Duo(I,I) of {Pair(x,y) -> y}": CASE_TAG,
    }
    for text, kind in cases.items():
        r = is_clash(parse(text))
        assert r.kind == kind and r.witness == ()
    r = is_clash(parse("(Pair(I,I) I) z"))
    assert str(r) == "yes@fun"
    assert str(is_clash(parse("x"))) == "no"


def test_clash_under_closures():
    # Cl is closed under t[p/Cl] for any p, and under Cl[p/u]
    assert is_clash(parse("I[z/Pair(I,I) I]"))
    assert is_clash(parse("(Pair(I,I) I)[z/A]"))
    # but not under abstraction
    assert not is_clash(parse(r"\x. Pair(I,I) I"))


def test_closed_nf_shape():
    assert str(closed_nf_shape(parse(r"\x.x"))) == "abstraction"
    assert str(closed_nf_shape(parse("Pair(I I, I)"))) == "data(Pair)"
    with pytest.raises(PreconditionViolated):
        closed_nf_shape(parse("x"))
    with pytest.raises(PreconditionViolated):
        closed_nf_shape(parse("I I"))
    with pytest.raises(PreconditionViolated):
        closed_nf_shape(parse("Pair(I,I) I"))

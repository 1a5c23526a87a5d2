"""Term types, multiset types and typing contexts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .text import ParseError, TokenStream


@dataclass(frozen=True)
class DataType:
    tag: str
    args: tuple[Multiset, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.tag
        return f"{self.tag}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Star:
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True)
class Arrow:
    dom: Multiset
    cod: TermType

    def __str__(self) -> str:
        return f"{self.dom} -> {self.cod}"


TermType = Union[DataType, Star, Arrow]
STAR = Star()


@dataclass(frozen=True)
class Multiset:
    """Finite multiset of term types; items are kept in a canonical order."""

    items: tuple[TermType, ...] = ()

    @staticmethod
    def of(items: Iterable[TermType]) -> Multiset:
        return Multiset(tuple(sorted(items, key=str)))

    def __add__(self, other: Multiset) -> Multiset:
        return Multiset.of(self.items + other.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __str__(self) -> str:
        return "[" + ", ".join(map(str, self.items)) + "]"

    def counts(self) -> Counter:
        return Counter(self.items)

    def contains(self, other: Multiset) -> bool:
        mine = self.counts()
        return all(mine[k] >= n for k, n in other.counts().items())

    def minus(self, other: Multiset) -> Multiset:
        c = self.counts()
        c.subtract(other.counts())
        if any(v < 0 for v in c.values()):
            raise ValueError(f"{other} is not a sub-multiset of {self}")
        return Multiset.of(c.elements())


EMPTY = Multiset()


def mset(*items: TermType) -> Multiset:
    return Multiset.of(items)


@dataclass(frozen=True)
class Context:
    """Total map from variables to multisets with finite support."""

    entries: tuple[tuple[str, Multiset], ...] = ()

    @staticmethod
    def of(mapping: Mapping[str, Multiset] | Iterable[tuple[str, Multiset]]) -> Context:
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return Context(tuple(sorted((k, v) for k, v in items if len(v))))

    def __call__(self, x: str) -> Multiset:
        for k, v in self.entries:
            if k == x:
                return v
        return EMPTY

    def dom(self) -> set[str]:
        return {k for k, _ in self.entries}

    def __add__(self, other: Context) -> Context:
        acc: dict[str, Multiset] = dict(self.entries)
        for k, v in other.entries:
            acc[k] = acc.get(k, EMPTY) + v
        return Context.of(acc)

    def restrict(self, xs: Iterable[str]) -> Context:
        xs = set(xs)
        return Context(tuple((k, v) for k, v in self.entries if k in xs))

    def remove(self, xs: Iterable[str]) -> Context:
        xs = set(xs)
        return Context(tuple((k, v) for k, v in self.entries if k not in xs))

    def rename(self, ren: Mapping[str, str]) -> Context:
        return Context.of([(ren.get(k, k), v) for k, v in self.entries])

    def __str__(self) -> str:
        return ", ".join(f"{k}:{v}" for k, v in self.entries)

    def to_json(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.entries}


EMPTY_CTX = Context()


def union(g: Context, d: Context) -> Context:
    return g + d


def restrict(g: Context, xs: Iterable[str]) -> Context:
    return g.restrict(xs)


def remove(g: Context, xs: Iterable[str]) -> Context:
    return g.remove(xs)


# ----------------------------------------------------------------- parsing


class _TypeParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)

    def term_type(self) -> TermType:
        ts = self.ts
        if ts.at("["):
            m = self.multiset()
            ts.expect("->")
            return Arrow(m, self.term_type())
        if ts.at("*"):
            ts.next()
            return STAR
        if ts.at("("):
            ts.next()
            t = self.term_type()
            ts.expect(")")
            return t
        tok = ts.peek
        if tok.kind != "tag":
            ts.error("expected a type")
        ts.next()
        args: list[Multiset] = []
        if ts.at("("):
            ts.next()
            if not ts.at(")"):
                args.append(self.multiset())
                while ts.at(","):
                    ts.next()
                    args.append(self.multiset())
            ts.expect(")")
        return DataType(tok.value, tuple(args))

    def multiset(self) -> Multiset:
        ts = self.ts
        ts.expect("[")
        items: list[TermType] = []
        if not ts.at("]"):
            items.append(self.term_type())
            while ts.at(","):
                ts.next()
                items.append(self.term_type())
        ts.expect("]")
        return Multiset.of(items)

    def finish(self):
        if self.ts.peek.kind != "eof":
            self.ts.error("unexpected trailing input")


def parse_type(text: str) -> TermType:
    p = _TypeParser(text)
    t = p.term_type()
    p.finish()
    return t


def parse_multiset(text: str) -> Multiset:
    p = _TypeParser(text)
    m = p.multiset()
    p.finish()
    return m


def parse_any_type(text: str) -> TermType | Multiset:
    """A multiset if the text is a bare ``[...]``, else a term type."""
    p = _TypeParser(text)
    if p.ts.at("["):
        m = p.multiset()
        if p.ts.peek.kind == "eof":
            return m
        p.ts.expect("->")
        t: TermType | Multiset = Arrow(m, p.term_type())
    else:
        t = p.term_type()
    p.finish()
    return t


__all__ = [
    "Arrow",
    "Context",
    "DataType",
    "EMPTY",
    "EMPTY_CTX",
    "Multiset",
    "ParseError",
    "STAR",
    "Star",
    "TermType",
    "mset",
    "parse_any_type",
    "parse_multiset",
    "parse_type",
    "remove",
    "restrict",
    "union",
]

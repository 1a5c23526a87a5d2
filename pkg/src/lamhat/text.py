"""Concrete syntax: lexer, parser and pretty-printer for terms and patterns.

Grammar (``#`` starts a line comment)::

    program ::= ("tag" Tag "/" INT ";")* term
    term    ::= "\\" pattern "." term | app
    app     ::= postfix+ ["\\" pattern "." term]
    postfix ::= atom ("[" pattern "/" term "]")*
    atom    ::= var | "I" | Tag ["(" term ("," term)* ")"] | "(" term ")"
              (the argument list must directly follow the tag)
              | "case" term "of" "{" pattern "->" term ("|" pattern "->" term)* "}"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .syntax import (
    Abs,
    App,
    Branch,
    Case,
    Data,
    IDENTITY,
    Match,
    PData,
    PVar,
    Pattern,
    Term,
    Var,
    pattern_vars,
)

KEYWORDS = {"case", "of", "tag"}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", offset: int = 0):
        self.offset = offset
        line = text.count("\n", 0, offset) + 1
        col = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{line}:{col}: {msg}")


@dataclass(frozen=True)
class Token:
    kind: str  # var | tag | int | sym | eof
    value: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<var>[a-z_][A-Za-z0-9_']*)
  | (?P<tag>[A-Z][A-Za-z0-9_']*)
  | (?P<int>\d+)
  | (?P<sym>->|[\\.()\[\]/{}|,;!*λ])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if val == "λ":
                val = "\\"
            out.append(Token(kind, val, SourceSpan(m.start(), m.end())))
        pos = m.end()
    out.append(Token("eof", "", SourceSpan(len(text), len(text))))
    return out


class TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, value: str, kind: str = "sym") -> bool:
        t = self.peek
        return t.kind == kind and t.value == value

    def adjacent_paren(self, tok: Token) -> bool:
        """An argument list must touch its tag: ``C(a)`` is data, ``C (a)``
        applies the nullary ``C``."""
        return self.at("(") and self.peek.span.start == tok.span.end

    def at_keyword(self, kw: str) -> bool:
        return self.at(kw, "var")

    def expect(self, value: str, kind: str = "sym") -> Token:
        if not self.at(value, kind):
            self.error(f"expected {value!r}")
        return self.next()

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek
        found = tok.value or "end of input"
        raise ParseError(f"{msg}, found {found!r}", self.text, tok.span.start)


class Registry(dict):
    """Tag name -> arity; the first use (or declaration) fixes the arity."""

    def use(self, tag: str, n: int, ts: TokenStream, tok: Token) -> None:
        if tag == "I":
            ts.error("'I' is reserved for the identity", tok)
        if tag in self and self[tag] != n:
            ts.error(f"tag {tag} has arity {self[tag]}, used with {n} arguments", tok)
        self.setdefault(tag, n)


# ---------------------------------------------------------------- parser


class TermParser:
    def __init__(self, text: str, registry: Registry | None = None):
        self.ts = TokenStream(text)
        self.reg = registry if registry is not None else Registry()

    # patterns
    def pattern(self) -> Pattern:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "var" and tok.value not in KEYWORDS:
            ts.next()
            return PVar(tok.value)
        if tok.kind == "tag":
            ts.next()
            args: list[Pattern] = []
            if ts.adjacent_paren(tok):
                ts.next()
                if not ts.at(")"):
                    args.append(self.pattern())
                    while ts.at(","):
                        ts.next()
                        args.append(self.pattern())
                ts.expect(")")
            self.reg.use(tok.value, len(args), ts, tok)
            p = PData(tok.value, tuple(args))
            vs = pattern_vars(p)
            if len(vs) != len(set(vs)):
                ts.error("non-linear pattern", tok)
            return p
        ts.error("expected a pattern")

    # terms
    def term(self) -> Term:
        if self.ts.at("\\"):
            return self.lam()
        return self.app()

    def lam(self) -> Term:
        ts = self.ts
        ts.expect("\\")
        tok = ts.peek
        p = self.pattern()
        vs = pattern_vars(p)
        if len(vs) != len(set(vs)):
            ts.error("non-linear pattern", tok)
        ts.expect(".")
        return Abs(p, self.term())

    def _starts_atom(self) -> bool:
        t = self.ts.peek
        if t.kind == "var":
            return t.value not in KEYWORDS or t.value == "case"
        return t.kind == "tag" or (t.kind == "sym" and t.value == "(")

    def app(self) -> Term:
        if not self._starts_atom():
            self.ts.error("expected a term")
        t = self.postfix()
        while True:
            if self._starts_atom():
                t = App(t, self.postfix())
            elif self.ts.at("\\"):
                t = App(t, self.lam())
                break
            else:
                break
        return t

    def postfix(self) -> Term:
        ts = self.ts
        t = self.atom()
        while ts.at("["):
            ts.next()
            p = self.pattern()
            ts.expect("/")
            u = self.term()
            ts.expect("]")
            t = Match(t, p, u)
        return t

    def atom(self) -> Term:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "var" and tok.value == "case":
            return self.case()
        if tok.kind == "var" and tok.value not in KEYWORDS:
            ts.next()
            return Var(tok.value)
        if tok.kind == "tag":
            ts.next()
            if tok.value == "I":
                if ts.adjacent_paren(tok):
                    ts.error("'I' is reserved for the identity", tok)
                return IDENTITY
            args: list[Term] = []
            if ts.adjacent_paren(tok):
                ts.next()
                if not ts.at(")"):
                    args.append(self.term())
                    while ts.at(","):
                        ts.next()
                        args.append(self.term())
                ts.expect(")")
            self.reg.use(tok.value, len(args), ts, tok)
            return Data(tok.value, tuple(args))
        if ts.at("("):
            ts.next()
            t = self.term()
            ts.expect(")")
            return t
        ts.error("expected a term")

    def case(self) -> Term:
        ts = self.ts
        ts.expect("case", "var")
        scr = self.term()
        ts.expect("of", "var")
        ts.expect("{")
        if ts.at("}"):
            ts.error("case needs at least one branch")
        branches = [self.branch()]
        while ts.at("|"):
            ts.next()
            branches.append(self.branch())
        ts.expect("}")
        return Case(scr, tuple(branches))

    def branch(self) -> Branch:
        ts = self.ts
        tok = ts.peek
        p = self.pattern()
        if not isinstance(p, PData):
            ts.error("branch patterns must be data patterns", tok)
        ts.expect("->")
        body = self.term()
        return Branch(p, body)

    def declarations(self) -> None:
        ts = self.ts
        while ts.at_keyword("tag"):
            ts.next()
            tok = ts.peek
            if tok.kind != "tag":
                ts.error("expected a tag name")
            ts.next()
            ts.expect("/")
            n = ts.peek
            if n.kind != "int":
                ts.error("expected an arity")
            ts.next()
            ts.expect(";")
            self.reg.use(tok.value, int(n.value), ts, tok)

    def finish(self) -> None:
        if self.ts.peek.kind != "eof":
            self.ts.error("unexpected trailing input")


def _check_cases(t: Term, ts: TokenStream) -> None:
    # distinct branch tags
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Case):
            tags = [b.pattern.tag for b in u.branches]
            if len(tags) != len(set(tags)):
                raise ParseError("case branches must have distinct tags", ts.text, 0)
            stack.append(u.scrutinee)
            stack.extend(b.body for b in u.branches)
        elif isinstance(u, Abs):
            stack.append(u.body)
        elif isinstance(u, App):
            stack += [u.fun, u.arg]
        elif isinstance(u, Match):
            stack += [u.body, u.arg]
        elif isinstance(u, Data):
            stack.extend(u.args)


def parse_program(text: str, registry: Registry | None = None) -> tuple[Term, Registry]:
    """Parse optional ``tag C/n;`` declarations followed by one term."""
    p = TermParser(text, registry)
    p.declarations()
    t = p.term()
    p.finish()
    _check_cases(t, p.ts)
    return t, p.reg


def parse(text: str, registry: Registry | None = None) -> Term:
    return parse_program(text, registry)[0]


def parse_pattern(text: str, registry: Registry | None = None) -> Pattern:
    p = TermParser(text, registry)
    pat = p.pattern()
    p.finish()
    return pat


# ---------------------------------------------------------- pretty-printer

# precedence levels: 0 = anywhere, 1 = function position, 2 = argument / match body
def pretty_pattern(p: Pattern) -> str:
    if isinstance(p, PVar):
        return p.name
    if not p.args:
        return p.tag
    return f"{p.tag}({', '.join(pretty_pattern(q) for q in p.args)})"


def pretty(t: Term) -> str:
    return _pp(t, 0)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _pp(t: Term, level: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return _paren(f"\\{pretty_pattern(t.pattern)}.{_pp(t.body, 0)}", level > 0)
    if isinstance(t, App):
        return _paren(f"{_pp(t.fun, 1)} {_pp(t.arg, 2)}", level > 1)
    if isinstance(t, Match):
        return f"{_pp(t.body, 2)}[{pretty_pattern(t.pattern)}/{_pp(t.arg, 0)}]"
    if isinstance(t, Data):
        if not t.args:
            return t.tag
        return f"{t.tag}({', '.join(_pp(a, 0) for a in t.args)})"
    bs = " | ".join(f"{pretty_pattern(b.pattern)} -> {_pp(b.body, 0)}" for b in t.branches)
    return f"case {_pp(t.scrutinee, 0)} of {{{bs}}}"

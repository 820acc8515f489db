"""Recursive-descent parser for the expression grammar.

    expr   := term (("+"|"-") term)*
    term   := unary (("*"|"/") unary)*
    unary  := "-" unary | factor
    factor := base ("^" unary)?
    base   := NUMBER | IDENT | "(" expr ")" | FUNC "(" expr ")"

Decimal literals become exact rationals.  Exponents must reduce to a
rational constant.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Container

from .expr import FUNCTIONS, Const, Expr, add, func, mul, neg, power, symbol


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, pos: int, text: str = ""):
        self.name = name
        ValueError.__init__(self, f"unknown identifier {name!r} at position {pos}")
        self.pos = pos
        self.text = text


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            while pos < n and text[pos].isspace():
                pos += 1
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, names: Container[str] | None):
        self.text = text
        self.names = names
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        acc = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            acc.append(t if op == "+" else neg(t))
        return add(*acc) if len(acc) > 1 else acc[0]

    def term(self) -> Expr:
        acc = [self.unary()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1:]
            u = self.unary()
            if op == "/":
                try:
                    u = power(u, -1)
                except ZeroDivisionError:
                    raise ParseError("division by zero", pos, self.text) from None
            acc.append(u)
        return mul(*acc) if len(acc) > 1 else acc[0]

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return neg(self.unary())
        return self.factor()

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[:2] == ("op", "^"):
            pos = self.take()[2]
            e = self.unary()
            if not isinstance(e, Const):
                raise ParseError("exponent must be a rational constant", pos, self.text)
            try:
                return power(b, e.value)
            except ZeroDivisionError:
                raise ParseError("division by zero", pos, self.text) from None
        return b

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(Fraction(val))
        if kind == "id":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(val, arg)
            if self.peek()[:2] == ("op", "("):
                raise ParseError(f"unknown function {val!r}", pos, self.text)
            if self.names is not None and val not in self.names:
                raise UnknownIdentifierError(val, pos, self.text)
            return symbol(val)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos, self.text)


def parse_expr(text: str, table=None) -> Expr:
    """Parse ``text`` into a normalized expression.

    ``table`` is a :class:`SymbolTable` (or any container of names); when
    given, identifiers outside it are rejected.
    """
    names = None
    if table is not None:
        names = table.names() if hasattr(table, "names") else set(table)
    return _Parser(text, names).parse()

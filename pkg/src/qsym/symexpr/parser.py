"""Recursive-descent parser for the expression grammar.

Precedence, loosest to tightest: ``+ -`` < ``* /`` < unary minus < ``^``.
``^`` is right-associative and its right operand may carry a unary sign
(``x^-2``). Identifiers are real-domain symbols unless listed in
``complex_symbols``; ``i`` and ``pi`` are reserved constants.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import DomainError, ExprSyntaxError
from .core import FUNCTIONS, I, MINUS_ONE, PI, Expr, Num, Symbol, add, fn, mul, power

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

RESERVED = frozenset(FUNCTIONS) | {"i", "pi"}


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, complex_symbols, domains):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.complex_symbols = frozenset(complex_symbols)
        self.domains = dict(domains or {})

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, message: str):
        kind, value, pos = self.tok
        if kind == "end":
            message = f"{message}: unexpected end of input"
        else:
            message = f"{message}: unexpected {value!r}"
        raise ExprSyntaxError(message, pos, self.text)

    def accept(self, value: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            self.error(f"expected {value!r}")

    def parse(self) -> Expr:
        e = self.sum()
        if self.tok[0] != "end":
            self.error("expected end of expression")
        return e

    def sum(self) -> Expr:
        terms = [self.product()]
        while True:
            if self.accept("+"):
                terms.append(self.product())
            elif self.accept("-"):
                terms.append(mul((MINUS_ONE, self.product())))
            else:
                return add(terms) if len(terms) > 1 else terms[0]

    def product(self) -> Expr:
        factors = [self.unary()]
        while True:
            if self.accept("*"):
                factors.append(self.unary())
            elif self.accept("/"):
                factors.append(power(self.unary(), MINUS_ONE))
            else:
                return mul(factors) if len(factors) > 1 else factors[0]

    def unary(self) -> Expr:
        if self.accept("-"):
            return mul((MINUS_ONE, self.unary()))
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return power(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            if any(c in value for c in ".eE"):
                return Num(float(value))
            return Num(int(value))
        if kind == "name":
            self.i += 1
            if self.tok[0] == "op" and self.tok[1] == "(":
                if value not in FUNCTIONS:
                    raise DomainError(f"unknown function {value!r} at offset {pos}")
                self.i += 1
                arg = self.sum()
                self.expect(")")
                return fn(value, arg)
            if value in FUNCTIONS:
                self.error(f"function {value!r} requires an argument")
            if value == "i":
                return I
            if value == "pi":
                return PI
            if value in self.domains:
                return Symbol(value, self.domains[value])
            return Symbol(value, "complex" if value in self.complex_symbols else "real")
        if self.accept("("):
            e = self.sum()
            self.expect(")")
            return e
        self.error("expected a number, name or '('")


def parse_expr(text: str, complex_symbols=(), domains=None) -> Expr:
    """Parse ``text`` into a light-canonical expression.

    >>> str(parse_expr("2*pi"))
    '2*pi'
    """
    if not isinstance(text, str):
        raise TypeError("parse_expr expects a string")
    return _Parser(text, complex_symbols, domains).parse()

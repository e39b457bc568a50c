"""Recursive-descent parser for the expression grammar.

    expr     := term { ("+"|"-") term }
    term     := factor { ("*"|"/") factor }
    factor   := ["-"] base ["^" signed-integer]
    base     := rational | ident | "(" expr ")"
    rational := integer ["/" integer]

Jet identifiers are ``<field>_<indices>``; the index string is split into
declared base-variable names and sorted.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, UnknownIdentifier
from .symexpr import Expr

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]*)?)|([-+*/^()]))")


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        if m.group(1):
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("ident", m.group(2), m.start(2)))
        else:
            tokens.append((m.group(3), m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, bundle):
        self.text = text
        self.bundle = bundle
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def accept(self, kind):
        if self.peek()[0] == kind:
            self.i += 1
            return True
        return False

    def expect(self, kind, what):
        tok = self.peek()
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {what}, found {found}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        self.expect("end", "end of input")
        return e

    def expr(self):
        e = self.term()
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            if self.accept("*"):
                e = e * self.factor()
            elif self.peek()[0] == "/":
                pos = self.peek()[2]
                self.i += 1
                d = self.factor()
                if d.is_zero:
                    raise ParseError("division by zero", pos, self.text)
                e = e / d
            else:
                return e

    def factor(self):
        neg = self.accept("-")
        b = self.base()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            if sign == 1:
                self.accept("+")
            tok = self.expect("int", "integer exponent")
            k = sign * int(tok[1])
            if k < 0 and b.is_zero:
                raise ParseError("zero raised to a negative power", tok[2], self.text)
            b = b ** k
        return -b if neg else b

    def base(self):
        tok = self.peek()
        if tok[0] == "int":
            self.i += 1
            value = Fraction(int(tok[1]))
            if self.peek()[0] == "/" and self.peek(1)[0] == "int":
                den = int(self.peek(1)[1])
                if den == 0:
                    raise ParseError("division by zero", self.peek()[2], self.text)
                self.i += 2
                value /= den
            return Expr(value)
        if tok[0] == "ident":
            self.i += 1
            try:
                return Expr.symbol(self.bundle.resolve(tok[1]))
            except ParseError as exc:
                cls = UnknownIdentifier if isinstance(exc, UnknownIdentifier) else ParseError
                raise cls(str(exc), tok[2], self.text) from None
        if tok[0] == "(":
            self.i += 1
            e = self.expr()
            self.expect(")", "')'")
            return e
        found = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ParseError(f"expected a number, identifier or '(', found {found}", tok[2], self.text)


def parse(text: str, bundle) -> Expr:
    """Parse ``text`` into a normal-form :class:`Expr` over ``bundle``'s symbols."""
    return _Parser(text, bundle).parse()

"""Expression grammar for defining equations and maps, plus the canonical printer.

Grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' natural)?
    atom   := integer | 'i' | identifier | '(' expr ')' | '-' atom

Coefficients are Gaussian rationals; anything irrational is a syntax error
by construction (there are no radicals or decimals in the grammar).
Division by a series with nonzero constant term expands through unit
inversion and marks the result inexact; division by a constant is exact.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from .errors import ParseError, PreconditionError
from .gaussian import GaussianRational, format_gaussian
from .series import TruncatedSeries, VariableContext, grlex_key, invert_unit

_TOKEN = re.compile(r"\s*(?:(\d+)|([a-z][a-z0-9]*)|([-+*/^()])|(\S))")


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        number, ident, op, bad = m.groups()
        start = m.start(1) if number else m.start(2) if ident else m.start(3) if op else m.start(4)
        if bad:
            raise ParseError(f"unexpected character {bad!r}", start)
        if number:
            tokens.append(("int", int(number), start))
        elif ident:
            tokens.append(("ident", ident, start))
        else:
            tokens.append((op, op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, context: VariableContext, truncation: int):
        self.text = text
        self.tokens = tokenize(text)
        self.k = 0
        self.context = context
        self.truncation = truncation

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> TruncatedSeries:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def expr(self) -> TruncatedSeries:
        value = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> TruncatedSeries:
        value = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                value = self._divide(value, rhs, pos)
        return value

    def _divide(self, num, den, pos):
        c = den.constant_term()
        if den.terms and all(sum(m) == 0 for m in den.terms):
            return num * c.inverse()
        if c.is_zero():
            raise ParseError(
                "division requires a denominator with nonzero constant term", pos
            )
        return num * invert_unit(den, self.truncation)

    def factor(self) -> TruncatedSeries:
        value = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise ParseError("exponent must be a natural number", tok[2])
            value = value**tok[1]
        return value

    def atom(self) -> TruncatedSeries:
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            return TruncatedSeries.constant(self.context, value)
        if kind == "ident":
            if value == "i":
                return TruncatedSeries.constant(self.context, GaussianRational(0, 1))
            try:
                return TruncatedSeries.variable(self.context, value)
            except Exception:
                raise ParseError(f"unknown identifier {value!r}", pos) from None
        if kind == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "-":
            return -self.atom()
        raise ParseError(f"unexpected {value!r}", pos)


def parse_expression(text: str, context: VariableContext, truncation: int) -> TruncatedSeries:
    """Parse ``text`` into a canonical series over ``context``.

    Polynomial input stays exact; only division by a non-constant unit
    introduces the working truncation.
    """
    return _Parser(text, context, truncation).parse()


# -- printing --------------------------------------------------------------


def format_monomial(context: VariableContext, mono) -> str:
    parts = []
    for name, e in zip(context.names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def _format_term(context, mono, coeff, leading: bool) -> tuple[str, str]:
    """Return (sign, body) where sign is '+' or '-' for joining."""
    mono_str = format_monomial(context, mono)
    re_part, im_part = coeff.re, coeff.im
    if re_part != 0 and im_part != 0:
        # mixed coefficients are parenthesised and never sign-split
        body = format_gaussian(coeff)
        if mono_str != "1":
            body = f"{body}*{mono_str}"
        return "+", body
    value = re_part if im_part == 0 else im_part
    sign = "-" if value < 0 else "+"
    mag = -value if value < 0 else value
    unit = "" if im_part == 0 else "i"
    if mono_str == "1":
        body = f"{mag}" if not unit else ("i" if mag == 1 else f"{mag}*i")
    elif mag == 1 and not unit:
        body = mono_str
    elif unit:
        body = f"i*{mono_str}" if mag == 1 else f"{mag}*i*{mono_str}"
    else:
        body = f"{mag}*{mono_str}"
    if leading and sign == "-":
        # keep the printed form reparseable: a leading minus must not bind
        # into a following power, so spell the coefficient out
        if body == mono_str:
            body = f"1*{mono_str}"
        return "-", body
    return sign, body


def format_series(s: TruncatedSeries) -> str:
    if not s.terms:
        return "0"
    items = sorted(s.terms.items(), key=lambda kv: grlex_key(kv[0]))
    out = []
    for k, (mono, coeff) in enumerate(items):
        sign, body = _format_term(s.context, mono, coeff, leading=(k == 0))
        if k == 0:
            out.append(f"-{body}" if sign == "-" else body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)

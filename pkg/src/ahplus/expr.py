"""Parser for scalar expressions.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' ['-'] int)?
    atom   := int | 'sqrt17' | 'b(' ['-'] int ')' | 'sqrt(' expr ')' | '(' expr ')'

Unary minus binds looser than '^', so ``-b(1)^2`` is ``-(b(1)^2)``.

``b(n)`` is beta_n = sqrt((7+sqrt17)/2 - n).  ``Scalar.serialize`` emits this grammar.
"""

from __future__ import annotations

import re

from .qsqrt17 import SQRT17
from .scalars import Scalar, ScalarError, beta

__all__ = ["parse_scalar", "ExprSyntaxError"]

_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt17)|(sqrt)|(b)|(\^)|([-+*/()]))")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.pos = pos
        self.text = text


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError("unexpected character", text, pos)
        start = m.start(m.lastindex)
        kind = ("int", "sqrt17", "sqrt", "b", "^", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ExprSyntaxError(f"expected {value!r}", self.text, pos)

    def error(self, message: str):
        raise ExprSyntaxError(message, self.text, self.peek()[2])

    def expr(self) -> Scalar:
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Scalar:
        value = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ZeroDivisionError(f"division by zero at position {pos}: {self.text!r}")
                value = value / rhs
        return value

    def factor(self) -> Scalar:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return -self.factor()
        value = self.atom()
        if self.peek()[0] == "^":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            kind, val, pos = self.take()
            if kind != "int":
                raise ExprSyntaxError("expected integer exponent", self.text, pos)
            n = -int(val) if neg else int(val)
            if n < 0 and value.is_zero():
                raise ZeroDivisionError(f"zero to a negative power at position {pos}")
            value = value**n
        return value

    def atom(self) -> Scalar:
        kind, val, pos = self.take()
        if kind == "int":
            return Scalar.coerce(int(val))
        if kind == "sqrt17":
            return Scalar.coerce(SQRT17)
        if kind == "b":
            self.expect("(")
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            k2, v2, p2 = self.take()
            if k2 != "int":
                raise ExprSyntaxError("expected integer index", self.text, p2)
            self.expect(")")
            n = -int(v2) if neg else int(v2)
            return beta(n)
        if kind == "sqrt":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            try:
                return inner.sqrt()
            except ScalarError as exc:
                raise type(exc)(f"{exc} (sqrt at position {pos})") from None
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExprSyntaxError("unexpected token", self.text, pos)


def parse_scalar(text: str) -> Scalar:
    """Parse a scalar expression into its exact canonical form."""
    p = _Parser(text)
    value = p.expr()
    if p.peek()[0] != "end":
        p.error("trailing input")
    return value

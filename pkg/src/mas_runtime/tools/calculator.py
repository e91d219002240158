"""Arithmetic expression evaluator: + - * / with parentheses and unary minus."""

from __future__ import annotations

from ..errors import MasError


class CalcParseError(MasError):
    pass


class DivisionByZero(MasError):
    pass


class _Parser:
    """Recursive descent over the usual precedence ladder."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> float:
        value = self._expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise CalcParseError(f"unexpected character {self.text[self.pos]!r} at {self.pos}")
        return value

    def _expr(self) -> float:
        value = self._term()
        while True:
            op = self._peek_op("+-")
            if op is None:
                return value
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs

    def _term(self) -> float:
        value = self._factor()
        while True:
            op = self._peek_op("*/")
            if op is None:
                return value
            rhs = self._factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise DivisionByZero("division by zero")
                value = value / rhs

    def _factor(self) -> float:
        self._skip_ws()
        if self.pos >= len(self.text):
            raise CalcParseError("unexpected end of expression")
        ch = self.text[self.pos]
        if ch == "-":
            self.pos += 1
            return -self._factor()
        if ch == "(":
            self.pos += 1
            value = self._expr()
            self._skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise CalcParseError("unbalanced parenthesis")
            self.pos += 1
            return value
        return self._number()

    def _number(self) -> float:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            self.pos += 1
        token = self.text[start:self.pos]
        if not token or token == ".":
            raise CalcParseError(f"expected a number at position {start}")
        try:
            return float(token)
        except ValueError:
            raise CalcParseError(f"bad numeric literal {token!r}") from None

    def _peek_op(self, ops: str) -> str | None:
        self._skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] in ops:
            op = self.text[self.pos]
            self.pos += 1
            return op
        return None

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1


def calculator_eval(expr: str) -> float:
    """Evaluate with standard precedence. Raises CalcParseError / DivisionByZero."""
    return _Parser(expr).parse()


def format_number(value: float) -> str:
    """Integers render without a decimal point: 14.0 -> "14"."""
    if value == int(value):
        return str(int(value))
    return repr(value)

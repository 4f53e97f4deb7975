"""Expression trees and canonical answer values.

Math answers are held in one of four forms: an exact rational, a decimal
rounded to a fixed number of significant digits, a symbolic expression
tree, or the raw string when parsing failed.  Exact rationals are backed
by :class:`fractions.Fraction`, which already guarantees a positive
denominator and a reduced numerator/denominator pair.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass, field
from fractions import Fraction

Rational = Fraction

DECIMAL_PRECISION = 10

FUNCTIONS = ("sin", "cos", "tan", "log", "sqrt")
CONSTANTS = ("pi", "e")

_BINARY = ("add", "sub", "mul", "div", "pow")
_ARITY = {"num": 0, "const": 0, "var": 0, "neg": 1, "call": 1,
          **{k: 2 for k in _BINARY}}


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    kind is one of: num, const, var, neg, add, sub, mul, div, pow, call.
    ``value`` holds the payload (Fraction for num, name for const/var/call);
    ``args`` holds the children.
    """

    kind: str
    value: object = None
    args: tuple["Expr", ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.args) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {_ARITY[self.kind]} args, "
                             f"got {len(self.args)}")
        if self.kind == "call" and self.value not in FUNCTIONS:
            raise ValueError(f"unknown function {self.value!r}")
        if self.kind == "const" and self.value not in CONSTANTS:
            raise ValueError(f"unknown constant {self.value!r}")
        if self.kind == "num" and not isinstance(self.value, Fraction):
            raise ValueError("num nodes store exact rationals")


def num(value) -> Expr:
    return Expr("num", Fraction(value))


def const(name: str) -> Expr:
    return Expr("const", name)


def var(name: str) -> Expr:
    return Expr("var", name)


def neg(x: Expr) -> Expr:
    return Expr("neg", None, (x,))


def add(a: Expr, b: Expr) -> Expr:
    return Expr("add", None, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return Expr("sub", None, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    return Expr("mul", None, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    return Expr("div", None, (a, b))


def pow_(a: Expr, b: Expr) -> Expr:
    return Expr("pow", None, (a, b))


def call(name: str, arg: Expr) -> Expr:
    return Expr("call", name, (arg,))


def free_vars(e: Expr) -> frozenset[str]:
    if e.kind == "var":
        return frozenset((e.value,))
    out: frozenset[str] = frozenset()
    for child in e.args:
        out |= free_vars(child)
    return out


def contains_const(e: Expr) -> bool:
    if e.kind == "const":
        return True
    return any(contains_const(c) for c in e.args)


@dataclass(frozen=True)
class AnswerValue:
    """A normalized mathematical answer.

    Exactly one payload field is populated, matching ``kind``:
    exact -> rational, decimal -> dec, symbolic -> expr, unparsed -> raw.
    """

    kind: str
    rational: Fraction | None = None
    dec: decimal.Decimal | None = None
    expr: Expr | None = None
    raw: str | None = None
    precision: int = DECIMAL_PRECISION

    @staticmethod
    def exact(value) -> "AnswerValue":
        return AnswerValue("exact", rational=Fraction(value))

    @staticmethod
    def decimal(value: decimal.Decimal,
                precision: int = DECIMAL_PRECISION) -> "AnswerValue":
        return AnswerValue("decimal", dec=value, precision=precision)

    @staticmethod
    def symbolic(expr: Expr) -> "AnswerValue":
        return AnswerValue("symbolic", expr=expr)

    @staticmethod
    def unparsed(raw: str) -> "AnswerValue":
        return AnswerValue("unparsed", raw=raw)

    def is_numeric(self) -> bool:
        """True when the value denotes a single real number with no free variables."""
        if self.kind in ("exact", "decimal"):
            return True
        if self.kind == "symbolic":
            return not free_vars(self.expr)
        return False


# Rendering ----------------------------------------------------------------

_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _render_expr(e: Expr, parent_prec: int = 0) -> str:
    if e.kind == "num":
        text = str(e.value)
        if e.value < 0:
            return f"({text})" if parent_prec > 0 else text
        return text
    if e.kind == "const":
        return "pi" if e.value == "pi" else "e"
    if e.kind == "var":
        return e.value
    if e.kind == "neg":
        inner = _render_expr(e.args[0], _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if e.kind == "call":
        return f"{e.value}({_render_expr(e.args[0])})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[e.kind]
    prec = _PRECEDENCE[e.kind]
    # Right operand of -, /, ^ needs parens at equal precedence.
    left = _render_expr(e.args[0], prec if e.kind != "pow" else prec + 1)
    right = _render_expr(e.args[1], prec + 1 if e.kind != "pow" else prec)
    text = f"{left} {op} {right}" if e.kind != "pow" else f"{left}{op}{right}"
    return f"({text})" if prec < parent_prec else text


def render(v: AnswerValue) -> str:
    """Render an answer back to a parseable string (point locale)."""
    if v.kind == "exact":
        return str(v.rational)
    if v.kind == "decimal":
        return str(v.dec)
    if v.kind == "symbolic":
        return _render_expr(v.expr)
    return v.raw if v.raw is not None else ""

"""Arbitrary-precision numeric evaluation of expression trees.

Evaluation runs through mpmath with guard digits, then rounds to the
requested number of significant digits with ties away from zero.
Domain violations (division by exact zero, log/sqrt outside the real
line, negative base under a fractional power) raise DomainError.
"""

from __future__ import annotations

import decimal
from decimal import Decimal
from fractions import Fraction

import mpmath
from mpmath import mp

from ..errors import DomainError

from .expr import AnswerValue, Expr

_GUARD_DIGITS = 15
_EQUIV_DPS = 30


def _frac_to_mpf(value: Fraction):
    return mpmath.mpf(value.numerator) / mpmath.mpf(value.denominator)


def eval_tree(e: Expr, bindings: dict[str, object] | None = None):
    """Evaluate under the current mpmath context; returns an mpf."""
    bindings = bindings or {}
    if e.kind == "num":
        return _frac_to_mpf(e.value)
    if e.kind == "const":
        return mp.pi if e.value == "pi" else mp.e
    if e.kind == "var":
        try:
            return mpmath.mpf(bindings[e.value])
        except KeyError:
            raise DomainError(f"unbound variable {e.value!r}") from None
    if e.kind == "neg":
        return -eval_tree(e.args[0], bindings)
    if e.kind == "call":
        arg = eval_tree(e.args[0], bindings)
        if e.value == "sqrt":
            if arg < 0:
                raise DomainError("sqrt of a negative value")
            return mpmath.sqrt(arg)
        if e.value == "log":
            if arg <= 0:
                raise DomainError("log of a non-positive value")
            return mpmath.log(arg)
        return getattr(mpmath, e.value)(arg)
    left = eval_tree(e.args[0], bindings)
    right = eval_tree(e.args[1], bindings)
    if e.kind == "add":
        return left + right
    if e.kind == "sub":
        return left - right
    if e.kind == "mul":
        return left * right
    if e.kind == "div":
        if right == 0:
            raise DomainError("division by zero")
        return left / right
    # pow
    if left == 0 and right < 0:
        raise DomainError("zero raised to a negative power")
    if left < 0:
        if right != mpmath.floor(right):
            raise DomainError("negative base with fractional exponent")
        magnitude = mpmath.power(-left, right)
        return -magnitude if mpmath.isodd(right) else magnitude
    return mpmath.power(left, right)


def round_significant(d: Decimal, precision: int) -> Decimal:
    """Round to ``precision`` significant digits, ties away from zero."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    with decimal.localcontext() as ctx:
        ctx.prec = max(precision + _GUARD_DIGITS, 28)
        if d == 0:
            return Decimal(0)
        quantum = Decimal(1).scaleb(d.adjusted() - precision + 1)
        out = d.quantize(quantum, rounding=decimal.ROUND_HALF_UP)
        if out.adjusted() > d.adjusted():
            # Rounding carried into a new leading digit (0.999.. -> 1.0).
            out = out.quantize(Decimal(1).scaleb(out.adjusted() - precision + 1),
                               rounding=decimal.ROUND_HALF_UP)
        return out


def eval_numeric(e: Expr, precision: int = 10) -> Decimal:
    """Numeric value of a closed expression at ``precision`` significant digits."""
    with mp.workdps(precision + _GUARD_DIGITS):
        value = eval_tree(e)
        if not mpmath.isfinite(value):
            raise DomainError("expression does not evaluate to a finite value")
        text = mpmath.nstr(value, precision + 8, strip_zeros=True)
    return round_significant(Decimal(text), precision)


def value_mpf(v: AnswerValue):
    """mpf value of a closed answer under the current mpmath context."""
    if v.kind == "exact":
        return _frac_to_mpf(v.rational)
    if v.kind == "decimal":
        return mpmath.mpf(str(v.dec))
    if v.kind == "symbolic":
        return eval_tree(v.expr)
    raise DomainError("unparsed answers have no numeric value")


def rel_close(y1, y2, eps: float) -> bool:
    """Relative-difference test: |y1-y2| / max(|y1|,|y2|,1) < eps."""
    scale = max(abs(y1), abs(y2), mpmath.mpf(1))
    return abs(y1 - y2) / scale < eps

"""Constant folding and canonicalization of parsed answers.

Folding is exact: only operations closed over the rationals collapse
(field arithmetic, integer powers, perfect roots, and the handful of
special points like log(1) and sin(0)).  A closed tree that does not
fold to a rational is evaluated to a 10-significant-digit decimal;
trees with free variables keep their folded symbolic form.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import DomainError

from .expr import AnswerValue, DECIMAL_PRECISION, Expr, call, free_vars, neg, num
from .numeric import eval_numeric
from .parser import parse


def _int_nth_root(x: int, n: int) -> int | None:
    """Exact integer n-th root of x >= 0, or None."""
    if x < 0:
        return None
    if x in (0, 1):
        return x
    hi = 1 << ((x.bit_length() + n - 1) // n + 1)
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** n < x:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** n == x else None


def _exact_rational_pow(base: Fraction, exponent: Fraction) -> Fraction | None:
    """base ** exponent when the result is rational, else None.

    Caller guarantees base >= 0 and a non-integer exponent.
    """
    q = exponent.denominator
    root_num = _int_nth_root(base.numerator, q)
    root_den = _int_nth_root(base.denominator, q)
    if root_num is None or root_den is None:
        return None
    root = Fraction(root_num, root_den)
    p = exponent.numerator
    if root == 0 and p < 0:
        raise DomainError("zero raised to a negative power")
    return root ** p


def _fold(e: Expr) -> Expr:
    if e.kind in ("num", "const", "var"):
        return e
    if e.kind == "neg":
        inner = _fold(e.args[0])
        if inner.kind == "num":
            return num(-inner.value)
        return neg(inner)
    if e.kind == "call":
        arg = _fold(e.args[0])
        if arg.kind == "num":
            v = arg.value
            if e.value == "sqrt":
                if v < 0:
                    raise DomainError("sqrt of a negative rational")
                exact = _exact_rational_pow(v, Fraction(1, 2))
                if exact is not None:
                    return num(exact)
            elif e.value == "log":
                if v <= 0:
                    raise DomainError("log of a non-positive rational")
                if v == 1:
                    return num(0)
            elif e.value in ("sin", "tan") and v == 0:
                return num(0)
            elif e.value == "cos" and v == 0:
                return num(1)
        return call(e.value, arg)
    left = _fold(e.args[0])
    right = _fold(e.args[1])
    folded = Expr(e.kind, None, (left, right))
    if left.kind != "num" or right.kind != "num":
        return folded
    a, b = left.value, right.value
    if e.kind == "add":
        return num(a + b)
    if e.kind == "sub":
        return num(a - b)
    if e.kind == "mul":
        return num(a * b)
    if e.kind == "div":
        if b == 0:
            raise DomainError("division by exact zero")
        return num(a / b)
    # pow
    if b.denominator == 1:
        k = int(b)
        if a == 0 and k < 0:
            raise DomainError("zero raised to a negative power")
        return num(a ** k)
    if a < 0:
        return folded  # numeric stage reports the domain problem
    if a == 0:
        if b < 0:
            raise DomainError("zero raised to a negative power")
        return num(0)
    exact = _exact_rational_pow(a, b)
    if exact is not None:
        return num(exact)
    return folded


def simplify(v: AnswerValue) -> AnswerValue:
    """Canonical form of an answer; idempotent.

    Raises DomainError when folding hits division by exact zero or a
    log/sqrt argument outside its real domain.
    """
    if v.kind != "symbolic":
        return v
    folded = _fold(v.expr)
    if folded.kind == "num":
        return AnswerValue.exact(folded.value)
    if not free_vars(folded):
        return AnswerValue.decimal(eval_numeric(folded, DECIMAL_PRECISION))
    return AnswerValue.symbolic(folded)


def normalize(raw: str, locale: str = "point") -> AnswerValue:
    """Parse then simplify; the full normalization applied to solver output."""
    return simplify(parse(raw, locale))


def normalize_or_unparsed(raw: str, locale: str = "point") -> AnswerValue:
    """Like normalize, but a domain error degrades to Unparsed.

    Solver pipelines must never crash on a malformed answer such as "1/0".
    """
    try:
        return normalize(raw, locale)
    except DomainError:
        return AnswerValue.unparsed(raw)

"""Answer kernel: parsing, simplification, and equivalence of math answers."""

from .equivalence import equivalent
from .expr import (AnswerValue, CONSTANTS, DECIMAL_PRECISION, Expr, FUNCTIONS,
                   Rational, add, call, const, contains_const, div, free_vars,
                   mul, neg, num, pow_, render, sub, var)
from .lexer import Token, tokenize
from .numeric import eval_numeric, eval_tree, rel_close, round_significant, value_mpf
from .parser import extract_boxed, latex_lighten, parse
from .simplify import normalize, normalize_or_unparsed, simplify

__all__ = [
    "AnswerValue", "CONSTANTS", "DECIMAL_PRECISION", "Expr", "FUNCTIONS",
    "Rational", "Token", "add", "call", "const", "contains_const", "div",
    "equivalent", "eval_numeric", "eval_tree", "extract_boxed", "free_vars",
    "latex_lighten", "mul", "neg", "normalize", "normalize_or_unparsed",
    "num", "parse", "pow_", "rel_close", "render", "round_significant",
    "simplify", "sub", "tokenize", "value_mpf", "var",
]

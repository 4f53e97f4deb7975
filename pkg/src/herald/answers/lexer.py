"""Tokenizer for the answer grammar.

Strict mode covers the grammar used for parsing answers: numbers
(integer, decimal, scientific), the arithmetic operators, parentheses,
the known function names, the constants pi and e, and identifiers.
Permissive mode never raises; it additionally emits WORD tokens for
prose, SYM tokens for out-of-grammar characters, and operator tokens
for the comparison/radical symbols so that token statistics (e.g.
operator density) can be computed over arbitrary bilingual text.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import LexError

from .expr import CONSTANTS, FUNCTIONS

# Token kinds
NUM = "NUM"
OP = "OP"
LPAREN = "LPAREN"
RPAREN = "RPAREN"
FUNC = "FUNC"
CONST = "CONST"
IDENT = "IDENT"
WORD = "WORD"       # permissive only
SYM = "SYM"         # permissive only

# Symbols counted as operators by density features but outside the
# strict answer grammar.
EXTRA_OPS = {"=", "<", ">", "√"}  # U+221A SQUARE ROOT

_OP_MAP = {
    "+": "+",
    "-": "-",
    "−": "-",   # unicode minus
    "*": "*",
    "×": "*",   # multiplication sign
    "·": "*",   # middle dot
    "/": "/",
    "⁄": "/",   # fraction slash
    "^": "^",
}

_WORD_ALIASES = {"pi": ("const", "pi"), "π": ("const", "pi"),
                 "ln": ("func", "log")}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    start: int
    end: int

    @property
    def text(self):
        return self.value


def _scan_number(text: str, i: int, locale: str) -> tuple[Fraction, int] | None:
    """Scan a numeric literal starting at i; returns (value, end) or None."""
    n = len(text)
    seps = {"."} if locale == "point" else {",", "."}
    j = i
    int_digits = ""
    frac_digits = ""
    while j < n and text[j].isdigit():
        int_digits += text[j]
        j += 1
    if j < n and text[j] in seps:
        # A separator only starts/continues a number next to a digit.
        leading_ok = text[j] == "." and locale == "point" and not int_digits
        if j + 1 < n and text[j + 1].isdigit() and (int_digits or leading_ok):
            j += 1
            while j < n and text[j].isdigit():
                frac_digits += text[j]
                j += 1
    if not int_digits and not frac_digits:
        return None
    exp = 0
    if j < n and text[j] in "eE":
        k = j + 1
        sign = 1
        if k < n and text[k] in "+-":
            sign = -1 if text[k] == "-" else 1
            k += 1
        exp_digits = ""
        while k < n and text[k].isdigit():
            exp_digits += text[k]
            k += 1
        if exp_digits:
            exp = sign * int(exp_digits)
            j = k
    value = Fraction(int(int_digits or "0"))
    if frac_digits:
        value += Fraction(int(frac_digits), 10 ** len(frac_digits))
    if exp:
        value *= Fraction(10) ** exp
    return value, j


def tokenize(raw: str, locale: str = "point",
             permissive: bool = False) -> list[Token]:
    """Tokenize ``raw``; raises LexError outside the grammar unless permissive.

    locale selects the decimal separator: "point" accepts only '.',
    "comma" accepts ',' between digits as well.
    """
    if locale not in ("point", "comma"):
        raise ValueError(f"unknown locale {locale!r}")
    tokens: list[Token] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and locale == "point"
                            and i + 1 < n and raw[i + 1].isdigit()):
            scanned = _scan_number(raw, i, locale)
            if scanned is not None:
                value, end = scanned
                tokens.append(Token(NUM, value, i, end))
                i = end
                continue
        if ch in _OP_MAP:
            tokens.append(Token(OP, _OP_MAP[ch], i, i + 1))
            i += 1
            continue
        if ch == "(":
            tokens.append(Token(LPAREN, "(", i, i + 1))
            i += 1
            continue
        if ch == ")":
            tokens.append(Token(RPAREN, ")", i, i + 1))
            i += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and raw[j].isalpha():
                j += 1
            word = raw[i:j]
            lowered = word.lower()
            if lowered in _WORD_ALIASES:
                kind, name = _WORD_ALIASES[lowered]
                tokens.append(Token(CONST if kind == "const" else FUNC,
                                    name, i, j))
            elif lowered in FUNCTIONS:
                tokens.append(Token(FUNC, lowered, i, j))
            elif lowered == "e" or word == "e":
                tokens.append(Token(CONST, "e", i, j))
            elif permissive and (len(word) > 2 or not word.isascii()):
                tokens.append(Token(WORD, word, i, j))
            else:
                tokens.append(Token(IDENT, word, i, j))
            i = j
            continue
        if ch == "π":  # bare pi symbol
            tokens.append(Token(CONST, "pi", i, i + 1))
            i += 1
            continue
        if permissive:
            if ch in EXTRA_OPS:
                tokens.append(Token(OP, ch, i, i + 1))
            else:
                tokens.append(Token(SYM, ch, i, i + 1))
            i += 1
            continue
        raise LexError(f"unexpected character {ch!r}", i)
    return tokens

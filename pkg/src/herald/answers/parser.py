"""Answer parsing: raw solver text to a canonical value.

``parse`` never raises.  It tries, in order: extraction of the last
\\boxed{...} payload, a light LaTeX-to-plain rewrite, a strict parse of
the whole string, and finally best-effort extraction of the trailing
expression from mixed prose ("the answer is 42").  Anything that
survives none of these comes back as an Unparsed value carrying the
original string.

Implicit multiplication is accepted at the junctions a number can
legally touch a factor ("2x", "2(3+1)", "2pi", "(2)(3)").  Word-word
junctions are rejected so prose does not accidentally parse.  Interval
and set notation ("[1,2]", "{1,2}") stays outside the grammar and falls
through to Unparsed.
"""

from __future__ import annotations

from .expr import AnswerValue, Expr, add, call, const, div, mul, neg, num, pow_, sub, var
from .lexer import CONST, FUNC, IDENT, LPAREN, NUM, OP, RPAREN, Token, tokenize


class _ParseFail(Exception):
    """Internal: strict parse rejected the input."""


# --- LaTeX handling --------------------------------------------------------

def extract_boxed(text: str) -> str | None:
    """Content of the last well-formed \\boxed{...}, or None."""
    marker = "\\boxed"
    best = None
    start = text.find(marker)
    while start != -1:
        i = start + len(marker)
        while i < len(text) and text[i].isspace():
            i += 1
        if i < len(text) and text[i] == "{":
            depth = 1
            j = i + 1
            while j < len(text):
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                    if depth == 0:
                        best = text[i + 1:j]
                        break
                j += 1
        start = text.find(marker, start + 1)
    return best


def _take_braced(text: str, i: int) -> tuple[str, int] | None:
    """Read a {...} group starting at i; returns (content, end) or None."""
    if i >= len(text) or text[i] != "{":
        return None
    depth = 1
    j = i + 1
    while j < len(text):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                return text[i + 1:j], j + 1
        j += 1
    return None


_DROP_WITH_CONTENT = ("\\text", "\\textbf", "\\mathrm", "\\mbox")
_PLAIN_SUBS = (
    ("\\cdot", "*"), ("\\times", "*"), ("\\div", "/"), ("\\pi", "pi"),
    ("\\left", ""), ("\\right", ""), ("\\,", " "), ("\\;", " "),
    ("\\:", " "), ("\\!", ""), ("\\ ", " "), ("$", ""),
    ("\\(", ""), ("\\)", ""), ("\\[", ""), ("\\]", ""),
)


def latex_lighten(text: str) -> str:
    """Rewrite the common LaTeX answer idioms into plain notation.

    Handles \\frac/\\dfrac/\\tfrac, \\sqrt{...}, ^{...}, text wrappers,
    and the usual symbol macros.  Unknown macros and bare braces are
    left alone so truly ambiguous notation fails parsing instead of
    being silently misread.
    """
    for _ in range(32):  # nested macros resolve over iterations
        changed = False
        for macro in ("\\dfrac", "\\tfrac", "\\frac"):
            start = text.find(macro)
            if start == -1:
                continue
            first = _take_braced(text, start + len(macro))
            if first is None:
                continue
            second = _take_braced(text, first[1])
            if second is None:
                continue
            text = (text[:start] + f"(({first[0]})/({second[0]}))"
                    + text[second[1]:])
            changed = True
        start = text.find("\\sqrt")
        if start != -1:
            group = _take_braced(text, start + len("\\sqrt"))
            if group is not None:
                text = text[:start] + f"sqrt({group[0]})" + text[group[1]:]
                changed = True
        for macro in _DROP_WITH_CONTENT:
            start = text.find(macro)
            if start == -1:
                continue
            group = _take_braced(text, start + len(macro))
            if group is not None:
                text = text[:start] + text[group[1]:]
                changed = True
        start = text.find("^{")
        if start != -1:
            group = _take_braced(text, start + 1)
            if group is not None:
                text = text[:start] + f"^({group[0]})" + text[group[1]:]
                changed = True
        if not changed:
            break
    for old, new in _PLAIN_SUBS:
        text = text.replace(old, new)
    return text


# --- Strict recursive-descent parser ---------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _ParseFail("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise _ParseFail(f"expected {kind}")
        return self.next()

    def parse(self) -> Expr:
        tree = self.parse_sum()
        if self.peek() is not None:
            raise _ParseFail("trailing tokens")
        return tree

    def parse_sum(self) -> Expr:
        left = self.parse_product()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == OP and tok.value in "+-":
                self.next()
                right = self.parse_product()
                left = add(left, right) if tok.value == "+" else sub(left, right)
            else:
                return left

    def parse_product(self) -> Expr:
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == OP and tok.value in "*/":
                self.next()
                right = self.parse_unary()
                left = mul(left, right) if tok.value == "*" else div(left, right)
            elif self._implicit_junction(tok):
                right = self.parse_power()
                left = mul(left, right)
            else:
                return left

    def _implicit_junction(self, tok: Token | None) -> bool:
        """Implicit multiplication: only after a number or ')'."""
        if tok is None or self.pos == 0:
            return False
        prev = self.tokens[self.pos - 1]
        if prev.kind == NUM:
            return tok.kind in (IDENT, CONST, FUNC, LPAREN)
        if prev.kind == RPAREN:
            return tok.kind == LPAREN
        return False

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == OP and tok.value in "+-":
            self.next()
            inner = self.parse_unary()
            if tok.value == "+":
                return inner
            if inner.kind == "num":
                return num(-inner.value)
            return neg(inner)
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_primary()
        tok = self.peek()
        if tok is not None and tok.kind == OP and tok.value == "^":
            self.next()
            # Right-associative; exponent may carry its own sign.
            exponent = self.parse_unary_power()
            return pow_(base, exponent)
        return base

    def parse_unary_power(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == OP and tok.value in "+-":
            self.next()
            inner = self.parse_unary_power()
            if tok.value == "+":
                return inner
            if inner.kind == "num":
                return num(-inner.value)
            return neg(inner)
        return self.parse_power()

    def parse_primary(self) -> Expr:
        tok = self.next()
        if tok.kind == NUM:
            return num(tok.value)
        if tok.kind == CONST:
            return const(tok.value)
        if tok.kind == IDENT:
            nxt = self.peek()
            if nxt is not None and nxt.kind == LPAREN:
                # Unknown function name; refuse rather than misread as product.
                raise _ParseFail(f"unknown function {tok.value!r}")
            return var(tok.value)
        if tok.kind == FUNC:
            self.expect(LPAREN)
            arg = self.parse_sum()
            self.expect(RPAREN)
            return call(tok.value, arg)
        if tok.kind == LPAREN:
            inner = self.parse_sum()
            self.expect(RPAREN)
            return inner
        raise _ParseFail(f"unexpected token {tok.kind}")


def _parse_strict(text: str, locale: str) -> AnswerValue | None:
    try:
        tokens = tokenize(text, locale)
        if not tokens:
            return None
        tree = _Parser(tokens).parse()
    except Exception:
        return None
    if tree.kind == "num":
        return AnswerValue.exact(tree.value)
    return AnswerValue.symbolic(tree)


_BOUNDARY_BEFORE = set(" \t\n\r:;=,")


def _parse_trailing(text: str, locale: str) -> AnswerValue | None:
    """Longest suffix starting at a word boundary that parses strictly.

    A single sentence-final period is tolerated; any other trailing
    character outside the grammar blocks extraction, so prose like
    "maybe 5?" stays unparsed.
    """
    stripped = text.rstrip()
    if stripped.endswith(".") and not stripped.endswith(".."):
        stripped = stripped[:-1]
    for i in range(len(stripped)):
        if i and stripped[i - 1] not in _BOUNDARY_BEFORE:
            continue
        candidate = stripped[i:].strip()
        if not candidate:
            continue
        value = _parse_strict(candidate, locale)
        if value is not None:
            return value
    return None


def parse(raw: str, locale: str = "point") -> AnswerValue:
    """Parse a raw answer string; failures yield Unparsed, never an exception."""
    try:
        text = raw.strip()
        if not text:
            return AnswerValue.unparsed(raw)
        boxed = extract_boxed(text)
        if boxed is not None:
            text = boxed.strip()
        text = latex_lighten(text).strip()
        if not text:
            return AnswerValue.unparsed(raw)
        value = _parse_strict(text, locale)
        if value is not None:
            return value
        value = _parse_trailing(text, locale)
        if value is not None:
            return value
        return AnswerValue.unparsed(raw)
    except Exception:
        return AnswerValue.unparsed(raw)

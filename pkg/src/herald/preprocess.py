"""Bilingual text standardization, routing features, and augmentation.

Russian math notation is rewritten to the canonical Latin form (tg ->
tan, decimal comma -> point, explicit multiplication signs), token
statistics feed the router, and numeric augmentation perturbs
non-critical literals for training-data enrichment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .answers.lexer import NUM, OP, tokenize
from .errors import DimensionMismatch, ZeroVector
from .rng import Stream, hash64, substream

ALIGNMENT_REVIEW_THRESHOLD = 0.85
DEFAULT_AUGMENT_SIGMA = 0.1
DENSITY_OPERATORS = frozenset({"+", "-", "*", "/", "^", "=", "<", ">", "√"})


@dataclass(frozen=True)
class Problem:
    """One bilingual problem instance."""

    id: str
    statement_en: str = ""
    statement_ru: str | None = None
    category: str | None = None
    reference_answer: str | None = None
    reference_steps: tuple[tuple[str, str], ...] | None = None
    critical_value_mask: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.statement_en and not self.statement_ru:
            raise ValueError(f"problem {self.id!r} has no statement")

    def statement(self) -> str:
        return self.statement_en or self.statement_ru or ""


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """Fixed-length real embedding with its provider id."""

    values: np.ndarray
    provider: str

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=np.float64))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding entries must be finite")


_NOTATION_RULES = (
    (re.compile(r"\barctg\b"), "arctan"),
    (re.compile(r"\bctg\b"), "cot"),
    (re.compile(r"\btg\b"), "tan"),
)
_DECIMAL_COMMA = re.compile(r"(?<=\d),(?=\d)")


def standardize_notation(text: str) -> str:
    """Rewrite Russian-convention math notation into canonical form; idempotent."""
    for pattern, replacement in _NOTATION_RULES:
        text = pattern.sub(replacement, text)
    text = _DECIMAL_COMMA.sub(".", text)
    return text.replace("·", "*").replace("×", "*")


def operator_density(text: str) -> float:
    """Share of operator tokens among all tokens; 0 for empty text."""
    tokens = tokenize(text, permissive=True)
    if not tokens:
        return 0.0
    ops = sum(1 for t in tokens if t.kind == OP and t.value in DENSITY_OPERATORS)
    return ops / len(tokens)


def alignment_score(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity between two embeddings of the same provider."""
    if a.provider != b.provider:
        raise DimensionMismatch(
            f"providers differ: {a.provider!r} vs {b.provider!r}")
    if a.values.shape != b.values.shape:
        raise DimensionMismatch(
            f"lengths differ: {a.values.shape[0]} vs {b.values.shape[0]}")
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine of a zero vector is undefined")
    score = float(np.dot(a.values, b.values) / (norm_a * norm_b))
    return max(-1.0, min(1.0, score))


def needs_review(score: float) -> bool:
    """Translation pairs scoring below the review threshold get flagged."""
    return score < ALIGNMENT_REVIEW_THRESHOLD


_WORD_RE = re.compile(r"\w+", re.UNICODE)


def embed_bow(text: str, dim: int = 256, seed: int = 0) -> EmbeddingVector:
    """Hashed bag-of-words embedding with signed feature hashing.

    Deterministic for a fixed seed; L2-normalized.  Empty text maps to
    the zero vector.
    """
    if dim < 16:
        raise ValueError("dim must be >= 16")
    values = np.zeros(dim, dtype=np.float64)
    for word in _WORD_RE.findall(text.lower()):
        h = hash64(word.encode("utf-8"), seed=seed)
        index = h % dim
        sign = 1.0 if (h >> 63) & 1 else -1.0
        values[index] += sign
    norm = np.linalg.norm(values)
    if norm > 0:
        values /= norm
    return EmbeddingVector(values, provider=f"bow-{dim}-{seed}")


def _perturb_statement(text: str, sigma: float, mask: frozenset[int] | None,
                       gauss: Stream) -> str:
    """Replace non-critical numeric literals with n*(1+eps) at 6 digits."""
    tokens = tokenize(text, permissive=True)
    pieces: list[str] = []
    cursor = 0
    for index, token in enumerate(tokens):
        if token.kind != NUM:
            continue
        if mask is not None:
            critical = index in mask
        else:
            # Default heuristic: denominators and exponents stay put.
            prev = tokens[index - 1] if index > 0 else None
            critical = (prev is not None and prev.kind == OP
                        and prev.value in ("/", "^"))
        if critical:
            continue
        eps = gauss.gauss(0.0, sigma)
        perturbed = float(token.value) * (1.0 + eps)
        rendered = f"{perturbed:.6g}"
        pieces.append(text[cursor:token.start])
        pieces.append(rendered)
        cursor = token.end
    pieces.append(text[cursor:])
    return "".join(pieces)


def augment_numeric(p: Problem, sigma: float = DEFAULT_AUGMENT_SIGMA,
                    rng_seed: int = 0) -> Problem:
    """Perturb non-critical numeric literals by Gaussian relative noise.

    Token indices in ``critical_value_mask`` refer to each statement's
    own permissive token stream.  sigma=0 returns the problem unchanged.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return p
    mask = frozenset(p.critical_value_mask) if p.critical_value_mask is not None else None
    gauss = substream(rng_seed, "augment", p.id)
    new_en = _perturb_statement(p.statement_en, sigma, mask, gauss) \
        if p.statement_en else p.statement_en
    new_ru = _perturb_statement(p.statement_ru, sigma, mask, gauss) \
        if p.statement_ru else p.statement_ru
    return replace(p, statement_en=new_en, statement_ru=new_ru)


def sentence_count(text: str) -> int:
    """Rough sentence count used as a routing feature."""
    parts = [part for part in re.split(r"[.!?…]+", text) if part.strip()]
    return max(1, len(parts)) if text.strip() else 0


def has_cyrillic(text: str) -> bool:
    return any("Ѐ" <= ch <= "ӿ" for ch in text)


def max_numeric_magnitude(text: str) -> float:
    """Largest |numeric literal| in the text, 0 when none."""
    tokens = tokenize(text, permissive=True)
    values = [abs(float(t.value)) for t in tokens if t.kind == NUM]
    return max(values) if values else 0.0

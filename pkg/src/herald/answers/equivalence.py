"""Answer equivalence under relative tolerance.

Exact values compare as rationals.  Closed numeric values compare by
the relative-difference rule |y1-y2| / max(|y1|,|y2|,1) < eps.  Pairs
with free variables are compared by evaluating both sides at 16 shared
sample points drawn from a fixed-seed stream on [-2, 2]; points where
either side hits a pole or domain edge are redrawn.  Unparsed answers
match only their byte-identical selves.
"""

from __future__ import annotations

from mpmath import mp

from ..errors import DomainError
from ..rng import Stream

from .expr import AnswerValue, free_vars
from .numeric import eval_tree, rel_close, value_mpf

SAMPLE_SEED = 0xA11CE
SAMPLE_POINTS = 16
_MAX_DRAWS = 256
_WORK_DPS = 30


def _free(v: AnswerValue) -> frozenset[str]:
    if v.kind == "symbolic":
        return free_vars(v.expr)
    return frozenset()


def _value_at(v: AnswerValue, bindings: dict[str, float]):
    if v.kind == "symbolic":
        return eval_tree(v.expr, bindings)
    return value_mpf(v)


def equivalent(a: AnswerValue, b: AnswerValue, eps_equiv: float = 1e-6) -> bool:
    """True when the two answers denote the same value within tolerance."""
    if eps_equiv <= 0:
        raise ValueError("eps_equiv must be positive")
    if a == b:
        return True
    if a.kind == "unparsed" or b.kind == "unparsed":
        return False
    if a.kind == "exact" and b.kind == "exact":
        return False  # reduced rationals that differ are not equivalent
    names = sorted(_free(a) | _free(b))
    with mp.workdps(_WORK_DPS):
        if not names:
            try:
                return rel_close(value_mpf(a), value_mpf(b), eps_equiv)
            except DomainError:
                return False
        stream = Stream(SAMPLE_SEED)
        accepted = 0
        for _ in range(_MAX_DRAWS):
            if accepted == SAMPLE_POINTS:
                break
            bindings = {name: stream.uniform(-2.0, 2.0) for name in names}
            try:
                y1 = _value_at(a, bindings)
                y2 = _value_at(b, bindings)
            except DomainError:
                continue  # pole: excluded from sampling
            if not rel_close(y1, y2, eps_equiv):
                return False
            accepted += 1
        return accepted == SAMPLE_POINTS

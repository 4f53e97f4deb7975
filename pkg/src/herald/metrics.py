"""Evaluation metrics over run records.

Six views of a run: final-answer accuracy, computational accuracy over
reference solution steps, partial credit over weighted steps, run-to-run
consistency, an accuracy-per-resource efficiency ratio, and tool
utilization effectiveness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .answers import AnswerValue, equivalent, normalize_or_unparsed
from .errors import HeraldError

COMP_ACC_EPS = 1e-6
DEFAULT_RUNS = 10
_EFFICIENCY_FLOOR = 1e-6


class EmptyRecords(HeraldError):
    """Metrics need at least one record."""


class NoEligibleRecords(HeraldError):
    """No record carries the data this metric requires."""


@dataclass(frozen=True)
class RunRecord:
    """Per-problem outcome of an evaluation run."""

    problem_id: str
    predictions: tuple[AnswerValue, ...]      # one per repeated run
    reference: AnswerValue
    step_flags: tuple[bool, ...] | None = None
    step_weights: tuple[float, ...] | None = None
    reference_steps: tuple[tuple[str, str], ...] | None = None
    predicted_steps: tuple[tuple[str, str], ...] | None = None
    tool_used: bool = False
    elapsed_s: float = 0.0
    memory_mb: float = 0.0

    def __post_init__(self):
        if len(self.predictions) < 1:
            raise ValueError("record needs at least one prediction")
        if self.step_weights is not None and any(w <= 0 for w in self.step_weights):
            raise ValueError("step weights must be positive")

    def first_correct(self, eps_equiv: float = COMP_ACC_EPS) -> bool:
        return equivalent(self.predictions[0], self.reference, eps_equiv)


def accuracy(records, eps_equiv: float = COMP_ACC_EPS) -> float:
    """Fraction of problems whose first-run answer matches the reference."""
    records = list(records)
    if not records:
        raise EmptyRecords("no records")
    hits = sum(1 for r in records if r.first_correct(eps_equiv))
    return hits / len(records)


def _steps_match(steps, eps: float) -> bool:
    """Every (expression, value) pair must agree within relative tolerance."""
    for expression, value in steps:
        lhs = normalize_or_unparsed(expression)
        rhs = normalize_or_unparsed(value)
        if lhs.kind == "unparsed" or rhs.kind == "unparsed":
            return False
        if not equivalent(lhs, rhs, eps):
            return False
    return True


def comp_acc(records, eps: float = COMP_ACC_EPS) -> float:
    """Step-replay correctness over records that carry reference steps.

    A record counts as correct when each of its step expressions
    evaluates to the step's reference value within relative tolerance,
    and the final answer matches the reference.
    """
    eligible = [r for r in records if r.reference_steps]
    if not eligible:
        raise NoEligibleRecords("no records carry reference steps")
    hits = 0
    for record in eligible:
        steps = record.predicted_steps
        if steps is None:
            steps = record.reference_steps
        if _steps_match(steps, eps) and record.first_correct(eps):
            hits += 1
    return hits / len(eligible)


def pcs(records) -> float:
    """Mean weighted share of correct solution steps.

    Records without step flags are skipped; missing weights default to
    uniform.
    """
    eligible = [r for r in records if r.step_flags]
    if not eligible:
        raise NoEligibleRecords("no records carry step flags")
    total = 0.0
    for record in eligible:
        flags = record.step_flags
        weights = record.step_weights or tuple(1.0 for _ in flags)
        if len(weights) != len(flags):
            raise ValueError(f"{record.problem_id}: weights/flags mismatch")
        score = sum(w for w, ok in zip(weights, flags) if ok) / sum(weights)
        total += score
    return total / len(eligible)


def consistency(records, runs: int = DEFAULT_RUNS,
                eps_equiv: float = COMP_ACC_EPS) -> float:
    """Mean modal-class share across repeated runs.

    Uses the first ``runs`` predictions of each record; predictions
    pool into answer-equivalence classes before the mode is taken.
    """
    records = list(records)
    if not records:
        raise EmptyRecords("no records")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    total = 0.0
    for record in records:
        if len(record.predictions) < runs:
            raise ValueError(
                f"{record.problem_id}: {len(record.predictions)} predictions "
                f"but {runs} runs requested")
        window = record.predictions[:runs]
        reps: list[AnswerValue] = []
        counts: list[int] = []
        for answer in window:
            for i, rep in enumerate(reps):
                if equivalent(rep, answer, eps_equiv):
                    counts[i] += 1
                    break
            else:
                reps.append(answer)
                counts.append(1)
        total += max(counts) / runs
    return total / len(records)


def efficiency(acc: float, time_s: float, memory_mb: float) -> float:
    """Accuracy per log-resource unit; denominator floored to stay finite."""
    if time_s < 0 or memory_mb < 0:
        raise ValueError("resources must be non-negative")
    denom = math.log1p(time_s) * math.log1p(memory_mb)
    return acc / max(denom, _EFFICIENCY_FLOOR)


def tue(records, eps_equiv: float = COMP_ACC_EPS) -> float | None:
    """Correctness rate among tool-using records; None when no tool ran."""
    tool_records = [r for r in records if r.tool_used]
    if not tool_records:
        return None
    hits = sum(1 for r in tool_records if r.first_correct(eps_equiv))
    return hits / len(tool_records)

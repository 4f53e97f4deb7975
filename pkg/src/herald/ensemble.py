"""Confidence-weighted combination and entropy-stopped iterative voting.

Votes accumulate over answer-equivalence classes rather than raw
strings, so "1/2", "0.5", and "\\boxed{0.5}" pool their weight.  Voting
stops once the tally's entropy is small, stops changing, or the
iteration cap is reached.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .answers import AnswerValue, equivalent
from .errors import AllUnparsed, EmptyTally

EPS_H = 0.1
DELTA_H = 0.01
K_MAX = 48
GAMMA = 2.0
FALLBACK_CONFIDENCE = 0.2
EPS_EQUIV = 1e-6


@dataclass(frozen=True)
class EnsembleWeights:
    """Softmax weights over the three solvers plus the inputs they came from."""

    weights: tuple[float, float, float]
    gamma: float
    confidences: tuple[float, float, float]
    success_rates: tuple[float, float, float]

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9 or min(self.weights) < 0:
            raise ValueError("weights must form a simplex")


def ensemble_weights(confidences, success_rates, gamma: float = GAMMA) -> EnsembleWeights:
    """Softmax over gamma * calibrated confidence * historical success rate."""
    c = np.asarray(confidences, dtype=np.float64)
    s = np.asarray(success_rates, dtype=np.float64)
    if c.shape != (3,) or s.shape != (3,):
        raise ValueError("expected three confidences and three success rates")
    if c.min() < 0 or c.max() > 1 or s.min() < 0 or s.max() > 1:
        raise ValueError("confidences and success rates must lie in [0, 1]")
    scores = gamma * c * s
    scores -= scores.max()
    expv = np.exp(scores)
    w = expv / expv.sum()
    return EnsembleWeights(tuple(float(x) for x in w), gamma,
                           tuple(float(x) for x in c),
                           tuple(float(x) for x in s))


class VoteState:
    """Running tally over equivalence classes with its entropy history."""

    def __init__(self, eps_equiv: float = EPS_EQUIV):
        self.eps_equiv = eps_equiv
        self.iteration = 0
        self.representatives: list[AnswerValue] = []
        self.weights: list[float] = []
        self.entropy_history: list[float] = []

    def class_index(self, answer: AnswerValue) -> int:
        """Index of the answer's equivalence class, appending a new one if needed."""
        for i, rep in enumerate(self.representatives):
            if equivalent(rep, answer, self.eps_equiv):
                return i
        self.representatives.append(answer)
        self.weights.append(0.0)
        return len(self.representatives) - 1

    def add(self, answer: AnswerValue, weight: float) -> None:
        self.weights[self.class_index(answer)] += weight

    def tally(self) -> dict[AnswerValue, float]:
        return dict(zip(self.representatives, self.weights))

    def leader(self) -> tuple[AnswerValue, float]:
        """Max-weight class; ties go to the first-seen representative."""
        if not self.representatives:
            raise EmptyTally("no votes accumulated")
        best = 0
        for i in range(1, len(self.weights)):
            if self.weights[i] > self.weights[best]:
                best = i
        return self.representatives[best], self.weights[best]

    def summary(self) -> dict:
        from .answers import render
        return {
            "iterations": self.iteration,
            "classes": [
                {"answer": render(rep), "weight": weight}
                for rep, weight in zip(self.representatives, self.weights)
            ],
            "entropy_history": list(self.entropy_history),
        }


def vote_entropy(tally) -> float:
    """Shannon entropy (natural log) of the normalized tally weights."""
    weights = list(tally.values()) if isinstance(tally, dict) else list(tally)
    total = sum(weights)
    if not weights or total <= 0:
        raise EmptyTally("entropy needs a positive-mass tally")
    h = 0.0
    for w in weights:
        if w > 0:
            p = w / total
            h -= p * math.log(p)
    return h


def should_stop(history, eps_h: float = EPS_H, delta_h: float = DELTA_H,
                k: int | None = None, k_max: int = K_MAX) -> bool:
    """Entropy stopping rule.

    Stop when the latest entropy is below eps_h, when it moved less
    than delta_h since the previous iteration, or at the iteration cap.
    """
    history = list(history)
    if k is None:
        k = len(history)
    if k < 1:
        raise ValueError("stopping is checked after at least one iteration")
    if k >= k_max:
        return True
    if history and history[-1] < eps_h:
        return True
    if k >= 2 and len(history) >= 2:
        if abs(history[-1] - history[-2]) < delta_h:
            return True
    return False


def combine(verdicts, weights: EnsembleWeights,
            eps_equiv: float = EPS_EQUIV,
            state: VoteState | None = None) -> tuple[AnswerValue, float]:
    """Weighted vote over the verdicts' equivalence classes.

    Returns the winning class representative and its summed weight.
    When ``state`` is given the weights also accumulate there.
    """
    answers = [v.normalized for v in verdicts]
    if all(a.kind == "unparsed" for a in answers):
        raise AllUnparsed("every verdict failed normalization")
    local = VoteState(eps_equiv)
    for answer, weight in zip(answers, weights.weights):
        local.add(answer, weight)
        if state is not None:
            state.add(answer, weight)
    return local.leader()


@dataclass
class VoteConfig:
    eps_h: float = EPS_H
    delta_h: float = DELTA_H
    k_max: int = K_MAX
    eps_equiv: float = EPS_EQUIV

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


def iterative_vote(sampler, config: VoteConfig = VoteConfig()) -> tuple[AnswerValue, int, VoteState]:
    """Accumulate weighted verdict sets until the entropy rule fires.

    ``sampler`` is called once per iteration and must return
    (verdicts, EnsembleWeights).  Iterations whose verdicts all fail
    normalization contribute nothing; if every iteration fails,
    AllUnparsed propagates.
    """
    state = VoteState(config.eps_equiv)
    failures = 0
    for k in range(1, config.k_max + 1):
        verdicts, weights = sampler()
        try:
            combine(verdicts, weights, config.eps_equiv, state=state)
        except AllUnparsed:
            failures += 1
            if failures == config.k_max:
                raise
            continue
        state.iteration = k - failures
        entropy = vote_entropy(state.weights)
        state.entropy_history.append(entropy)
        if should_stop(state.entropy_history, config.eps_h, config.delta_h,
                       k=state.iteration, k_max=config.k_max):
            break
    answer, _ = state.leader()
    return answer, state.iteration, state


@dataclass
class SuccessStats:
    """Per (solver, problem-bucket) attempt/correct counters.

    Success rates read Laplace-smoothed: (correct + 1) / (attempts + 2),
    so a fresh bucket starts at 0.5.  Writes are serialized by a lock;
    reads are safe concurrently.
    """

    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        self._lock = threading.Lock()

    def record(self, solver_id: str, bucket: int, correct: bool) -> None:
        with self._lock:
            attempts, hits = self.counts.get((solver_id, bucket), (0, 0))
            self.counts[(solver_id, bucket)] = (attempts + 1,
                                                hits + (1 if correct else 0))

    def rate(self, solver_id: str, bucket: int) -> float:
        attempts, hits = self.counts.get((solver_id, bucket), (0, 0))
        return (hits + 1) / (attempts + 2)


def update_success_stats(stats: SuccessStats, solver_id: str, bucket: int,
                         correct: bool) -> SuccessStats:
    """Record one outcome; returns the same stats object for chaining."""
    stats.record(solver_id, bucket, correct)
    return stats


def fallback_answer(verdicts, rates, tool_solver_id: str) -> AnswerValue:
    """Most conservative answer when every solver reports low confidence.

    Picks the verdict of the solver with the best historical success
    rate in the problem's bucket; on a tie the tool-integrated solver
    wins.
    """
    verdicts = list(verdicts)
    if not verdicts:
        raise ValueError("fallback needs at least one verdict")
    if len(verdicts) == 1:
        return verdicts[0].normalized
    best_rate = max(rates[v.solver_id] for v in verdicts)
    leaders = [v for v in verdicts if rates[v.solver_id] == best_rate]
    if len(leaders) > 1:
        for v in verdicts:
            if v.solver_id == tool_solver_id:
                return v.normalized
    return leaders[0].normalized

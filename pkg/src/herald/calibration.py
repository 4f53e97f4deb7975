"""Temperature-scaled confidence calibration.

Raw solver scores pass through a per-solver temperature before the
sigmoid; the temperature is fitted on held-out outcomes by minimizing
expected calibration error via golden-section search over log T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (DegenerateLabels, EmptySampleSet, NonPositiveTemperature)

DEFAULT_BINS = 15
_LOG_T_LOW = math.log(0.05)
_LOG_T_HIGH = math.log(20.0)
_LOG_T_WIDTH = 1e-3
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverCalibration:
    """Fitted temperature for one solver."""

    solver_id: str
    temperature: float
    fitted_on: int

    def __post_init__(self):
        if self.temperature <= 0:
            raise NonPositiveTemperature(
                f"temperature must be positive, got {self.temperature}")

    def apply(self, raw_score: float) -> float:
        return calibrate_confidence(raw_score, self.temperature)


@dataclass(frozen=True)
class ReliabilityBins:
    """Uniform confidence bins with per-bin count, mean confidence, accuracy."""

    bin_count: int
    counts: tuple[int, ...]
    mean_confidence: tuple[float, ...]
    accuracy: tuple[float, ...]


def calibrate_confidence(raw_score: float, temperature: float) -> float:
    """Sigmoid of score/temperature; strictly increasing in the score."""
    if temperature <= 0:
        raise NonPositiveTemperature(
            f"temperature must be positive, got {temperature}")
    z = raw_score / temperature
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    expz = math.exp(z)
    return expz / (1.0 + expz)


def _bin_index(confidence: float, bins: int) -> int:
    """Right-open uniform bins; the final bin is closed so 1.0 lands in it."""
    index = int(confidence * bins)
    return min(index, bins - 1)


def reliability_bins(samples, bins: int = DEFAULT_BINS) -> ReliabilityBins:
    """Group (confidence, correct) pairs into uniform bins over [0, 1]."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    samples = list(samples)
    if not samples:
        raise EmptySampleSet("no samples to bin")
    counts = [0] * bins
    conf_sums = [0.0] * bins
    hit_sums = [0] * bins
    for confidence, correct in samples:
        if not 0.0 <= confidence <= 1.0:
            raise ValueError(f"confidence {confidence} outside [0, 1]")
        b = _bin_index(confidence, bins)
        counts[b] += 1
        conf_sums[b] += confidence
        hit_sums[b] += 1 if correct else 0
    mean_conf = tuple(conf_sums[b] / counts[b] if counts[b] else 0.0
                      for b in range(bins))
    accuracy = tuple(hit_sums[b] / counts[b] if counts[b] else 0.0
                     for b in range(bins))
    return ReliabilityBins(bins, tuple(counts), mean_conf, accuracy)


def ece(samples, bins: int = DEFAULT_BINS) -> float:
    """Expected calibration error over uniform confidence bins.

    Weighted sum over bins of |accuracy - mean confidence|; empty bins
    contribute nothing.
    """
    table = reliability_bins(samples, bins)
    n = sum(table.counts)
    total = 0.0
    for b in range(table.bin_count):
        if table.counts[b] == 0:
            continue
        gap = abs(table.accuracy[b] - table.mean_confidence[b])
        total += table.counts[b] / n * gap
    return total


def _ece_at(log_t: float, scores, labels, bins: int) -> float:
    t = math.exp(log_t)
    calibrated = [(calibrate_confidence(f, t), y)
                  for f, y in zip(scores, labels)]
    return ece(calibrated, bins)


def fit_temperature(validation, bins: int = DEFAULT_BINS,
                    solver_id: str = "") -> SolverCalibration:
    """Temperature minimizing ECE on (raw score, correct) validation pairs.

    Golden-section search on log T over [log 0.05, log 20] down to a
    relative width of 1e-3.
    """
    samples = list(validation)
    if len(samples) < bins:
        raise EmptySampleSet(
            f"need at least {bins} samples, got {len(samples)}")
    scores = [float(f) for f, _ in samples]
    labels = [bool(y) for _, y in samples]
    if all(labels) or not any(labels):
        raise DegenerateLabels("validation outcomes are all identical")

    a, b = _LOG_T_LOW, _LOG_T_HIGH
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _ece_at(c, scores, labels, bins)
    fd = _ece_at(d, scores, labels, bins)
    while (b - a) > _LOG_T_WIDTH:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _ece_at(c, scores, labels, bins)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _ece_at(d, scores, labels, bins)
    log_t = (a + b) / 2.0
    # Keep the fit no worse than the identity temperature on its own input.
    if _ece_at(log_t, scores, labels, bins) > _ece_at(0.0, scores, labels, bins):
        log_t = 0.0
    return SolverCalibration(solver_id=solver_id,
                             temperature=math.exp(log_t),
                             fitted_on=len(samples))

"""Fine-tuning loss family as plain numeric functions.

These are verification primitives: hinge-style consistency against
reference values, a quadratic retention penalty weighted by a Fisher
diagonal, bilingual mixing, staged total loss, and the distillation
loss (hard cross-entropy plus temperature-softened KL) with its
analytic gradient for linear-student training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NegativeFisher

KD_ALPHA = 0.3
KD_TEMPERATURE = 4.0
CONSISTENCY_EPS = 1e-6
BILINGUAL_ALPHA = 0.7


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear schedule over training stage t, clamped at the ends."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("schedule needs at least one point")
        ts = [t for t, _ in self.points]
        if ts != sorted(ts):
            raise ValueError("schedule breakpoints must be sorted")
        if any(v < 0 for _, v in self.points):
            raise ValueError("schedule values must be non-negative")

    def __call__(self, t: float) -> float:
        pts = self.points
        if t <= pts[0][0]:
            return pts[0][1]
        if t >= pts[-1][0]:
            return pts[-1][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                if t1 == t0:
                    return v1
                frac = (t - t0) / (t1 - t0)
                return v0 + frac * (v1 - v0)
        return pts[-1][1]


@dataclass(frozen=True)
class Schedule:
    """The pair of stage-dependent weights for consistency and retention."""

    lambda1: PiecewiseLinear
    lambda2: PiecewiseLinear


def consistency_loss(preds, truths, eps: float = CONSISTENCY_EPS) -> float:
    """Sum of hinge gaps max(0, |pred - truth| - eps)."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    preds = list(preds)
    truths = list(truths)
    if len(preds) != len(truths):
        raise LengthMismatch(
            f"{len(preds)} predictions vs {len(truths)} truths")
    return sum(max(0.0, abs(p - t) - eps) for p, t in zip(preds, truths))


def retention_loss(theta, theta_star, fisher) -> float:
    """Quadratic anchor penalty sum_j F_j/2 * (theta_j - theta*_j)^2."""
    theta = np.asarray(theta, dtype=np.float64)
    theta_star = np.asarray(theta_star, dtype=np.float64)
    fisher = np.asarray(fisher, dtype=np.float64)
    if not (theta.shape == theta_star.shape == fisher.shape):
        raise LengthMismatch("theta, anchor, and fisher lengths differ")
    if np.any(fisher < 0):
        raise NegativeFisher("fisher entries must be non-negative")
    return float(np.sum(fisher / 2.0 * (theta - theta_star) ** 2))


def bilingual_loss(loss_en: float, loss_ru: float,
                   alpha: float = BILINGUAL_ALPHA) -> float:
    """Convex mix alpha*L_en + (1-alpha)*L_ru."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return alpha * loss_en + (1.0 - alpha) * loss_ru


def total_loss(task: float, consistency: float, retention: float,
               schedule: Schedule, t: float) -> float:
    """Staged sum task + lambda1(t)*consistency + lambda2(t)*retention."""
    if t < 0:
        raise ValueError("stage t must be non-negative")
    return task + schedule.lambda1(t) * consistency + schedule.lambda2(t) * retention


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z)
    expz = np.exp(z)
    return expz / np.sum(expz)


def kd_loss(student_logits, teacher_logits, hard_label: int,
            alpha: float = KD_ALPHA,
            tau: float = KD_TEMPERATURE) -> tuple[float, np.ndarray]:
    """Distillation loss and its gradient with respect to the student logits.

    value = alpha * CE(softmax(z_s), label)
          + (1 - alpha) * tau^2 * KL(softmax(z_s/tau) || softmax(z_t/tau))

    The KL puts the softened student distribution first, matching the
    defining formula rather than the more common teacher-first
    convention.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    z_s = np.asarray(student_logits, dtype=np.float64)
    z_t = np.asarray(teacher_logits, dtype=np.float64)
    if z_s.shape != z_t.shape:
        raise LengthMismatch("student and teacher logits differ in length")
    if not 0 <= hard_label < z_s.shape[0]:
        raise ValueError(f"label {hard_label} out of range")

    p_hard = softmax(z_s)
    ce = -math.log(max(p_hard[hard_label], 1e-300))
    grad_hard = p_hard.copy()
    grad_hard[hard_label] -= 1.0

    p_soft = softmax(z_s / tau)
    q_soft = softmax(z_t / tau)
    log_ratio = np.log(np.maximum(p_soft, 1e-300)) - np.log(np.maximum(q_soft, 1e-300))
    kl = float(np.sum(p_soft * log_ratio))
    # d/dz_s [tau^2 * KL(p||q)] = tau * p * (log(p/q) - KL)
    grad_soft = tau * p_soft * (log_ratio - kl)

    value = alpha * ce + (1.0 - alpha) * tau * tau * kl
    gradient = alpha * grad_hard + (1.0 - alpha) * grad_soft
    return value, gradient

"""Three-regime routing: features, the linear softmax router, distillation
training, and 8-bit weight quantization.

A problem lands in one of three regimes (symbolic-heavy, language-heavy,
mixed).  When the router is confident enough the problem goes to a
single solver; symbolic-heavy additionally requires enough operator
density, otherwise the full ensemble votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import serialize
from .errors import (ConstantWeights, DimensionMismatch, EmptyTrainingSet,
                     NonFiniteLoss)
from .preprocess import (Problem, has_cyrillic, max_numeric_magnitude,
                         operator_density, sentence_count)

REGIMES = ("symbolic-heavy", "language-heavy", "mixed")
REGIME_ROLES = {
    "symbolic-heavy": "tool-integrated",
    "language-heavy": "abstract-reasoning",
    "mixed": "router",
}
CONF_THRESHOLD = 0.8
TAU_SYM = 0.25

CATEGORIES = (
    "algebra", "geometry", "calculus", "probability", "number-theory",
    "combinatorics", "trigonometry", "logic", "statistics", "arithmetic",
    "equations", "word-problems",
)

FEATURE_LENGTH = 5 + len(CATEGORIES)


@dataclass(frozen=True)
class RouteFeatures:
    """Engineered per-problem routing features."""

    token_length: int
    operator_density: float
    max_magnitude: float
    has_russian: bool
    sentences: int
    category: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.operator_density <= 1.0:
            raise ValueError("operator density must lie in [0, 1]")
        if self.token_length < 0 or self.sentences < 0:
            raise ValueError("counts must be non-negative")

    @staticmethod
    def from_problem(problem: Problem) -> "RouteFeatures":
        from .answers.lexer import tokenize
        text = problem.statement()
        tokens = tokenize(text, permissive=True)
        return RouteFeatures(
            token_length=len(tokens),
            operator_density=operator_density(text),
            max_magnitude=max_numeric_magnitude(text),
            has_russian=bool(problem.statement_ru) or has_cyrillic(text),
            sentences=sentence_count(text),
            category=problem.category,
        )

    def to_vector(self) -> np.ndarray:
        """Bounded encoding: scalar stats in [0,1] then the category one-hot."""
        vec = np.zeros(FEATURE_LENGTH, dtype=np.float64)
        vec[0] = min(self.token_length, 1024) / 1024.0
        vec[1] = self.operator_density
        vec[2] = min(max(math.log10(1.0 + abs(self.max_magnitude)), 0.0), 9.0) / 9.0
        vec[3] = 1.0 if self.has_russian else 0.0
        vec[4] = min(self.sentences, 32) / 32.0
        if self.category in CATEGORIES:
            vec[5 + CATEGORIES.index(self.category)] = 1.0
        return vec


@dataclass(frozen=True)
class QuantRecord:
    """8-bit min-max codes for the flattened weights-plus-bias vector."""

    w_min: float
    w_max: float
    codes: np.ndarray  # uint8, length 3*F + 3


@dataclass(frozen=True)
class RouterModel:
    """Linear three-logit router; weights shape (3, F), bias shape (3,)."""

    weights: np.ndarray
    bias: np.ndarray
    quant: QuantRecord | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != 3 or b.shape != (3,):
            raise DimensionMismatch(f"bad router shapes {w.shape}, {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("router weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def feature_length(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class RoutingDecision:
    """Regime probabilities plus the chosen route."""

    probabilities: tuple[float, float, float]
    route: str                      # "single" | "ensemble"
    solver_role: str | None = None  # set when route == "single"

    def __post_init__(self):
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        if self.route == "single" and self.solver_role is None:
            raise ValueError("single route needs a solver role")


def softmax_stable(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits)
    expz = np.exp(z)
    return expz / np.sum(expz)


def regime_probabilities(model: RouterModel, x: RouteFeatures) -> np.ndarray:
    vec = x.to_vector()
    if vec.shape[0] != model.feature_length:
        raise DimensionMismatch(
            f"feature length {vec.shape[0]} vs model {model.feature_length}")
    return softmax_stable(model.weights @ vec + model.bias)


def decide_route(p, density: float, conf_threshold: float = CONF_THRESHOLD,
                 tau_sym: float = TAU_SYM) -> RoutingDecision:
    """Confidence-gated single-solver routing, else the full ensemble.

    A confident symbolic-heavy call additionally requires operator
    density above tau_sym; thin-density problems go back to the
    ensemble.  conf_threshold above 1 is legal and forces the ensemble
    always.
    """
    if conf_threshold <= 0 or not 0 < tau_sym <= 1:
        raise ValueError("thresholds must be positive (tau_sym at most 1)")
    probs = tuple(float(v) for v in p)
    regime = int(np.argmax(probs))
    if probs[regime] >= conf_threshold:
        name = REGIMES[regime]
        if name == "symbolic-heavy" and density <= tau_sym:
            return RoutingDecision(probs, "ensemble")
        return RoutingDecision(probs, "single", REGIME_ROLES[name])
    return RoutingDecision(probs, "ensemble")


# --- Distillation training --------------------------------------------------

@dataclass(frozen=True)
class DistillConfig:
    alpha: float = 0.3
    tau: float = 4.0
    steps: int = 3000
    lr: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.tau <= 0 or self.lr <= 0 or self.steps < 1:
            raise ValueError("tau, lr must be positive; steps >= 1")


def _batch_kd(student: np.ndarray, teacher: np.ndarray, labels: np.ndarray,
              alpha: float, tau: float) -> tuple[float, np.ndarray]:
    """Mean distillation loss over a batch and its gradient wrt student logits.

    Vectorized twin of losses.kd_loss; the two are cross-checked in tests.
    """
    n = student.shape[0]
    zs = student - student.max(axis=1, keepdims=True)
    ps = np.exp(zs)
    ps /= ps.sum(axis=1, keepdims=True)
    ce = -np.log(np.maximum(ps[np.arange(n), labels], 1e-300))
    grad_hard = ps.copy()
    grad_hard[np.arange(n), labels] -= 1.0

    zs_soft = student / tau
    zs_soft = zs_soft - zs_soft.max(axis=1, keepdims=True)
    p_soft = np.exp(zs_soft)
    p_soft /= p_soft.sum(axis=1, keepdims=True)
    zt_soft = teacher / tau
    zt_soft = zt_soft - zt_soft.max(axis=1, keepdims=True)
    q_soft = np.exp(zt_soft)
    q_soft /= q_soft.sum(axis=1, keepdims=True)
    log_ratio = np.log(np.maximum(p_soft, 1e-300)) - np.log(np.maximum(q_soft, 1e-300))
    kl = np.sum(p_soft * log_ratio, axis=1)
    grad_soft = tau * p_soft * (log_ratio - kl[:, None])

    value = float(np.mean(alpha * ce + (1.0 - alpha) * tau * tau * kl))
    grad = (alpha * grad_hard + (1.0 - alpha) * grad_soft) / n
    return value, grad


def distill_router(features, teacher_logits, hard_labels,
                   hyper: DistillConfig = DistillConfig()) -> RouterModel:
    """Train the linear router on teacher logits plus hard labels.

    Full-batch gradient descent from zero initialization with cosine
    learning-rate decay.  Deterministic.
    """
    xs = np.asarray([f.to_vector() if isinstance(f, RouteFeatures) else f
                     for f in features], dtype=np.float64)
    zt = np.asarray(teacher_logits, dtype=np.float64)
    labels = np.asarray(hard_labels, dtype=np.int64)
    if xs.size == 0:
        raise EmptyTrainingSet("no training rows")
    if not (xs.shape[0] == zt.shape[0] == labels.shape[0]) or zt.shape[1] != 3:
        raise DimensionMismatch("features, teacher logits, labels misaligned")
    if labels.min() < 0 or labels.max() > 2:
        raise ValueError("labels must index the three regimes")

    f_len = xs.shape[1]
    weights = np.zeros((3, f_len))
    bias = np.zeros(3)
    for step in range(hyper.steps):
        logits = xs @ weights.T + bias
        value, grad_z = _batch_kd(logits, zt, labels, hyper.alpha, hyper.tau)
        if not math.isfinite(value):
            raise NonFiniteLoss("distillation loss diverged", step)
        lr_t = hyper.lr * 0.5 * (1.0 + math.cos(math.pi * step / hyper.steps))
        weights -= lr_t * (grad_z.T @ xs)
        bias -= lr_t * grad_z.sum(axis=0)
    return RouterModel(weights, bias)


# --- Quantization ------------------------------------------------------------

def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def quantize_weights(model: RouterModel) -> RouterModel:
    """Re-express all weights as 8-bit min-max codes.

    The returned model carries the dequantized weights (what inference
    will actually use) plus the code record.  Raises ConstantWeights
    when every weight is identical; callers keep the raw model then.
    """
    flat = np.concatenate([model.weights.reshape(-1), model.bias])
    w_min = float(flat.min())
    w_max = float(flat.max())
    if w_max == w_min:
        raise ConstantWeights("all weights equal; keep the raw record")
    codes = _round_half_away((flat - w_min) / (w_max - w_min) * 255.0)
    codes = codes.astype(np.uint8)
    record = QuantRecord(w_min, w_max, codes)
    restored = w_min + codes.astype(np.float64) / 255.0 * (w_max - w_min)
    f_len = model.feature_length
    return RouterModel(restored[:3 * f_len].reshape(3, f_len),
                       restored[3 * f_len:], quant=record)


def dequantize_weights(model: RouterModel) -> RouterModel:
    """Drop the code record, keeping the dequantized float weights."""
    if model.quant is None:
        return model
    return replace(model, quant=None)


def quantization_step(model: RouterModel) -> float:
    """The reconstruction-error bound (w_max - w_min) / 255 / 2."""
    if model.quant is None:
        raise ValueError("model carries no quantization record")
    return (model.quant.w_max - model.quant.w_min) / 255.0 / 2.0


# --- Serialization ------------------------------------------------------------

def save_router(model: RouterModel) -> bytes:
    if model.quant is not None:
        q = model.quant
        return serialize.pack_quantized(3, model.feature_length,
                                        q.w_min, q.w_max, q.codes)
    return serialize.pack_raw(3, model.feature_length,
                              model.weights, model.bias)


def load_router(data: bytes) -> RouterModel:
    f_len, flags, _ = serialize.read_header(data)
    if flags == serialize.FLAG_RAW:
        weights, bias = serialize.unpack_raw(data, 3)
        return RouterModel(weights, bias)
    w_min, w_max, codes = serialize.unpack_quantized(data, 3)
    restored = w_min + codes.astype(np.float64) / 255.0 * (w_max - w_min)
    record = QuantRecord(w_min, w_max, codes)
    return RouterModel(restored[:3 * f_len].reshape(3, f_len),
                       restored[3 * f_len:], quant=record)


def default_router() -> RouterModel:
    """Hand-set weights implementing the regime heuristics.

    Used when no distilled router is supplied: operator density drives
    the symbolic-heavy logit, narrative length drives language-heavy,
    and the mixed regime holds the middle ground.
    """
    weights = np.zeros((3, FEATURE_LENGTH))
    # symbolic-heavy: operator density, numeric magnitude
    weights[0, 1] = 14.0
    weights[0, 2] = 1.0
    # language-heavy: long statements, many sentences
    weights[1, 0] = 6.0
    weights[1, 4] = 12.0
    bias = np.array([-2.2, -2.6, 0.0])
    return RouterModel(weights, bias)

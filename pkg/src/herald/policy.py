"""Tool-invocation policy: linear Q-learning over 32-dim step states.

Actions are reason (free, fails on hard problems), compute (invokes a
tool: slow, errs on trivially simple problems), and hybrid (between the
two).  Training uses prioritized experience replay with a periodically
synced target copy; the reward blends correctness, latency decay, and
brevity.  A deterministic synthetic environment exercises the whole
loop at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import serialize
from .errors import EmptyBuffer, NonFiniteUpdate
from .rng import Stream, substream

ACTIONS = ("reason", "compute", "hybrid")
STATE_DIM = 32
TOPIC_BANDS = 7

REWARD_WEIGHTS = (0.7, 0.2, 0.1)
TAU_TIME = 0.1
LATE_PENALTY = -0.05

PRIORITY_EXPONENT = 0.6
IMPORTANCE_BETA = 0.4
PRIORITY_FLOOR = 1e-3
REPLAY_CAPACITY = 10_000
BATCH_SIZE = 32
DISCOUNT = 0.95
TARGET_SYNC_EVERY = 100


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def build_state(token_length: int, operator_density: float,
                max_magnitude: float, topic: int, step_index: int,
                reasoning_chars: int, last_confidence: float,
                ensemble_entropy: float, tool_calls: int,
                tool_success_mean: float, tool_ms: float) -> np.ndarray:
    """The 32-entry step descriptor, all entries normalized into [0, 1].

    Layout: problem stats [0..9] (length, density, magnitude, 7-band
    topic one-hot), partial-solution stats [10..19] (step, reasoning
    length, confidence, entropy, reserved), tool history [20..31]
    (calls, success mean, time, reserved).
    """
    s = np.zeros(STATE_DIM, dtype=np.float64)
    s[0] = _clamp01(token_length / 512.0)
    s[1] = _clamp01(operator_density)
    magnitude = math.log10(max(abs(max_magnitude), 1.0))
    s[2] = _clamp01(magnitude / 9.0)
    if 0 <= topic < TOPIC_BANDS:
        s[3 + topic] = 1.0
    s[10] = _clamp01(step_index / 32.0)
    s[11] = _clamp01(reasoning_chars / 2048.0)
    s[12] = _clamp01(last_confidence)
    s[13] = _clamp01(ensemble_entropy / math.log(3.0))
    s[20] = _clamp01(tool_calls / 16.0)
    s[21] = _clamp01(tool_success_mean)
    s[22] = _clamp01(math.log1p(max(tool_ms, 0.0)) / 10.0)
    return s


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool
    priority: float = PRIORITY_FLOOR


@dataclass(frozen=True)
class QModel:
    """Linear action values with a separately synced target copy."""

    weights: np.ndarray
    bias: np.ndarray
    target_weights: np.ndarray
    target_bias: np.ndarray

    @staticmethod
    def zeros(dim: int = STATE_DIM) -> "QModel":
        w = np.zeros((len(ACTIONS), dim))
        b = np.zeros(len(ACTIONS))
        return QModel(w, b, w.copy(), b.copy())

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self.weights @ state + self.bias

    def target_q_values(self, state: np.ndarray) -> np.ndarray:
        return self.target_weights @ state + self.target_bias


def action_probabilities(q: QModel, state: np.ndarray) -> np.ndarray:
    """Softmax policy over the three action values."""
    values = q.q_values(state)
    z = values - values.max()
    expz = np.exp(z)
    return expz / expz.sum()


def reward(correct: bool, elapsed_s: float, brevity: float,
           weights: tuple[float, float, float] = REWARD_WEIGHTS,
           tau_time: float = TAU_TIME,
           deadline_s: float | None = None) -> float:
    """Correctness/efficiency/brevity blend, with a small late penalty.

    The penalty applies only when a deadline is given and exceeded.
    """
    if elapsed_s < 0:
        raise ValueError("elapsed time must be non-negative")
    if not 0.0 <= brevity <= 1.0:
        raise ValueError("brevity must lie in [0, 1]")
    w_correct, w_eff, w_eleg = weights
    value = (w_correct * (1.0 if correct else 0.0)
             + w_eff * math.exp(-tau_time * elapsed_s)
             + w_eleg * brevity)
    if deadline_s is not None and elapsed_s > deadline_s:
        value += LATE_PENALTY
    return value


def td_error(q: QModel, tr: Transition, gamma: float = DISCOUNT) -> float:
    """One-step temporal-difference error, bootstrapping from the target copy."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    current = float(q.q_values(tr.state)[tr.action])
    if tr.terminal:
        return tr.reward - current
    boot = float(np.max(q.target_q_values(tr.next_state)))
    return tr.reward + gamma * boot - current


class ReplayBuffer:
    """Fixed-capacity ring of transitions with proportional priorities.

    Priorities live in a parallel numpy array so sampling stays O(n)
    in C rather than rebuilding Python lists every step.
    """

    def __init__(self, capacity: int = REPLAY_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._priorities = np.zeros(capacity)
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def add(self, tr: Transition) -> None:
        if len(self._items) < self.capacity:
            self._priorities[len(self._items)] = tr.priority
            self._items.append(tr)
        else:
            self._items[self._next] = tr
            self._priorities[self._next] = tr.priority
            self._next = (self._next + 1) % self.capacity

    def get(self, index: int) -> Transition:
        return self._items[index]

    def update_priority(self, index: int, delta: float) -> None:
        priority = abs(delta) + PRIORITY_FLOOR
        self._items[index] = replace(self._items[index], priority=priority)
        self._priorities[index] = priority

    def priorities(self) -> np.ndarray:
        return self._priorities[:len(self._items)]


@dataclass(frozen=True)
class Batch:
    transitions: tuple[Transition, ...]
    indices: tuple[int, ...]
    importance: np.ndarray


def sample_prioritized(buffer: ReplayBuffer, batch: int,
                       rng_seed: int) -> Batch:
    """Draw transitions with probability proportional to priority^0.6.

    Importance weights (N * P(i))^-beta are normalized by the largest
    weight over the whole buffer.  Deterministic per seed.
    """
    n = len(buffer)
    if n == 0:
        raise EmptyBuffer("replay buffer is empty")
    powered = buffer.priorities() ** PRIORITY_EXPONENT
    probs = powered / powered.sum()
    cumulative = np.cumsum(probs)
    cumulative[-1] = 1.0
    stream = Stream(rng_seed)
    draws = np.array([stream.uniform() for _ in range(batch)])
    indices = np.searchsorted(cumulative, draws, side="right")
    max_weight = float((n * probs.min()) ** -IMPORTANCE_BETA)
    importance = (n * probs[indices]) ** -IMPORTANCE_BETA / max_weight
    return Batch(tuple(buffer.get(int(i)) for i in indices),
                 tuple(int(i) for i in indices), importance)


def train_step(q: QModel, batch: Batch, lr: float,
               gamma: float = DISCOUNT) -> tuple[QModel, np.ndarray]:
    """Semi-gradient update over the batch; returns (new model, td errors).

    Vectorized twin of td_error (the two are cross-checked in tests);
    gradients are evaluated at the pre-step weights and averaged, each
    scaled by its importance weight.
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    states = np.stack([tr.state for tr in batch.transitions])
    next_states = np.stack([tr.next_state for tr in batch.transitions])
    actions = np.array([tr.action for tr in batch.transitions])
    rewards = np.array([tr.reward for tr in batch.transitions])
    terminal = np.array([tr.terminal for tr in batch.transitions])

    n = states.shape[0]
    current = (states @ q.weights.T + q.bias)[np.arange(n), actions]
    boot = np.max(next_states @ q.target_weights.T + q.target_bias, axis=1)
    deltas = rewards + np.where(terminal, 0.0, gamma * boot) - current

    scaled = (lr / n) * batch.importance * deltas
    grad_w = np.zeros_like(q.weights)
    grad_b = np.zeros_like(q.bias)
    np.add.at(grad_w, actions, scaled[:, None] * states)
    np.add.at(grad_b, actions, scaled)
    new_w = q.weights + grad_w
    new_b = q.bias + grad_b
    if not (np.all(np.isfinite(new_w)) and np.all(np.isfinite(new_b))):
        raise NonFiniteUpdate("Q-model weights diverged")
    return QModel(new_w, new_b, q.target_weights, q.target_bias), deltas


def sync_target(q: QModel) -> QModel:
    """Copy the online weights into the target slot."""
    return QModel(q.weights, q.bias, q.weights.copy(), q.bias.copy())


def save_qmodel(q: QModel) -> bytes:
    rows = 2 * len(ACTIONS)  # online block then target block
    stacked_w = np.vstack([q.weights, q.target_weights])
    stacked_b = np.concatenate([q.bias, q.target_bias])
    return serialize.pack_raw(rows, STATE_DIM, stacked_w, stacked_b)


def load_qmodel(data: bytes) -> QModel:
    stacked_w, stacked_b = serialize.unpack_raw(data, 2 * len(ACTIONS))
    k = len(ACTIONS)
    return QModel(stacked_w[:k], stacked_b[:k], stacked_w[k:], stacked_b[k:])


# --- Synthetic environment ----------------------------------------------------

@dataclass(frozen=True)
class EnvConfig:
    """Bands and costs of the synthetic tool environment.

    reason succeeds below ``reason_max`` complexity; compute succeeds
    above ``compute_min`` (tools err on trivial problems); hybrid
    covers the middle band.  compute and hybrid count as tool calls.
    """

    # Band edges sit on multiples of 1/7 so the topic one-hot can resolve them.
    reason_max: float = 4.0 / 7.0
    compute_min: float = 2.0 / 7.0
    hybrid_lo: float = 1.0 / 7.0
    hybrid_hi: float = 6.0 / 7.0
    latency_s: tuple[float, float, float] = (0.1, 3.0, 1.5)
    brevity: tuple[float, float, float] = (0.9, 0.6, 0.7)
    deadline_s: float = 8.0
    max_steps: int = 32


class ToolEnv:
    """Episodic environment: one problem, a handful of dependent steps."""

    def __init__(self, config: EnvConfig = EnvConfig(), seed: int = 0):
        self.config = config
        self._stream = substream(seed, "tool-env")
        self._complexity = 0.0
        self._steps_needed = 0
        self._step = 0
        self._elapsed = 0.0
        self._reasoning_chars = 0
        self._tool_calls = 0
        self._tool_hits = 0
        self._all_correct = True

    def _observe(self) -> np.ndarray:
        c = self._complexity
        success_mean = (self._tool_hits / self._tool_calls
                        if self._tool_calls else 0.0)
        return build_state(
            token_length=int(40 + 400 * c),
            operator_density=0.15 + 0.6 * c,
            max_magnitude=10.0 ** (4.0 * c),
            topic=min(int(c * TOPIC_BANDS), TOPIC_BANDS - 1),
            step_index=self._step,
            reasoning_chars=self._reasoning_chars,
            last_confidence=0.9 - 0.5 * c,
            ensemble_entropy=c * math.log(3.0) * 0.8,
            tool_calls=self._tool_calls,
            tool_success_mean=success_mean,
            tool_ms=self._elapsed * 1000.0,
        )

    def reset(self) -> np.ndarray:
        self._complexity = self._stream.uniform()
        self._steps_needed = 1 + int(self._complexity * 5.999)
        self._step = 0
        self._elapsed = 0.0
        self._reasoning_chars = 0
        self._tool_calls = 0
        self._tool_hits = 0
        self._all_correct = True
        return self._observe()

    def _step_correct(self, action: int) -> bool:
        c = self._complexity
        cfg = self.config
        if ACTIONS[action] == "reason":
            return c < cfg.reason_max
        if ACTIONS[action] == "compute":
            return c > cfg.compute_min
        return cfg.hybrid_lo < c < cfg.hybrid_hi

    def step(self, action: int) -> tuple[np.ndarray, float, bool, dict]:
        cfg = self.config
        latency = cfg.latency_s[action]
        correct = self._step_correct(action)
        self._elapsed += latency
        self._step += 1
        if ACTIONS[action] == "reason":
            self._reasoning_chars += 400
        elif ACTIONS[action] == "hybrid":
            self._reasoning_chars += 150
        if ACTIONS[action] in ("compute", "hybrid"):
            self._tool_calls += 1
            self._tool_hits += 1 if correct else 0
        self._all_correct = self._all_correct and correct
        done = self._step >= min(self._steps_needed, cfg.max_steps)
        value = reward(correct, latency, cfg.brevity[action],
                       deadline_s=None)
        if done and self._elapsed > cfg.deadline_s:
            value += LATE_PENALTY
        info = {
            "correct_step": correct,
            "episode_correct": self._all_correct if done else None,
            "tool_calls": self._tool_calls,
            "elapsed_s": self._elapsed,
        }
        return self._observe(), value, done, info


def run_episode(env: ToolEnv, q: QModel, eps_greedy: float,
                rng_seed: int) -> tuple[list[Transition], dict]:
    """Play one episode; epsilon-greedy over the online Q-values.

    Returns the transition list and an info dict (total reward, final
    correctness, tool calls).  Episodes truncate at the environment's
    step cap.
    """
    stream = substream(rng_seed, "episode")
    state = env.reset()
    transitions: list[Transition] = []
    total = 0.0
    info: dict = {}
    for _ in range(env.config.max_steps):
        if eps_greedy > 0 and stream.uniform() < eps_greedy:
            action = stream.randint(len(ACTIONS))
        else:
            action = int(np.argmax(q.q_values(state)))
        next_state, r, done, info = env.step(action)
        transitions.append(Transition(state, action, r, next_state, done))
        total += r
        state = next_state
        if done:
            break
    info["total_reward"] = total
    return transitions, info


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 20_000
    batch: int = BATCH_SIZE
    lr: float = 0.03
    gamma: float = DISCOUNT
    sync_every: int = TARGET_SYNC_EVERY
    capacity: int = REPLAY_CAPACITY
    eps_start: float = 1.0
    eps_end: float = 0.1
    eps_decay_frac: float = 0.6
    seed: int = 0


def _epsilon(step: int, config: TrainConfig) -> float:
    horizon = max(1, int(config.steps * config.eps_decay_frac))
    if step >= horizon:
        return config.eps_end
    frac = step / horizon
    return config.eps_start + frac * (config.eps_end - config.eps_start)


def train_policy(config: TrainConfig = TrainConfig(),
                 env_config: EnvConfig = EnvConfig()) -> QModel:
    """Prioritized-replay Q-learning on the synthetic environment.

    One environment step per training step; updates start once the
    buffer holds a full batch.  Fully deterministic for a fixed seed.
    """
    env = ToolEnv(env_config, seed=config.seed)
    explore = substream(config.seed, "explore")
    q = QModel.zeros()
    buffer = ReplayBuffer(config.capacity)
    state = env.reset()
    for step in range(config.steps):
        eps = _epsilon(step, config)
        if explore.uniform() < eps:
            action = explore.randint(len(ACTIONS))
        else:
            action = int(np.argmax(q.q_values(state)))
        next_state, r, done, _ = env.step(action)
        tr = Transition(state, action, r, next_state, done)
        delta = td_error(q, tr, config.gamma)
        buffer.add(replace(tr, priority=abs(delta) + PRIORITY_FLOOR))
        state = env.reset() if done else next_state
        if len(buffer) >= config.batch:
            batch = sample_prioritized(buffer, config.batch,
                                       rng_seed=config.seed * 1_000_003 + step)
            q, deltas = train_step(q, batch, config.lr, config.gamma)
            for index, delta in zip(batch.indices, deltas):
                buffer.update_priority(index, float(delta))
        if (step + 1) % config.sync_every == 0:
            q = sync_target(q)
    return q


@dataclass(frozen=True)
class EvalSummary:
    episodes: int
    accuracy: float
    mean_tool_calls: float
    mean_reward: float


def evaluate_policy(q: QModel | None, env_config: EnvConfig, episodes: int,
                    seed: int, mode: str = "greedy") -> EvalSummary:
    """Roll out episodes under greedy, always-compute, or random acting."""
    env = ToolEnv(env_config, seed=seed)
    stream = substream(seed, "eval", mode)
    correct = 0
    tool_calls = 0
    total_reward = 0.0
    for _ in range(episodes):
        state = env.reset()
        done = False
        info: dict = {}
        while not done:
            if mode == "always-compute":
                action = ACTIONS.index("compute")
            elif mode == "random":
                action = stream.randint(len(ACTIONS))
            else:
                action = int(np.argmax(q.q_values(state)))
            state, r, done, info = env.step(action)
            total_reward += r
        correct += 1 if info["episode_correct"] else 0
        tool_calls += info["tool_calls"]
    return EvalSummary(episodes, correct / episodes, tool_calls / episodes,
                       total_reward / episodes)

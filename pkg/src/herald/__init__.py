"""herald: bilingual math-answer ensemble harness.

Answer normalization and equivalence, confidence calibration, adaptive
routing, entropy-stopped iterative voting, a learned tool-invocation
policy, distillation losses, and evaluation metrics, wired together by
a CLI with pluggable (simulated or remote) solver backends.
"""

__version__ = "0.1.0"

"""Exception types shared across the package.

Every error raised by library code derives from :class:`HeraldError` so
callers can catch the whole family at pipeline boundaries.
"""


class HeraldError(Exception):
    """Base class for all library errors."""


class LexError(HeraldError):
    """A character outside the answer grammar was found.

    Attributes:
        position: 0-based index of the offending character.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(HeraldError):
    """Division by exact zero, or log/sqrt outside its real domain."""


class DimensionMismatch(HeraldError):
    """Vector/matrix operands have incompatible shapes or providers."""


class ZeroVector(HeraldError):
    """Cosine similarity is undefined for a zero-norm vector."""


class NonPositiveTemperature(HeraldError):
    """Temperature scaling requires T > 0."""


class EmptySampleSet(HeraldError):
    """Calibration metrics need at least one sample."""


class DegenerateLabels(HeraldError):
    """Temperature fitting needs both correct and incorrect outcomes."""


class LengthMismatch(HeraldError):
    """Paired sequences must have equal length."""


class NegativeFisher(HeraldError):
    """Fisher diagonal entries must be non-negative."""


class EmptyTrainingSet(HeraldError):
    """Distillation requires a non-empty training set."""


class NonFiniteLoss(HeraldError):
    """Training loss became NaN/inf.

    Attributes:
        step: training step at which the loss diverged.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class ConstantWeights(HeraldError):
    """All weights equal; min-max quantization would divide by zero."""


class EmptyTally(HeraldError):
    """Vote entropy is undefined for an empty or zero-mass tally."""


class AllUnparsed(HeraldError):
    """Every solver verdict failed answer normalization."""


class EmptyBuffer(HeraldError):
    """Replay buffer has no transitions to sample."""


class NonFiniteUpdate(HeraldError):
    """A Q-model update produced non-finite weights."""


class SolverError(HeraldError):
    """Base class for remote-solver failures; carries the solver id."""

    def __init__(self, solver_id: str, message: str):
        super().__init__(f"[{solver_id}] {message}")
        self.solver_id = solver_id


class SolverTimeout(SolverError):
    """The remote solver did not answer within the deadline."""


class MalformedResponse(SolverError):
    """The remote solver answered with an unusable payload."""


class TransportError(SolverError):
    """The HTTP request to the remote solver failed outright."""


class IngestError(HeraldError):
    """Dataset file could not be read."""


class SchemaError(HeraldError):
    """A dataset line violates the problem schema.

    Attributes:
        line: 1-based line number of the bad record.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(HeraldError):
    """Run configuration is inconsistent or out of range."""

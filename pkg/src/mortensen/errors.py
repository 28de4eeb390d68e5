"""Exception types shared across the toolkit."""


class MortensenError(Exception):
    """Base class for all toolkit errors."""


class UnknownModel(MortensenError):
    """Requested model name is not in the catalog."""


class ParamOutOfRange(MortensenError):
    """A model parameter violates its declared admissible range."""

    def __init__(self, name, value, low, high):
        self.name = name
        self.value = value
        super().__init__(
            f"parameter {name!r}={value!r} outside admissible range [{low}, {high}]"
        )


class NonFiniteState(MortensenError):
    """A time-stepping scheme produced a non-finite state."""

    def __init__(self, step_index, message="non-finite state during integration"):
        self.step_index = step_index
        super().__init__(f"{message} (step {step_index})")


class GridMismatch(MortensenError):
    """Two path-like objects do not share the same time grid."""


class SingularSigma(MortensenError):
    """Diffusion matrix is (numerically) singular where inversion is required."""


class NotConverged(MortensenError):
    """An iterative solver failed to meet its tolerance.

    Carries the best iterate found so far in ``best`` so no work is lost.
    """

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class Infeasible(MortensenError):
    """The requested constraint level cannot be met by any control pair."""


class NonLinearModel(MortensenError):
    """Operation requires a linear-Gaussian model."""


class ConfigError(MortensenError):
    """Experiment configuration is invalid; names the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")

"""Exception types shared across the package."""


class NumericalFailureError(RuntimeError):
    """A numerical routine did not reach its accuracy target within budget.

    Carries the best available residual estimate so callers can report how far
    off the result was.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateStatisticError(ValueError):
    """The detection statistic carries no usable chi-square weight.

    Raised when a stream has unit variance under the alternative hypothesis
    (weight 1 - 1/sigma^2 vanishes) while its reference mean is nonzero, so the
    stream's information cannot be represented by the weighted chi-square
    machinery.  ``all_streams`` is True when every stream is degenerate.
    """

    def __init__(self, message, all_streams=False):
        super().__init__(message)
        self.all_streams = all_streams


class ConfigError(ValueError):
    """A configuration document failed validation; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

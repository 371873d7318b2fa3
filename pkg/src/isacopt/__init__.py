"""Rate-reliability-detection trade-off toolkit for DPC-based dual-function frames."""

__version__ = "0.1.0"

from .errors import ConfigError, DegenerateStatisticError, NumericalFailureError
from .stats import (
    GeneralizedChiSquare,
    capacity,
    dispersion,
    gchisq_cdf,
    gchisq_quantile,
    q_func,
    q_inv,
)

__all__ = [
    "ConfigError",
    "DegenerateStatisticError",
    "NumericalFailureError",
    "GeneralizedChiSquare",
    "capacity",
    "dispersion",
    "gchisq_cdf",
    "gchisq_quantile",
    "q_func",
    "q_inv",
    "__version__",
]

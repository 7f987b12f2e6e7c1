"""Ultra-low-frequency spectral analysis toolkit."""

from ._ulfkit import (
    DegenerateInput,
    FormatError,
    NumericalError,
    SingularMatrix,
    bin_events,
    fit,
    format_period,
    frequency_grid,
    harmonics,
    multiple_coherence,
    ordinary_coherence,
    partial_coherence,
    period_of,
    psd,
    selftest,
    statistical_features,
    version,
)

__version__ = version()

__all__ = [
    "DegenerateInput",
    "FormatError",
    "NumericalError",
    "SingularMatrix",
    "bin_events",
    "fit",
    "format_period",
    "frequency_grid",
    "harmonics",
    "multiple_coherence",
    "ordinary_coherence",
    "partial_coherence",
    "period_of",
    "psd",
    "selftest",
    "statistical_features",
    "version",
]

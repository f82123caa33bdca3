"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`SikError` so callers
(and the CLI exit-code mapping) can distinguish domain failures from plain
bugs or I/O problems.
"""


class SikError(Exception):
    """Base class for all library errors."""


class HyperparameterError(SikError):
    """A hyperparameter (psi, t, seed) violates its documented bounds."""


class ShapeError(SikError):
    """Array dimensionality or length does not match the fitted model."""


class ParameterError(SikError):
    """An operation argument is invalid (counts, ratios, grids, data values)."""


class UndefinedMetricError(SikError):
    """The requested metric is undefined for the given labels."""


class EmptyReferenceError(SikError):
    """A reference set that must be non-empty was empty."""


class InternalInvariantError(SikError):
    """An internal invariant was violated; indicates a caller or library bug."""


class FormatError(SikError):
    """A persisted file does not conform to its binary or CSV format."""

"""Exception types shared across the package.

Every error carries a short machine-readable ``category`` so the CLI can
emit ``error:<category>: <message>`` lines without inspecting types.
"""

from __future__ import annotations


class FraudDetectError(Exception):
    """Base class for all errors raised by this package."""

    category: str = "error"


class ShapeError(FraudDetectError):
    """An array had the wrong dimensionality or incompatible dimensions."""

    category = "shape"


class DegenerateInputError(FraudDetectError):
    """Input was structurally valid but too small or empty for the operation."""

    category = "degenerate-input"


class LabelDomainError(FraudDetectError):
    """A class label was outside the supported {0, 1} domain."""

    category = "label-domain"


class ParameterError(FraudDetectError):
    """A hyperparameter or configuration value was outside its valid domain."""

    category = "parameter"


class ArchitectureError(FraudDetectError):
    """A network architecture request was inconsistent or unsupported."""

    category = "architecture"


class CacheError(FraudDetectError):
    """A forward cache did not match the model or batch it was replayed against."""

    category = "cache"


class ConvergenceError(FraudDetectError):
    """An iterative solver exhausted its iteration budget before converging."""

    category = "convergence"


class DivergenceError(FraudDetectError):
    """Training produced a non-finite loss."""

    category = "divergence"


class SchemaError(FraudDetectError):
    """A file or dataset was missing required columns or had mismatched ones."""

    category = "schema"


class FormatError(FraudDetectError):
    """A file could not be parsed at the cell or line level."""

    category = "format"


class ComparabilityError(FraudDetectError):
    """Two evaluation reports could not be compared."""

    category = "comparability"


class VersionError(FraudDetectError):
    """A serialized model had an unknown format marker or version."""

    category = "version"

"""Exception types shared across the toolkit.

The CLI maps ``ConfigError`` to exit code 2 and every other
``TempostreamError`` to exit code 1.
"""


class TempostreamError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TempostreamError):
    """Invalid configuration value or unknown configuration key."""


class ContractError(TempostreamError):
    """A documented precondition of an operation was violated."""


class ShapeError(TempostreamError):
    """Tensor or grid shapes are inconsistent."""


class NumericError(TempostreamError):
    """Non-finite values where finite ones are required."""


class GeometryError(TempostreamError):
    """Degenerate or inverted bounding-box geometry."""

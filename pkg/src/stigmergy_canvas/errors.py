"""
Stigmergy Canvas Errors
=======================

Exception hierarchy shared by every module. Each concrete error also derives
from the builtin it most resembles, so callers that only know ``ValueError``
or ``IndexError`` still catch the right things.

License: MIT
"""

from typing import Optional


class SwarmCanvasError(Exception):
    """Base class for all stigmergy-canvas errors."""


class ParameterError(SwarmCanvasError, ValueError):
    """
    A parameter is outside its documented range.

    ``key`` names the configuration key the parameter comes from, when known.
    """

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


class BoundsError(SwarmCanvasError, IndexError):
    """A cell coordinate lies outside the canvas."""


class ResourceError(SwarmCanvasError):
    """A request exceeds a configured resource cap."""


class FieldError(SwarmCanvasError):
    """A mutation was attempted through a read-only field view."""


class UndefinedMetricError(SwarmCanvasError, ValueError):
    """A metric has no defined value for the given input."""


class SnapshotError(SwarmCanvasError):
    """A snapshot could not be decoded or failed verification."""


class ConfigError(ParameterError):
    """
    A configuration document could not be turned into SimParams.

    Attributes:
        line: 1-based line number in the document (None when not line-bound)
        key: The configuration key involved (None for malformed lines)
    """

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.reason = message

        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}", key=key)


class ObserverError(SwarmCanvasError):
    """A run observer failed; the run was aborted at ``tick``."""

    def __init__(self, tick: int, cause: BaseException):
        self.tick = tick
        self.cause = cause
        super().__init__(f"observer failed at tick {tick}: {cause!r}")

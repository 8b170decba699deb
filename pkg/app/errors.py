"""
Exception hierarchy shared by the toolkit services, the CLI and the HTTP API.
"""
from typing import Optional


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class EmptyFamily(ToolkitError):
    pass


class ParseError(ToolkitError):
    """Malformed family text; carries the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class DimensionError(ToolkitError, ValueError):
    """Operands live over ground sets of different sizes."""


class DomainError(ToolkitError, ValueError):
    """An argument is outside the operation's domain."""


class GuardExceeded(ToolkitError):
    """An exhaustive routine would exceed its configured budget."""

    def __init__(self, operation: str, cost: int, limit: int):
        self.operation = operation
        self.cost = cost
        self.limit = limit
        super().__init__(f"{operation}: size {cost} exceeds guard {limit} (use --unsafe-limits to override)")


class PreconditionError(ToolkitError):
    pass


class RetryExhausted(ToolkitError):
    """A randomized build hit its ceiling before certifying its property."""


class ConstructionBug(ToolkitError):
    """A constructive routine produced output that fails its own check."""

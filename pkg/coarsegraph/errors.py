"""Exception hierarchy shared by every coarsegraph module."""

from __future__ import annotations


class CoarseGraphError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CoarseGraphError):
    """An environment setting is malformed."""


class GraphError(CoarseGraphError):
    """A graph invariant or operation precondition does not hold."""


class FormatError(CoarseGraphError):
    """A graph, label or certificate file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class ResourceLimitError(CoarseGraphError):
    """A construction or oracle would exceed its configured size limit."""


class ModelError(CoarseGraphError):
    """A minor model does not match its pattern or fails a precondition."""


class BudgetError(CoarseGraphError):
    """A search budget is not a finite positive node count."""


class QuasiIsometryError(CoarseGraphError):
    """A vertex map is malformed or fails a quasi-isometry precondition."""


class DecompositionError(CoarseGraphError):
    """A tree decomposition is indexed by something other than a tree."""


class WitnessError(CoarseGraphError):
    """A witness construction was asked for out of range, or failed to verify."""


class UsageError(CoarseGraphError):
    """Command-line arguments are invalid."""

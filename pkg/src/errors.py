"""
Exception hierarchy for the composite-index engine.

Every engine failure derives from IndexEngineError, which is a ValueError so
that callers catching ValueError keep working.
"""
from typing import List, Optional


class IndexEngineError(ValueError):
    """Base class for all engine errors."""


class ContractViolation(IndexEngineError):
    """A caller broke an operation's precondition (e.g. an invalid tree)."""


class TreeSyntaxError(IndexEngineError):
    """The tree document is not well-formed structured text."""

    def __init__(self, message: str, path: str = "<document>"):
        super().__init__(f"{path}: {message}")
        self.path = path


class TreeSemanticError(IndexEngineError):
    """The tree document parsed but describes an illegal tree."""

    def __init__(self, message: str, path: str = "index", violations: Optional[List] = None):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.violations = list(violations or [])


class ScoringError(IndexEngineError):
    """Base class for failures while scoring an entity."""


class InvalidObservationError(ScoringError):
    """An observation value is unusable (non-finite)."""


class UnknownIndicatorError(ScoringError):
    """An observation names an id the tree does not have."""

    def __init__(self, indicator_id: str, detail: str = "unknown indicator"):
        super().__init__(f"{detail}: '{indicator_id}'")
        self.indicator_id = indicator_id


class MissingIndicatorError(ScoringError):
    """The fail policy met a child without data."""

    def __init__(self, node_id: str, child_id: str):
        super().__init__(f"missing indicator: '{child_id}' beneath '{node_id}'")
        self.node_id = node_id
        self.child_id = child_id


class NoDataError(ScoringError):
    """The reweight policy met a node whose children all lack data."""

    def __init__(self, node_id: str):
        super().__init__(f"no data beneath node '{node_id}'")
        self.node_id = node_id


class ScoreRangeError(ScoringError):
    """A pre-normalized score lies outside [0, scale]."""


class DuplicateObservationError(ScoringError):
    """The same (entity, indicator) pair was observed twice in strict mode."""


class CoverageError(IndexEngineError):
    """An operation needing full dimension coverage found a gap."""

    def __init__(self, dimension_id: str, entity_id: str):
        super().__init__(
            f"dimension '{dimension_id}' lacks data for entity '{entity_id}'"
        )
        self.dimension_id = dimension_id
        self.entity_id = entity_id


class IngestError(IndexEngineError):
    """Observation ingestion failed (strict mode or unreadable stream)."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class UnknownCaseError(IndexEngineError):
    """A reproduction case name is not built in."""

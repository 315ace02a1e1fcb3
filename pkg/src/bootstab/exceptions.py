"""Exception types shared across the package.

Every error raised on a contract violation carries a ``details`` dict so
batch drivers can report the offending row/field/triple without parsing
message strings.
"""

from __future__ import annotations


class BootstabError(Exception):
    """Base class; carries structured diagnostics in ``details``."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class ConfigError(BootstabError):
    """Bad experiment config: unknown key, missing section, wrong version."""


class DataFormatError(ConfigError):
    """Malformed input file (CSV cell, weight vector, distance matrix)."""


class InvariantViolation(BootstabError):
    """A numerical invariant that should hold by construction failed."""


class SolverError(BootstabError):
    """An iterative solver hit its cap or produced an unusable state."""

"""
Exception types shared by the model modules and the CLI
=======================================================
Model failures subclass :class:`ModelError` and carry the name of the
module that raised them; scenario problems raise :class:`ConfigError`.
Both are ``ValueError`` subclasses so callers catching bad input keep
working.
"""

from typing import List, Optional


class ModelError(ValueError):
    """A model operation rejected its inputs or could not find a solution."""

    module = 'model'

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def qualified(self) -> str:
        """Return the message prefixed with the raising module's name."""
        return f"{self.module}: {self}"


class IncompatibleUnitsError(ModelError):
    module = 'units'


class DomainError(ModelError):
    """Input outside the range a model is defined on."""


class NoEquilibriumError(ModelError):
    module = 'stability'


class UnsolvableBallastError(ModelError):
    module = 'stability'


class CalibrationError(ModelError):
    module = 'depletion'


class WindowOverlapError(ModelError):
    module = 'energy'


class ConfigError(ValueError):
    """The scenario file is missing, unreadable or fails validation."""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = message + ": " + "; ".join(self.errors)
        super().__init__(message)

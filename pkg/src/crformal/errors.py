"""Exception hierarchy shared across the package."""


class CrformalError(Exception):
    """Base class for all library errors."""


class StructuralError(CrformalError):
    """Mismatched contexts, shapes or variable sets."""


class PreconditionError(CrformalError):
    """An operation was called on input it is not defined for."""


class TruncationError(PreconditionError):
    """A computation would need jet coefficients beyond the stored truncation."""


class SingularLinearPartError(PreconditionError):
    """A system that must be formally invertible has a singular linear part."""


class InputRejectedError(CrformalError):
    """Input data fails a verified structural identity (e.g. is not real)."""


class InternalInconsistencyError(CrformalError):
    """Two independent computations of the same quantity disagree: a bug trap."""


class ParseError(CrformalError):
    """Expression syntax or vocabulary error, with a source position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class ScenarioError(CrformalError):
    """Semantic error in a scenario document, with a JSON-ish path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message

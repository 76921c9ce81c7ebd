"""Exception hierarchy shared by every layer of the package."""


class ShatterlabError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ShatterlabError, ValueError):
    pass


class EmptyInput(ShatterlabError, ValueError):
    pass


class NotASubset(ShatterlabError, ValueError):
    pass


class ClosureNotAFlat(ShatterlabError, ValueError):
    pass


class ClosureMismatch(ShatterlabError, ValueError):
    pass


class ParseError(ShatterlabError, ValueError):
    pass


class EmptyRestriction(ShatterlabError, ValueError):
    pass


class NotUniform(ShatterlabError):
    def __init__(self, message, clause=None):
        super().__init__(message)
        self.clause = clause


class AnnotationInvalid(ShatterlabError):
    pass


class BudgetExceeded(ShatterlabError):
    pass


class SearchBudgetExceeded(BudgetExceeded):
    pass


class NotSimple(ShatterlabError, ValueError):
    pass


class ParamOutsideY(ShatterlabError, ValueError):
    pass


class DegenerateFit(ShatterlabError, ValueError):
    """All counts are equal, so the log-log fit carries no information."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ArityMismatch(DimensionMismatch):
    """A grid does not match the blocks of its relation."""

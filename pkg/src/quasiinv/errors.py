"""Exception hierarchy shared by all modules."""


class QuasiInvError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(QuasiInvError, ValueError):
    """An input violates a documented precondition."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ValidationError(PreconditionError):
    """A structural invariant (partition, ordering, positivity) is broken."""


class InvalidInvariantsError(PreconditionError):
    """Rokhlin invariants fail one of the admissibility inequalities."""


class UnsupportedClassError(PreconditionError):
    """The operation needs an exact-class map but got a numeric segment."""


class ConfigurationError(QuasiInvError):
    """Representation limits exceeded (e.g. polynomial degree)."""


class NumericError(QuasiInvError, ArithmeticError):
    """A numeric procedure did not reach its tolerance."""

    def __init__(self, message, achieved=None, residuals=None):
        super().__init__(message)
        self.achieved = achieved
        self.residuals = dict(residuals or {})

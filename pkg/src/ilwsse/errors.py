"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``UsageError`` to 1, any other
``IlwError`` to 2 (numeric failure) and ``VerificationFailure`` to 3.
"""


class IlwError(Exception):
    """Base class for all errors raised by the toolkit."""


class UsageError(IlwError):
    """Bad configuration or arguments supplied by the caller."""


class DomainError(IlwError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ValidationError(IlwError, ValueError):
    """A profile or record failed one of its invariants."""


class ConvergenceError(IlwError, ArithmeticError):
    """An iteration or quadrature did not reach its tolerance."""


class SingularityError(IlwError, ArithmeticError):
    """Evaluation hit a genuine singularity (e.g. a turning point)."""


class PrecisionError(IlwError, ArithmeticError):
    """The configured working precision is too small for the request."""


class BracketError(IlwError, ArithmeticError):
    """A root-finding bracket could not be established."""


class VerificationFailure(IlwError):
    """A verification run completed but at least one check failed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

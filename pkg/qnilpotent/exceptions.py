"""Exception hierarchy shared by every qnilpotent module.

Library code raises these; only :mod:`qnilpotent.cli` turns them into
exit codes.
"""
from typing import Any, Optional


class QNilpotentError(Exception):
    """Base class for all errors raised by qnilpotent."""


class DomainError(QNilpotentError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularElement(DomainError):
    """The element has no inverse for the generalized addition."""


class Infeasible(DomainError):
    """Constraint targets cannot be attained on the given support."""


class FitRejected(DomainError):
    """A power-law fit was rejected because growth is not polynomial.

    Args:
        message: Human readable reason.
        report: The report whose fit was rejected, with its measured
            exponent and residual filled in.
    """

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class ConvergenceFailure(QNilpotentError, ArithmeticError):
    """An iterative solver exhausted its budget above tolerance."""

    def __init__(self, message: str, residual: float = float("nan"),
                 iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ResourceLimit(QNilpotentError, MemoryError):
    """An enumeration exceeded its configured element budget."""

    def __init__(self, message: str, budget: int = 0):
        super().__init__(message)
        self.budget = budget

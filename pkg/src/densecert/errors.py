"""Exception hierarchy shared by every module.

Two families matter to callers (and to the CLI exit codes): *rejections*,
where the mathematics says no, and *budget* failures, where we simply ran
out of precision or depth before deciding.
"""

from __future__ import annotations

from typing import Any


class DenseCertError(Exception):
    """Base class for all package errors."""


class Rejection(DenseCertError):
    """The input violates a mathematical hypothesis of the requested operation."""


class BudgetError(DenseCertError):
    """A configured precision, depth or exponent cap was hit before a decision."""


class NeedsRefinement(BudgetError):
    """An enclosure still straddles the decision point at the precision cap."""

    def __init__(self, message: str, enclosure: Any = None, partial: Any = None):
        super().__init__(message)
        self.enclosure = enclosure
        self.partial = partial


class BudgetExhausted(BudgetError):
    """Search gave up; ``best`` holds the best (uncertified) result so far."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class DegenerateTermination(Rejection):
    """An Engel expansion terminated early, so the input was rational."""


class DependentDilations(Rejection):
    """ln p / ln q is rational, so {p^m q^n} is not dense."""


class PrimalityFailure(Rejection):
    pass


class ExactRoot(Rejection):
    pass


class PrefixTooShort(Rejection):
    """No available Engel digit is large enough to certify the requested bound."""


class DomainViolation(Rejection):
    """An integration interval touches the excluded neighbourhood of zero."""

"""Exception hierarchy shared by every digitfrac module."""

from __future__ import annotations


class DigitFracError(Exception):
    """Base class for all library errors."""


class ValidationError(DigitFracError):
    """A digit system or query violates its invariants."""


class EmptyDigits(ValidationError):
    pass


class DigitOutOfRange(ValidationError):
    pass


class WeightsNotNormalized(ValidationError):
    pass


class MixedBases(ValidationError):
    pass


class BadSlabParams(ValidationError):
    pass


class BadFamilyParams(ValidationError):
    pass


class BoxOutOfRange(ValidationError):
    pass


class OutOfUnitCube(ValidationError):
    pass


class PsiTooLarge(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class BudgetError(DigitFracError):
    """A computation would exceed a configured resource limit."""


class BudgetExceeded(BudgetError):
    pass


class TolTooTight(BudgetError):
    pass


class MemoCapExceeded(BudgetError):
    """Exact recursion ran out of states; ``lower``/``upper`` bracket the answer."""

    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class DepthCapHit(BudgetError):
    pass

"""Exceptions shared across the toolkit."""


class SlemmaError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(SlemmaError):
    """Vector or matrix sizes do not agree with the declared dimension."""


class DomainError(SlemmaError):
    """A function was evaluated outside its domain (log/sqrt of a negative
    number, division by zero).  Carries the offending subexpression text."""

    def __init__(self, message, subexpression=None):
        super().__init__(message)
        self.subexpression = subexpression


class NotConverged(SlemmaError):
    """An iterative routine hit its sweep/iteration limit."""


class NumericalBreakdown(SlemmaError):
    """The LP solver met a pivot too small to trust; rescale the input."""

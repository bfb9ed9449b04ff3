"""Exception types raised across the package."""


class FlatCyclesError(Exception):
    """Base class for all package errors."""


class NegativeRadicand(FlatCyclesError, ValueError):
    """The radicand of a tower element is not positive under the embedding."""


class DivisionByZero(FlatCyclesError, ZeroDivisionError):
    pass


class ParseError(FlatCyclesError, ValueError):
    pass


class AlgebraMismatch(FlatCyclesError, ValueError):
    pass


class NotInvertible(FlatCyclesError, ValueError):
    pass


class NotSplit(FlatCyclesError, ValueError):
    pass


class NotNormalizable(FlatCyclesError):
    """Bounded search found no presentation with positive ``a`` at split places.

    This is a search failure, not a refutation: such a presentation always exists.
    """


class NotInOrder(FlatCyclesError, ValueError):
    pass


class NotUnimodular(FlatCyclesError, ValueError):
    pass


class NotHyperbolicLike(FlatCyclesError, ValueError):
    pass


class DegenerateTriple(FlatCyclesError, ValueError):
    pass


class SharedEndpoint(FlatCyclesError, ValueError):
    pass


class DimensionMismatch(FlatCyclesError, ValueError):
    pass


class NotPolarRegular(FlatCyclesError, ValueError):
    pass


class NotFound(FlatCyclesError):
    """A bounded search window was exhausted without a match."""

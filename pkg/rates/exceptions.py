"""
Errors raised by the rate calculators and channel models.

All of them are ValueErrors so callers that only care about "bad input"
can catch one type.
"""


class NotNormalized(ValueError):
    """A probability distribution does not sum to 1."""


class NegativeWeight(ValueError):
    """A weight vector has a negative entry."""


class ZeroTotal(ValueError):
    """A weight vector sums to 0 and cannot be normalized."""


class OutOfRange(ValueError):
    """A probability or parameter lies outside its allowed interval."""


class Inconsistent(ValueError):
    """Observed error rates that no Pauli channel can produce."""


class DegenerateChannel(ValueError):
    """A B-step on a channel where no pair survives."""


class NoCrossing(ValueError):
    """A rate never changes sign over the scanned parameter range."""

class DimensionMismatch(ValueError):
    """Bit vectors or matrices whose shapes do not fit together."""


class NoSolution(ValueError):
    """No error pattern reproduces the given syndrome."""

"""
Entropy kernel shared by every rate formula.

H(p_1, ..., p_m) is the Shannon entropy in bits of a normalized
distribution; H[p_1, ..., p_m] is the entropy of an arbitrary non-negative
tuple after normalization. 0 * log 0 is taken as 0 throughout.
"""

import numpy as np
from scipy.special import entr
from scipy.stats import entropy as _shannon

from .exceptions import NegativeWeight, NotNormalized, OutOfRange, ZeroTotal

NORMALIZATION_TOL = 1e-12

_LN2 = np.log(2.0)


def _as_weights(weights):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"Expected a non-empty weight vector, got shape {w.shape}")
    if np.any(w < 0):
        raise NegativeWeight(f"Negative weight in {w.tolist()}")
    return w


def entropy(dist):
    """Shannon entropy, in bits, of a probability distribution."""
    p = _as_weights(dist)
    total = p.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"Distribution sums to {total!r}, not 1")
    # Renormalize before the log so tolerated drift is not amplified.
    return float(_shannon(p / total, base=2))


def normalized_entropy(weights):
    """H[p_1, ..., p_m]: entropy of the tuple divided by its total."""
    w = _as_weights(weights)
    total = w.sum()
    if total <= 0:
        raise ZeroTotal("Cannot normalize an all-zero tuple")
    return float(_shannon(w / total, base=2))


def binary_entropy(p):
    """h(p) = -p log p - (1 - p) log(1 - p)."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"Binary entropy needs p in [0, 1], got {p!r}")
    return entropy((p, 1.0 - p))


def weighted_term(coefficient, weights):
    """
    coefficient * H[weights], with the term defined as 0 when either the
    coefficient or the tuple total is 0 (the noiseless-channel corner).
    """
    if coefficient == 0:
        return 0.0
    w = _as_weights(weights)
    if w.sum() == 0:
        return 0.0
    return coefficient * normalized_entropy(w)


def entropy_rows(weights):
    """
    Vectorized H[...] across the last axis. Rows summing to 0 give 0 instead
    of raising, so callers can scan whole parameter grids at once.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise NegativeWeight("Negative weight in entropy grid")
    totals = w.sum(axis=-1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    return entr(w / safe).sum(axis=-1) / _LN2

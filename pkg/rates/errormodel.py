"""
Pauli channel parameterizations and error sampling.

A Bell-diagonal channel is an i.i.d. distribution over the four Pauli
errors I, X, Y, Z. Test bits measured in the Z, X and Y bases see the
observed rates

    p_Z = q_X + q_Y,   p_X = q_Z + q_Y,   p_Y = q_X + q_Z.

Error strings use the (bit, phase) labelling I=(0,0), X=(1,0), Y=(1,1),
Z=(0,1).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .exceptions import Inconsistent, NotNormalized, OutOfRange

logger = logging.getLogger(__name__)

SUM_TOL = 1e-12

# Index order used by every array view of a channel.
PAULI_ORDER = ('I', 'X', 'Y', 'Z')
_BIT_OF = np.array([0, 1, 1, 0], dtype=np.uint8)
_PHASE_OF = np.array([0, 0, 1, 1], dtype=np.uint8)


def _snap(value):
    """Clear round-off below zero; real negatives are left for validation."""
    return 0.0 if -SUM_TOL <= value < 0 else float(value)


@dataclass(frozen=True)
class PauliRates:
    q_I: float
    q_X: float
    q_Y: float
    q_Z: float

    def __post_init__(self):
        for name in ('q_I', 'q_X', 'q_Y', 'q_Z'):
            value = getattr(self, name)
            if not -SUM_TOL <= value <= 1.0 + SUM_TOL:
                raise OutOfRange(f"{name}={value!r} is not a probability")
        total = self.q_I + self.q_X + self.q_Y + self.q_Z
        if abs(total - 1.0) > SUM_TOL:
            raise NotNormalized(f"Pauli rates sum to {total!r}")

    @classmethod
    def from_array(cls, values):
        q_I, q_X, q_Y, q_Z = (_snap(v) for v in values)
        return cls(q_I, q_X, q_Y, q_Z)

    def as_array(self):
        return np.array([self.q_I, self.q_X, self.q_Y, self.q_Z], dtype=np.float64)

    @property
    def bit_error_rate(self):
        """p_Z, the rate at which Bob's key bit differs from Alice's."""
        return self.q_X + self.q_Y

    @property
    def odd_parity_rate(self):
        """P_odd: chance a length-2 block has odd bit-error parity."""
        p = self.bit_error_rate
        return 2.0 * p * (1.0 - p)


@dataclass(frozen=True)
class ObservedRates:
    """Per-basis error frequencies; p_Y is None for BB84."""
    p_X: float
    p_Y: Optional[float]
    p_Z: float

    def __post_init__(self):
        for name in ('p_X', 'p_Y', 'p_Z'):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise OutOfRange(f"{name}={value!r} is not a probability")

    @property
    def is_six_state(self):
        return self.p_Y is not None


@dataclass(frozen=True)
class ErrorString:
    bit_flags: np.ndarray
    phase_flags: np.ndarray

    def __post_init__(self):
        if len(self.bit_flags) != len(self.phase_flags):
            raise ValueError(
                f"Flag lengths differ: {len(self.bit_flags)} != {len(self.phase_flags)}"
            )

    def __len__(self):
        return len(self.bit_flags)

    def pauli_counts(self):
        """Occurrences of (I, X, Y, Z)."""
        return pauli_counts(self.bit_flags, self.phase_flags)


def pauli_counts(bit_flags, phase_flags):
    bit = np.asarray(bit_flags, dtype=bool)
    phase = np.asarray(phase_flags, dtype=bool)
    return (
        int(np.count_nonzero(~bit & ~phase)),
        int(np.count_nonzero(bit & ~phase)),
        int(np.count_nonzero(bit & phase)),
        int(np.count_nonzero(~bit & phase)),
    )


def depolarizing(p):
    """Depolarizing channel q_X = q_Y = q_Z = p."""
    if not 0.0 <= p <= 1.0 / 3.0 + SUM_TOL:
        raise OutOfRange(f"Depolarizing parameter must lie in [0, 1/3], got {p!r}")
    p = min(p, 1.0 / 3.0)
    return PauliRates.from_array((1.0 - 3.0 * p, p, p, p))


def observed_from_pauli(q):
    return ObservedRates(
        p_X=q.q_Z + q.q_Y,
        p_Y=q.q_X + q.q_Z,
        p_Z=q.q_X + q.q_Y,
    )


def pauli_from_observed(observed, clip=False):
    """
    Invert the observed-rate relations.

    With clip=True, negative solutions (sampling noise on small test sets)
    are set to 0 and the result renormalized instead of raising.
    """
    if observed.p_Y is None:
        raise Inconsistent("p_Y is absent; BB84 estimates go through the worst-case alpha family")
    p_X, p_Y, p_Z = observed.p_X, observed.p_Y, observed.p_Z
    q_X = (p_Z + p_Y - p_X) / 2.0
    q_Z = (p_X + p_Y - p_Z) / 2.0
    q_Y = (p_Z + p_X - p_Y) / 2.0
    q_I = 1.0 - q_X - q_Y - q_Z
    q = np.array([q_I, q_X, q_Y, q_Z])
    if np.any(q < -SUM_TOL):
        if not clip:
            raise Inconsistent(
                f"Observed rates {observed} need Pauli rates {q.tolist()}"
            )
        logger.debug(f"Clipping inconsistent estimate {q.tolist()} onto the simplex")
        q = np.clip(q, 0.0, None)
        q = q / q.sum()
    return PauliRates.from_array(q)


def bb84_worst_case_family(p_Z, p_X, alpha):
    """Member of the family q_X = p_Z - a, q_Y = a, q_Z = p_X - a."""
    upper = min(p_Z, p_X)
    if not 0.0 <= alpha <= upper + SUM_TOL:
        raise OutOfRange(f"alpha must lie in [0, {upper}], got {alpha!r}")
    alpha = min(alpha, upper)
    return PauliRates.from_array((1.0 - p_Z - p_X + alpha, p_Z - alpha, alpha, p_X - alpha))


def sample_errors(q, n, seed):
    """
    n i.i.d. Pauli errors drawn from q.

    seed may be an int or a numpy SeedSequence; equal seeds give equal strings.
    """
    if n < 1:
        raise OutOfRange(f"Need at least one error sample, got n={n}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(4, size=n, p=q.as_array())
    return ErrorString(bit_flags=_BIT_OF[labels], phase_flags=_PHASE_OF[labels])


def upper_error_bound(errors, trials, level):
    """
    One-sided Clopper-Pearson upper bound on an error rate seen as
    errors out of trials. Positive whenever errors < trials.
    """
    if trials < 1 or not 0 <= errors <= trials:
        raise OutOfRange(f"Need 0 <= errors <= trials and trials >= 1, got {errors}/{trials}")
    if not 0.0 < level < 1.0:
        raise OutOfRange(f"Confidence level must lie in (0, 1), got {level!r}")
    if errors == trials:
        return 1.0
    return float(stats.beta.ppf(level, errors + 1, trials - errors))

"""
GF(2) primitives for the parity exchange and privacy amplification.

Bit vectors are 1-D numpy uint8 arrays of 0/1. A parity-check matrix with l
rows and m columns maps an m-bit block to its l-bit syndrome v . M^T.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal, special

from .exceptions import DimensionMismatch, NoSolution

logger = logging.getLogger(__name__)

# Exhaustive decoding walks all 2^m patterns.
MAX_DECODE_BITS = 24

SEED_BOUND = 2 ** 63

# Priors are kept this far inside (0, 1) when weighing solutions.
PRIOR_CLIP = 1e-12


def as_bits(values):
    bits = np.asarray(values, dtype=np.uint8)
    if bits.ndim != 1:
        raise DimensionMismatch(f"Bit vectors are one-dimensional, got shape {bits.shape}")
    if np.any(bits > 1):
        raise ValueError("Bit vectors hold only 0 and 1")
    return bits


def draw_seed(rng):
    """Public 64-bit seed for a matrix or hash, drawn from a session stream."""
    return int(rng.integers(0, SEED_BOUND, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    rows: np.ndarray
    seed: int = None

    def __post_init__(self):
        if self.rows.ndim != 2:
            raise DimensionMismatch(f"Parity-check matrix must be 2-D, got shape {self.rows.shape}")
        if self.l > self.m:
            raise DimensionMismatch(f"More parities than bits: l={self.l} > m={self.m}")

    @classmethod
    def identity(cls, m):
        return cls(np.eye(m, dtype=np.uint8))

    @property
    def l(self):
        return self.rows.shape[0]

    @property
    def m(self):
        return self.rows.shape[1]

    def prefix(self, l):
        """The first l rows, under the same seed."""
        return ParityCheckMatrix(self.rows[:l], self.seed)


@dataclass(frozen=True, eq=False)
class HashSpec:
    """Toeplitz hash from in_len to out_len bits, defined by in_len + out_len - 1 bits."""
    seed: int
    out_len: int
    in_len: int
    sequence: np.ndarray

    def __post_init__(self):
        if not 0 <= self.out_len <= self.in_len:
            raise DimensionMismatch(f"Hash output {self.out_len} must lie in [0, {self.in_len}]")
        expected = max(self.in_len + self.out_len - 1, 0)
        if len(self.sequence) != expected:
            raise DimensionMismatch(f"Defining sequence has {len(self.sequence)} bits, need {expected}")

    @classmethod
    def from_seed(cls, seed, out_len, in_len):
        rng = np.random.default_rng(seed)
        length = max(in_len + out_len - 1, 0)
        return cls(seed, out_len, in_len, rng.integers(0, 2, size=length, dtype=np.uint8))


@dataclass(frozen=True)
class DecodeResult:
    pattern: np.ndarray
    weight: int
    ties: int
    # Posterior probability of `pattern` among all solutions under the prior.
    confidence: float = 1.0

    @property
    def ambiguous(self):
        return self.ties > 1


def syndrome(matrix, v):
    """v . M^T over GF(2)."""
    v = as_bits(v)
    if len(v) != matrix.m:
        raise DimensionMismatch(f"Block has {len(v)} bits, matrix expects {matrix.m}")
    return ((matrix.rows.astype(np.int64) @ v.astype(np.int64)) % 2).astype(np.uint8)


def otp_mask(t, s):
    t, s = as_bits(t), as_bits(s)
    if len(t) != len(s):
        raise DimensionMismatch(f"Cannot mask {len(t)} bits with {len(s)} pad bits")
    return np.bitwise_xor(t, s)


def random_parity_matrix(l, m, seed):
    """Uniform l x m binary matrix, fixed by seed."""
    if l < 0 or l > m:
        raise DimensionMismatch(f"Need 0 <= l <= m, got l={l}, m={m}")
    rng = np.random.default_rng(seed)
    return ParityCheckMatrix(rng.integers(0, 2, size=(l, m), dtype=np.uint8), seed)


def random_invertible_matrix(m, seed):
    """
    Uniform m x m binary matrix of full rank, fixed by seed.

    Draws are repeated until one has rank m; about 3.5 draws on average.
    Any prefix of its rows is linearly independent.
    """
    if m < 1:
        raise DimensionMismatch(f"Need m >= 1, got m={m}")
    rng = np.random.default_rng(seed)
    while True:
        rows = rng.integers(0, 2, size=(m, m), dtype=np.uint8)
        if gf2_rank(rows) == m:
            return ParityCheckMatrix(rows, seed)


def gf2_rank(rows):
    a = np.array(rows, dtype=np.uint8) % 2
    if a.ndim != 2:
        raise DimensionMismatch(f"Rank needs a 2-D matrix, got shape {a.shape}")
    rank = 0
    n_rows, n_cols = a.shape
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivots = np.flatnonzero(a[rank:, col])
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        a[[rank, pivot]] = a[[pivot, rank]]
        below = a[:, col].astype(bool)
        below[rank] = False
        a[below] ^= a[rank]
        rank += 1
    return rank


@lru_cache(maxsize=4)
def _pattern_weights(m):
    """Hamming weight of every m-bit pattern index."""
    weights = np.zeros(1 << m, dtype=np.uint8)
    for b in range(m):
        half = 1 << b
        weights[half:2 * half] = weights[:half] + 1
    return weights


def _syndrome_table(matrix):
    """
    Syndrome (as an int, row i in bit i) of every pattern index.

    Pattern index bits run from position m - 1 (bit 0) up to position 0
    (bit m - 1), so ascending indices follow lexicographic order.
    """
    shifts = np.arange(matrix.l, dtype=np.int64)
    columns = (matrix.rows.astype(np.int64) << shifts[:, None]).sum(axis=0)
    table = np.zeros(1 << matrix.m, dtype=np.int32)
    for b in range(matrix.m):
        half = 1 << b
        table[half:2 * half] = table[:half] ^ columns[matrix.m - 1 - b]
    return table


def _index_to_bits(index, m):
    return ((index >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def _posterior(weights, best_weight, m, prior):
    """Share of the Bernoulli(prior) likelihood held by one pattern of best_weight."""
    p = min(max(prior, PRIOR_CLIP), 1.0 - PRIOR_CLIP)
    log_likelihood = weights * math.log(p) + (m - weights) * math.log1p(-p)
    best = best_weight * math.log(p) + (m - best_weight) * math.log1p(-p)
    return float(math.exp(best - special.logsumexp(log_likelihood)))


def decode_syndrome(matrix, t, prior, table=None):
    """
    Maximum-likelihood error pattern e with e . M^T = t under an i.i.d.
    Bernoulli(prior) error model.

    Likelihood is monotone in the weight, so the winner is the lightest
    solution for prior < 1/2 and the heaviest for prior > 1/2; at exactly
    1/2 every solution ties. Ties go to the lexicographically smallest
    pattern and are counted in DecodeResult.ties.

    `table` may carry a precomputed syndrome table for matrix.
    """
    t = as_bits(t)
    if matrix.m > MAX_DECODE_BITS:
        raise DimensionMismatch(f"Exhaustive decoding is limited to {MAX_DECODE_BITS} bits, got m={matrix.m}")
    if len(t) != matrix.l:
        raise DimensionMismatch(f"Syndrome has {len(t)} bits, matrix has {matrix.l} rows")
    if not 0.0 <= prior <= 1.0:
        raise ValueError(f"prior must be a probability, got {prior!r}")

    if table is None:
        table = _syndrome_table(matrix)
    target = int((t.astype(np.int64) << np.arange(matrix.l, dtype=np.int64)).sum())
    solutions = np.flatnonzero(table == target)
    if solutions.size == 0:
        raise NoSolution(f"No {matrix.m}-bit pattern has syndrome {t.tolist()}")

    all_weights = _pattern_weights(matrix.m)[solutions].astype(np.int64)
    if prior < 0.5:
        solutions = solutions[all_weights == all_weights.min()]
    elif prior > 0.5:
        solutions = solutions[all_weights == all_weights.max()]
    best = int(solutions[0])
    weight = int(bin(best).count('1'))
    result = DecodeResult(
        _index_to_bits(best, matrix.m),
        weight,
        int(solutions.size),
        _posterior(all_weights, weight, matrix.m, prior),
    )
    if result.ambiguous:
        logger.debug(f"Decoding tie: {result.ties} patterns of weight {result.weight}")
    return result


class PrefixDecoder:
    """
    Decodes syndromes taken with the first l rows of one full-rank matrix,
    for growing l, from a single syndrome table.
    """

    def __init__(self, matrix):
        self.matrix = matrix
        self._table = _syndrome_table(matrix)

    def rows(self, start, stop):
        return ParityCheckMatrix(self.matrix.rows[start:stop], self.matrix.seed)

    def decode(self, t, prior):
        l = len(t)
        return decode_syndrome(self.matrix.prefix(l), t, prior, table=self._table & ((1 << l) - 1))


def universal_hash(spec, v):
    """Toeplitz hash: out_j = XOR_i D[j - i + in_len - 1] v_i."""
    v = as_bits(v)
    if len(v) != spec.in_len:
        raise DimensionMismatch(f"Hash expects {spec.in_len} bits, got {len(v)}")
    if spec.out_len == 0:
        return np.zeros(0, dtype=np.uint8)
    full = signal.convolve(spec.sequence.astype(np.int64), v.astype(np.int64))
    window = full[spec.in_len - 1:spec.in_len - 1 + spec.out_len]
    return (window % 2).astype(np.uint8)

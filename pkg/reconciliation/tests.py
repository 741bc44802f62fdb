"""
Tests for the reconciliation codec.

The exhaustive decoder is checked against a separate matrix-product
enumeration, and the rank routine against the known full-rank fraction of
random square matrices.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from rates.infomath import binary_entropy
from reconciliation.codec import (
    HashSpec,
    ParityCheckMatrix,
    PrefixDecoder,
    decode_syndrome,
    gf2_rank,
    otp_mask,
    random_invertible_matrix,
    random_parity_matrix,
    syndrome,
    universal_hash,
)
from reconciliation.exceptions import DimensionMismatch, NoSolution


def _random_bits(rng, n):
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def _all_patterns(m):
    """Every m-bit pattern, rows in lexicographic order."""
    index = np.arange(1 << m)
    return ((index[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def _brute_force_decode(matrix, t):
    patterns = _all_patterns(matrix.m)
    hits = patterns[np.all((patterns @ matrix.rows.T) % 2 == t, axis=1)]
    weights = hits.sum(axis=1)
    return hits[weights == weights.min()][0]


class SyndromeTests(SimpleTestCase):
    """Verify syndromes over GF(2)."""

    def test_identity_matrix_returns_the_block(self):
        v = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
        np.testing.assert_array_equal(syndrome(ParityCheckMatrix.identity(5), v), v)

    def test_zero_block_has_zero_syndrome(self):
        matrix = random_parity_matrix(6, 10, seed=1)
        np.testing.assert_array_equal(syndrome(matrix, np.zeros(10, dtype=np.uint8)), np.zeros(6))

    def test_syndrome_is_linear(self):
        rng = np.random.default_rng(8)
        matrix = random_parity_matrix(30, 64, seed=8)
        for _ in range(20):
            u, v = _random_bits(rng, 64), _random_bits(rng, 64)
            np.testing.assert_array_equal(
                syndrome(matrix, u ^ v),
                syndrome(matrix, u) ^ syndrome(matrix, v),
            )

    def test_wrong_block_length_is_rejected(self):
        with self.assertRaises(DimensionMismatch):
            syndrome(random_parity_matrix(2, 4, seed=0), np.zeros(5, dtype=np.uint8))


class MaskTests(SimpleTestCase):
    """Verify one-time-pad masking."""

    def test_zero_pad_leaves_parities_unchanged(self):
        t = np.array([1, 0, 1], dtype=np.uint8)
        np.testing.assert_array_equal(otp_mask(t, np.zeros(3, dtype=np.uint8)), t)

    def test_mask_with_itself_is_zero(self):
        t = np.array([1, 1, 0, 1], dtype=np.uint8)
        np.testing.assert_array_equal(otp_mask(t, t), np.zeros(4))

    def test_masking_twice_restores_the_parities(self):
        rng = np.random.default_rng(4)
        t, s = _random_bits(rng, 50), _random_bits(rng, 50)
        np.testing.assert_array_equal(otp_mask(otp_mask(t, s), s), t)

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            otp_mask(np.zeros(3, dtype=np.uint8), np.zeros(2, dtype=np.uint8))


class ParityMatrixTests(SimpleTestCase):
    """Verify seeded parity-check matrices and their ranks."""

    def test_empty_matrix(self):
        matrix = random_parity_matrix(0, 8, seed=3)
        self.assertEqual((matrix.l, matrix.m), (0, 8))
        self.assertEqual(len(syndrome(matrix, np.ones(8, dtype=np.uint8))), 0)

    def test_same_seed_same_matrix(self):
        np.testing.assert_array_equal(
            random_parity_matrix(5, 9, seed=77).rows,
            random_parity_matrix(5, 9, seed=77).rows,
        )

    def test_more_rows_than_columns_is_rejected(self):
        with self.assertRaises(DimensionMismatch):
            random_parity_matrix(5, 4, seed=0)

    def test_rank_of_known_matrices(self):
        self.assertEqual(gf2_rank(np.eye(6, dtype=np.uint8)), 6)
        self.assertEqual(gf2_rank([[1, 1, 0], [0, 1, 1], [1, 0, 1]]), 2)
        self.assertEqual(gf2_rank(np.zeros((3, 5), dtype=np.uint8)), 0)

    def test_full_rank_fraction_of_square_matrices(self):
        trials = 4000
        full = sum(gf2_rank(random_parity_matrix(12, 12, seed=s).rows) == 12 for s in range(trials))
        expected = math.prod(1 - 2.0 ** -i for i in range(1, 13))
        sigma = math.sqrt(expected * (1 - expected) / trials)
        self.assertLess(abs(full / trials - expected), 4 * sigma)

    def test_invertible_matrices_have_full_rank(self):
        for seed in range(20):
            matrix = random_invertible_matrix(10, seed)
            self.assertEqual(gf2_rank(matrix.rows), 10)
            self.assertEqual(matrix.seed, seed)
        np.testing.assert_array_equal(random_invertible_matrix(8, 5).rows, random_invertible_matrix(8, 5).rows)

    def test_prefix_keeps_leading_rows_and_seed(self):
        matrix = random_invertible_matrix(6, 9)
        prefix = matrix.prefix(4)
        self.assertEqual((prefix.l, prefix.m, prefix.seed), (4, 6, 9))
        np.testing.assert_array_equal(prefix.rows, matrix.rows[:4])


class DecodeTests(SimpleTestCase):
    """Verify maximum-likelihood syndrome decoding and its confidence."""

    def test_zero_syndrome_decodes_to_zero(self):
        matrix = random_parity_matrix(8, 12, seed=2)
        result = decode_syndrome(matrix, np.zeros(8, dtype=np.uint8), prior=0.1)
        np.testing.assert_array_equal(result.pattern, np.zeros(12))
        self.assertEqual(result.weight, 0)
        self.assertEqual(result.ties, 1)

    def test_identity_matrix_decodes_to_the_syndrome(self):
        t = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
        result = decode_syndrome(ParityCheckMatrix.identity(5), t, prior=0.2)
        np.testing.assert_array_equal(result.pattern, t)

    def test_ties_go_to_the_lexicographically_smallest_pattern(self):
        matrix = ParityCheckMatrix(np.array([[1, 1, 1]], dtype=np.uint8))
        result = decode_syndrome(matrix, np.array([1], dtype=np.uint8), prior=0.1)
        np.testing.assert_array_equal(result.pattern, [0, 0, 1])
        self.assertEqual(result.ties, 3)
        self.assertTrue(result.ambiguous)

    def test_high_prior_prefers_heavy_patterns(self):
        matrix = ParityCheckMatrix(np.array([[1, 1, 1]], dtype=np.uint8))
        result = decode_syndrome(matrix, np.array([1], dtype=np.uint8), prior=0.9)
        np.testing.assert_array_equal(result.pattern, [1, 1, 1])
        self.assertEqual(result.ties, 1)

    def test_unreachable_syndrome(self):
        matrix = ParityCheckMatrix(np.array([[1, 0], [1, 0]], dtype=np.uint8))
        with self.assertRaises(NoSolution):
            decode_syndrome(matrix, np.array([1, 0], dtype=np.uint8), prior=0.1)

    def test_oversized_block_is_rejected(self):
        matrix = random_parity_matrix(2, 25, seed=0)
        with self.assertRaises(DimensionMismatch):
            decode_syndrome(matrix, np.zeros(2, dtype=np.uint8), prior=0.1)

    def test_decoder_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(16)
        for trial in range(100):
            matrix = random_parity_matrix(12, 16, seed=trial)
            error = (rng.random(16) < 0.11).astype(np.uint8)
            t = syndrome(matrix, error)
            result = decode_syndrome(matrix, t, prior=0.11)
            np.testing.assert_array_equal(syndrome(matrix, result.pattern), t)
            np.testing.assert_array_equal(result.pattern, _brute_force_decode(matrix, t))

    def test_success_rate_with_redundancy_margin(self):
        m, prior = 20, 0.11
        l = math.ceil(1.15 * m * binary_entropy(prior)) + 4
        rng = np.random.default_rng(20)
        trials = 300
        successes = 0
        for trial in range(trials):
            matrix = random_parity_matrix(l, m, seed=1000 + trial)
            error = (rng.random(m) < prior).astype(np.uint8)
            result = decode_syndrome(matrix, syndrome(matrix, error), prior)
            successes += np.array_equal(result.pattern, error)
        self.assertGreater(successes / trials, 0.9)

    def test_confidence_of_tied_patterns(self):
        matrix = ParityCheckMatrix(np.array([[1, 1, 1]], dtype=np.uint8))
        p, q = 0.1, 0.9
        result = decode_syndrome(matrix, np.array([1], dtype=np.uint8), prior=p)
        self.assertAlmostEqual(result.confidence, p * q * q / (3 * p * q * q + p ** 3))
        fair = decode_syndrome(matrix, np.array([1], dtype=np.uint8), prior=0.5)
        self.assertEqual(fair.ties, 4)
        self.assertAlmostEqual(fair.confidence, 0.25)

    def test_unique_solution_is_certain(self):
        t = np.array([1, 0, 1], dtype=np.uint8)
        self.assertEqual(decode_syndrome(ParityCheckMatrix.identity(3), t, prior=0.0).confidence, 1.0)
        self.assertEqual(decode_syndrome(ParityCheckMatrix.identity(3), t, prior=0.3).confidence, 1.0)

    def test_prefix_decoder_matches_direct_decoding(self):
        rng = np.random.default_rng(12)
        matrix = random_invertible_matrix(12, seed=5)
        decoder = PrefixDecoder(matrix)
        for trial in range(20):
            error = (rng.random(12) < 0.1).astype(np.uint8)
            for l in (0, 4, 8, 12):
                t = syndrome(matrix.prefix(l), error)
                ours, direct = decoder.decode(t, 0.1), decode_syndrome(matrix.prefix(l), t, 0.1)
                np.testing.assert_array_equal(ours.pattern, direct.pattern)
                self.assertEqual(ours.ties, direct.ties)
                self.assertAlmostEqual(ours.confidence, direct.confidence)
            np.testing.assert_array_equal(decoder.decode(syndrome(matrix, error), 0.1).pattern, error)
        np.testing.assert_array_equal(decoder.rows(2, 5).rows, matrix.rows[2:5])

    def test_confidence_is_calibrated_under_the_true_prior(self):
        m, l, prior = 12, 8, 0.1
        rng = np.random.default_rng(31)
        trials = 400
        confidence, successes = 0.0, 0
        for trial in range(trials):
            matrix = random_parity_matrix(l, m, seed=500 + trial)
            error = (rng.random(m) < prior).astype(np.uint8)
            result = decode_syndrome(matrix, syndrome(matrix, error), prior)
            confidence += result.confidence
            successes += np.array_equal(result.pattern, error)
        self.assertLess(abs(confidence / trials - successes / trials), 0.06)


class UniversalHashTests(SimpleTestCase):
    """Verify Toeplitz hashing."""

    def test_all_zero_sequence_gives_zero_output(self):
        spec = HashSpec(0, 4, 6, np.zeros(9, dtype=np.uint8))
        np.testing.assert_array_equal(universal_hash(spec, np.ones(6, dtype=np.uint8)), np.zeros(4))

    def test_centred_single_one_is_the_identity(self):
        n = 7
        sequence = np.zeros(2 * n - 1, dtype=np.uint8)
        sequence[n - 1] = 1
        v = np.array([1, 0, 0, 1, 1, 0, 1], dtype=np.uint8)
        np.testing.assert_array_equal(universal_hash(HashSpec(0, n, n, sequence), v), v)

    def test_matches_explicit_toeplitz_product(self):
        spec = HashSpec.from_seed(12345, 5, 9)
        v = _random_bits(np.random.default_rng(1), 9)
        toeplitz = np.array([
            [spec.sequence[j - i + spec.in_len - 1] for i in range(spec.in_len)]
            for j in range(spec.out_len)
        ])
        np.testing.assert_array_equal(universal_hash(spec, v), (toeplitz @ v) % 2)

    def test_hash_is_linear(self):
        rng = np.random.default_rng(6)
        spec = HashSpec.from_seed(6, 300, 1000)
        u, v = _random_bits(rng, 1000), _random_bits(rng, 1000)
        np.testing.assert_array_equal(
            universal_hash(spec, u ^ v),
            universal_hash(spec, u) ^ universal_hash(spec, v),
        )

    def test_seeded_spec_is_deterministic(self):
        np.testing.assert_array_equal(
            HashSpec.from_seed(9, 10, 20).sequence,
            HashSpec.from_seed(9, 10, 20).sequence,
        )

    def test_output_longer_than_input_is_rejected(self):
        with self.assertRaises(DimensionMismatch):
            HashSpec.from_seed(1, 10, 5)

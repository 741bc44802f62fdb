"""
Tests for the rates app.

Analytic values are cross-checked against independent evaluations written
with the math module, and the B-step recursion against brute-force pair
enumeration.
"""
import itertools
import math
import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from rates import infomath, keyrates
from rates.constants import Variant
from rates.errormodel import (
    ErrorString,
    ObservedRates,
    PauliRates,
    bb84_worst_case_family,
    depolarizing,
    observed_from_pauli,
    pauli_from_observed,
    sample_errors,
    upper_error_bound,
)
from rates.exceptions import (
    Inconsistent,
    NegativeWeight,
    NoCrossing,
    NotNormalized,
    OutOfRange,
    ZeroTotal,
)
from rates.export import CURVE_HEADER, read_curve_csv


def _h(*weights):
    """Reference H[...] with plain logarithms."""
    total = sum(weights)
    return -sum(w / total * math.log2(w / total) for w in weights if w > 0)


def _random_channels(count, seed):
    rng = np.random.default_rng(seed)
    return [PauliRates.from_array(row) for row in rng.dirichlet(np.ones(4), size=count)]


class InfomathTests(SimpleTestCase):
    """Verify the entropy helpers against closed forms and their symmetries."""

    def test_uniform_distribution_has_log2_entropy(self):
        self.assertAlmostEqual(infomath.entropy([0.25] * 4), 2.0, places=12)

    def test_point_mass_has_zero_entropy(self):
        self.assertEqual(infomath.entropy([1.0, 0.0, 0.0, 0.0]), 0.0)

    def test_unnormalized_distribution_is_rejected(self):
        with self.assertRaises(NotNormalized):
            infomath.entropy([0.5, 0.4])

    def test_negative_weight_is_rejected(self):
        with self.assertRaises(NegativeWeight):
            infomath.normalized_entropy([1.0, -0.1])

    def test_normalized_entropy_rescales(self):
        self.assertAlmostEqual(infomath.normalized_entropy([3.0, 3.0]), 1.0, places=12)
        self.assertAlmostEqual(infomath.normalized_entropy([0.02, 0.06]), _h(0.02, 0.06), places=12)

    def test_zero_tuple_has_no_normalized_entropy(self):
        with self.assertRaises(ZeroTotal):
            infomath.normalized_entropy([0.0, 0.0])

    def test_binary_entropy(self):
        self.assertAlmostEqual(infomath.binary_entropy(0.5), 1.0, places=12)
        self.assertEqual(infomath.binary_entropy(0.0), 0.0)
        with self.assertRaises(OutOfRange):
            infomath.binary_entropy(1.5)

    def test_weighted_term_vanishes_on_zero_coefficient_or_zero_tuple(self):
        self.assertEqual(infomath.weighted_term(0.0, [0.3, 0.7]), 0.0)
        self.assertEqual(infomath.weighted_term(0.5, [0.0, 0.0]), 0.0)
        self.assertAlmostEqual(infomath.weighted_term(0.5, [1.0, 1.0]), 0.5, places=12)

    def test_entropy_rows_matches_scalar_and_guards_zero_rows(self):
        rows = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, 0.0], [2.0, 0.0, 2.0]])
        values = infomath.entropy_rows(rows)
        self.assertAlmostEqual(values[0], _h(0.1, 0.2, 0.3), places=12)
        self.assertEqual(values[1], 0.0)
        self.assertAlmostEqual(values[2], 1.0, places=12)

    def test_entropy_ignores_the_order_of_weights(self):
        rng = np.random.default_rng(7)
        for dist in rng.dirichlet(np.ones(4), size=10):
            expected = infomath.entropy(dist)
            for order in itertools.permutations(range(4)):
                self.assertAlmostEqual(infomath.entropy(dist[list(order)]), expected, places=12)

    def test_normalized_entropy_ignores_scale(self):
        rng = np.random.default_rng(8)
        for weights in rng.random((10, 5)):
            expected = infomath.normalized_entropy(weights)
            for c in (1e-3, 0.5, 7.0, 1e6):
                self.assertAlmostEqual(infomath.normalized_entropy(c * weights), expected, places=12)

    def test_entropy_is_at_most_log2_m_and_only_uniform_attains_it(self):
        rng = np.random.default_rng(9)
        for m in (2, 3, 4, 8):
            self.assertAlmostEqual(infomath.entropy(np.full(m, 1.0 / m)), math.log2(m), places=12)
            for dist in rng.dirichlet(np.ones(m), size=20):
                self.assertLess(infomath.entropy(dist), math.log2(m) - 1e-9)

    def test_binary_entropy_on_a_grid(self):
        for p in np.linspace(0.0, 1.0, 1001):
            p = float(p)
            value = infomath.binary_entropy(p)
            self.assertAlmostEqual(value, infomath.entropy((p, 1.0 - p)), places=12)
            self.assertAlmostEqual(value, _h(p, 1.0 - p), places=12)
            self.assertAlmostEqual(value, infomath.binary_entropy(1.0 - p), places=12)

    def test_normalized_entropy_golden_value(self):
        # h(0.03 / 0.94)
        self.assertAlmostEqual(infomath.normalized_entropy((0.91, 0.03)), 0.203906, places=6)
        self.assertAlmostEqual(infomath.normalized_entropy((0.91, 0.03)), _h(0.91, 0.03), places=12)


class ErrorModelTests(SimpleTestCase):
    """Verify channel parameterizations, sampling and error-rate bounds."""

    def test_pauli_rates_must_sum_to_one(self):
        with self.assertRaises(NotNormalized):
            PauliRates(0.5, 0.1, 0.1, 0.1)

    def test_pauli_rates_reject_negative_entries(self):
        with self.assertRaises(OutOfRange):
            PauliRates(1.2, -0.2, 0.0, 0.0)

    def test_depolarizing_channel(self):
        q = depolarizing(0.03)
        self.assertAlmostEqual(q.q_I, 0.91, places=12)
        self.assertAlmostEqual(q.bit_error_rate, 0.06, places=12)
        self.assertAlmostEqual(q.odd_parity_rate, 2 * 0.06 * 0.94, places=12)
        with self.assertRaises(OutOfRange):
            depolarizing(0.4)

    def test_observed_rates_invert_back_to_the_channel(self):
        q = PauliRates(0.85, 0.05, 0.03, 0.07)
        observed = observed_from_pauli(q)
        self.assertAlmostEqual(observed.p_Z, 0.08, places=12)
        self.assertAlmostEqual(observed.p_X, 0.10, places=12)
        self.assertAlmostEqual(observed.p_Y, 0.12, places=12)
        back = pauli_from_observed(observed)
        np.testing.assert_allclose(back.as_array(), q.as_array(), atol=1e-12)

    def test_inconsistent_observation_raises_unless_clipped(self):
        observed = ObservedRates(p_X=0.0, p_Y=0.0, p_Z=0.2)
        with self.assertRaises(Inconsistent):
            pauli_from_observed(observed)
        clipped = pauli_from_observed(observed, clip=True)
        self.assertTrue(np.all(clipped.as_array() >= 0))
        self.assertAlmostEqual(clipped.as_array().sum(), 1.0, places=12)

    def test_bb84_observation_needs_the_alpha_family(self):
        with self.assertRaises(Inconsistent):
            pauli_from_observed(ObservedRates(p_X=0.05, p_Y=None, p_Z=0.05))

    def test_worst_case_family_keeps_observed_rates(self):
        q = bb84_worst_case_family(0.06, 0.04, 0.01)
        self.assertAlmostEqual(q.q_X + q.q_Y, 0.06, places=12)
        self.assertAlmostEqual(q.q_Z + q.q_Y, 0.04, places=12)
        with self.assertRaises(OutOfRange):
            bb84_worst_case_family(0.06, 0.04, 0.05)

    def test_error_string_lengths_must_agree(self):
        with self.assertRaises(ValueError):
            ErrorString(np.zeros(3, dtype=np.uint8), np.zeros(4, dtype=np.uint8))

    def test_sampling_is_deterministic_per_seed(self):
        first = sample_errors(depolarizing(0.05), 1000, seed=11)
        second = sample_errors(depolarizing(0.05), 1000, seed=11)
        np.testing.assert_array_equal(first.bit_flags, second.bit_flags)
        np.testing.assert_array_equal(first.phase_flags, second.phase_flags)

    def test_sampled_frequencies_follow_the_channel(self):
        q = depolarizing(0.05)
        n = 100_000
        counts = sample_errors(q, n, seed=3).pauli_counts()
        for count, expected in zip(counts, q.as_array()):
            sigma = math.sqrt(n * expected * (1 - expected))
            self.assertLess(abs(count - n * expected), 4 * sigma)

    def test_observed_rates_round_trip_over_a_grid(self):
        steps = np.linspace(0.0, 0.3, 7)
        for q_X, q_Y, q_Z in itertools.product(steps, repeat=3):
            q = PauliRates.from_array((1.0 - q_X - q_Y - q_Z, q_X, q_Y, q_Z))
            back = pauli_from_observed(observed_from_pauli(q))
            np.testing.assert_allclose(back.as_array(), q.as_array(), atol=1e-12)

    def test_worst_case_family_keeps_observed_rates_for_every_alpha(self):
        p_Z, p_X = 0.06, 0.04
        for alpha in np.linspace(0.0, p_X, 7):
            observed = observed_from_pauli(bb84_worst_case_family(p_Z, p_X, float(alpha)))
            self.assertAlmostEqual(observed.p_Z, p_Z, places=12)
            self.assertAlmostEqual(observed.p_X, p_X, places=12)

    def test_pure_flip_channels_set_one_flag(self):
        bit_only = sample_errors(PauliRates(0.0, 1.0, 0.0, 0.0), 4, seed=1)
        np.testing.assert_array_equal(bit_only.bit_flags, [1, 1, 1, 1])
        np.testing.assert_array_equal(bit_only.phase_flags, [0, 0, 0, 0])
        phase_only = sample_errors(PauliRates(0.0, 0.0, 0.0, 1.0), 4, seed=1)
        np.testing.assert_array_equal(phase_only.bit_flags, [0, 0, 0, 0])
        np.testing.assert_array_equal(phase_only.phase_flags, [1, 1, 1, 1])

    def test_upper_error_bound(self):
        # No errors: 1 - (1 - level) ** (1 / n).
        self.assertAlmostEqual(upper_error_bound(0, 67, 0.95), 1.0 - 0.05 ** (1 / 67), places=10)
        self.assertGreater(upper_error_bound(4, 67, 0.95), 4 / 67)
        self.assertLess(upper_error_bound(40, 1000, 0.95), upper_error_bound(4, 100, 0.95))
        self.assertEqual(upper_error_bound(5, 5, 0.95), 1.0)
        for errors, trials, level in ((-1, 10, 0.9), (11, 10, 0.9), (0, 0, 0.9), (1, 10, 1.0)):
            with self.subTest(errors=errors, trials=trials, level=level), self.assertRaises(OutOfRange):
                upper_error_bound(errors, trials, level)


class OneWayAndProposedRateTests(SimpleTestCase):
    """Verify six-state one-way and OTP-assisted rates."""

    def test_noiseless_channel_gives_full_rate(self):
        noiseless = PauliRates(1.0, 0.0, 0.0, 0.0)
        self.assertEqual(keyrates.oneway_rate(noiseless), 1.0)
        self.assertEqual(keyrates.proposed_net_rate(noiseless), 1.0)

    def test_uniform_channel_gives_minus_one(self):
        self.assertAlmostEqual(keyrates.oneway_rate(PauliRates(0.25, 0.25, 0.25, 0.25)), -1.0, places=12)

    def test_proposed_rate_at_depolarizing_003(self):
        q = depolarizing(0.03)
        p_z = 0.06
        expected = (
            1 - _h(0.91, 0.03, 0.03, 0.03)
            + (2 * p_z * (1 - p_z) / 4) * (_h(0.91, 0.03) + _h(0.03, 0.03))
        )
        self.assertAlmostEqual(keyrates.proposed_net_rate(q), expected, places=12)

    def test_proposed_rate_dominates_oneway_on_random_channels(self):
        for q in _random_channels(10_000, seed=2024):
            gain = keyrates.proposed_net_rate(q) - keyrates.oneway_rate(q)
            self.assertGreaterEqual(gain, -1e-12)
            if (q.odd_parity_rate > 0.01
                    and _h(q.q_I, q.q_Z) > 0.01 and _h(q.q_X, q.q_Y) > 0.01):
                self.assertGreater(gain, 1e-6)

    def test_decomposition_of_noiseless_channel(self):
        parts = keyrates.proposed_net_rate_decomposed(PauliRates(1.0, 0.0, 0.0, 0.0), 1000)
        self.assertEqual(
            (parts.even_bits, parts.odd0_bits, parts.odd1_bits, parts.consumed_bits),
            (1000.0, 0.0, 0.0, 0.0),
        )

    def test_decomposition_sums_to_net_rate(self):
        n = 10_000
        for q in _random_channels(100, seed=5):
            parts = keyrates.proposed_net_rate_decomposed(q, n)
            self.assertLess(abs(parts.net_bits - n * keyrates.proposed_net_rate(q)), 1e-9 * n)

    def test_consumed_pad_is_half_block_parity_entropy(self):
        q = depolarizing(0.05)
        p_odd = 2 * 0.1 * 0.9
        parts = keyrates.proposed_net_rate_decomposed(q, 2000)
        self.assertAlmostEqual(parts.consumed_bits / 1000, _h(1 - p_odd, p_odd), places=12)

    def test_decomposition_needs_even_length(self):
        with self.assertRaises(OutOfRange):
            keyrates.proposed_net_rate_decomposed(depolarizing(0.01), 7)


class BB84RateTests(SimpleTestCase):
    """Verify the BB84 worst-case rates."""

    def test_noiseless(self):
        self.assertEqual(keyrates.bb84_proposed_net_rate(0.0, 0.0).rate, 1.0)
        self.assertEqual(keyrates.bb84_oneway_rate(0.0, 0.0), 1.0)

    def test_oneway_at_half_error(self):
        self.assertAlmostEqual(keyrates.bb84_oneway_rate(0.5, 0.0), 0.0, places=12)

    def test_out_of_range_rates_are_rejected(self):
        with self.assertRaises(OutOfRange):
            keyrates.bb84_oneway_rate(0.6, 0.1)

    def test_min_over_alpha_matches_oneway_identity(self):
        for p_z in np.linspace(0.0, 0.25, 50):
            for p_x in np.linspace(0.0, 0.25, 50):
                minimum = keyrates.bb84_min_oneway_rate(p_z, p_x)
                self.assertLess(abs(minimum.rate - keyrates.bb84_oneway_rate(p_z, p_x)), 1e-7)

    def test_optimizer_agrees_with_dense_alpha_scan(self):
        p = 0.05
        dense = min(
            keyrates.proposed_net_rate(bb84_worst_case_family(p, p, float(a)))
            for a in np.linspace(0.0, p, 5001)
        )
        found = keyrates.bb84_proposed_net_rate(p, p)
        self.assertLess(abs(found.rate - dense), 1e-7)
        self.assertTrue(0.0 <= found.alpha <= p)

    def test_worst_case_is_below_the_consistent_six_state_point(self):
        p = 0.05
        worst = keyrates.bb84_proposed_net_rate(p, p)
        self.assertLessEqual(worst.rate, keyrates.proposed_net_rate(depolarizing(p / 2)) + 1e-12)
        at_argmin = keyrates.proposed_net_rate(bb84_worst_case_family(p, p, worst.alpha))
        self.assertAlmostEqual(worst.rate, at_argmin, places=10)


class BStepTests(SimpleTestCase):
    """Verify the B-step recursion and rates."""

    def test_noiseless_fixed_point(self):
        outcome = keyrates.bstep(PauliRates(1.0, 0.0, 0.0, 0.0))
        self.assertEqual(outcome.survived, PauliRates(1.0, 0.0, 0.0, 0.0))
        self.assertEqual(outcome.survival_prob, 1.0)
        self.assertEqual(outcome.yield_factor, 0.5)

    def test_uniform_fixed_point(self):
        outcome = keyrates.bstep(PauliRates(0.25, 0.25, 0.25, 0.25))
        np.testing.assert_allclose(outcome.survived.as_array(), [0.25] * 4, atol=1e-15)
        self.assertEqual(outcome.survival_prob, 0.5)

    def test_recursion_matches_pair_enumeration(self):
        for q in _random_channels(1000, seed=99):
            closed = keyrates.bstep(q)
            brute = keyrates.bstep_by_enumeration(q)
            np.testing.assert_allclose(closed.survived.as_array(), brute.survived.as_array(), rtol=0, atol=1e-12)
            self.assertAlmostEqual(closed.survival_prob, brute.survival_prob, delta=1e-12)
            self.assertTrue(0.5 - 1e-12 <= closed.survival_prob <= 1.0)

    def test_no_steps_at_low_noise(self):
        q = depolarizing(0.01)
        best = keyrates.bstep_optimal_rate(q)
        self.assertEqual(best.step_count, 0)
        self.assertEqual(best.rate, keyrates.oneway_rate(q))

    def test_noiseless_optimum(self):
        best = keyrates.bstep_optimal_rate(PauliRates(1.0, 0.0, 0.0, 0.0))
        self.assertEqual((best.rate, best.step_count), (1.0, 0))

    def test_bsteps_take_over_near_the_oneway_crossing(self):
        q = depolarizing(0.062)
        best = keyrates.bstep_optimal_rate(q)
        self.assertGreaterEqual(best.step_count, 1)
        self.assertGreater(best.rate, max(0.0, keyrates.oneway_rate(q)))

    def test_negative_depth_is_rejected(self):
        with self.assertRaises(OutOfRange):
            keyrates.bstep_optimal_rate(depolarizing(0.01), max_steps=-1)

    def test_bb84_optimum_starts_with_no_steps(self):
        best = keyrates.bb84_bstep_optimal_rate(0.01, 0.01)
        self.assertEqual(best.step_count, 0)
        self.assertAlmostEqual(best.rate, keyrates.bb84_oneway_rate(0.01, 0.01), places=12)

    def test_proposed_beats_bsteps_at_low_noise(self):
        for p in (0.005, 0.01, 0.02):
            q = depolarizing(p)
            margin = keyrates.proposed_net_rate(q) - keyrates.bstep_optimal_rate(q).rate
            self.assertGreater(margin, 1e-4)
        for p in (0.01, 0.02, 0.04):
            margin = keyrates.bb84_proposed_net_rate(p, p).rate - keyrates.bb84_bstep_optimal_rate(p, p).rate
            self.assertGreater(margin, 1e-4)


class CurveAndCrossingTests(SimpleTestCase):
    """Verify rate curves and tolerable error rates."""

    def test_every_variant_is_exact_at_zero_noise(self):
        for variant in Variant:
            self.assertEqual(keyrates.evaluate(variant, 0.0).rate, 1.0, variant)

    def test_six_state_proposed_curve_has_one_sign_change(self):
        curve = keyrates.rate_curve(Variant.SIX_STATE_PROPOSED, 0.0, 0.16, 161)
        rates = [point.rate for point in curve]
        self.assertEqual(len(curve), 161)
        self.assertEqual(rates[0], 1.0)
        changes = sum(1 for a, b in zip(rates, rates[1:]) if (a > 0) != (b > 0))
        self.assertEqual(changes, 1)
        self.assertTrue(all(point.rate_clamped >= 0 for point in curve))

    def test_proposed_curve_dominates_oneway_curve(self):
        proposed = keyrates.rate_curve(Variant.SIX_STATE_PROPOSED, 0.0, 0.16, 161)
        oneway = keyrates.rate_curve(Variant.SIX_STATE_ONE_WAY, 0.0, 0.16, 161)
        for a, b in zip(proposed, oneway):
            self.assertGreaterEqual(a.rate, b.rate - 1e-12)

    def test_curve_arguments_are_checked(self):
        with self.assertRaises(OutOfRange):
            keyrates.rate_curve(Variant.SIX_STATE_ONE_WAY, 0.1, 0.05, 10)
        with self.assertRaises(OutOfRange):
            keyrates.rate_curve(Variant.SIX_STATE_ONE_WAY, 0.0, 0.1, 1)
        with self.assertRaises(OutOfRange):
            keyrates.rate_curve(Variant.BB84_ONE_WAY, 0.0, 0.7, 10)

    def test_tolerable_error_rates(self):
        bb84 = keyrates.find_crossing(Variant.BB84_ONE_WAY, scan_points=200)
        six_state = keyrates.find_crossing(Variant.SIX_STATE_ONE_WAY, scan_points=200)
        self.assertAlmostEqual(bb84, 0.110028, delta=1e-4)
        self.assertAlmostEqual(six_state, 0.1262, delta=1e-3)
        proposed = keyrates.find_crossing(Variant.SIX_STATE_PROPOSED, scan_points=200)
        self.assertGreater(proposed, six_state)

    def test_crossing_of_depolarizing_oneway_matches_direct_bisection(self):
        lo, hi = 0.05, 0.07
        while hi - lo > 1e-9:
            mid = (lo + hi) / 2
            if 1 - _h(1 - 3 * mid, mid, mid, mid) > 0:
                lo = mid
            else:
                hi = mid
        crossing = keyrates.find_crossing(Variant.SIX_STATE_ONE_WAY, scan_points=200)
        self.assertAlmostEqual(crossing, 2 * lo, delta=1e-6)

    def test_missing_sign_change_raises(self):
        with self.assertRaises(NoCrossing):
            keyrates.find_crossing(Variant.BB84_ONE_WAY, 0.0, 0.05, scan_points=20)


class RatesCommandTests(SimpleTestCase):
    """Verify the rates and crossings commands."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _path(self, name):
        return os.path.join(self.tmp.name, name)

    def _run(self, command, **options):
        out = StringIO()
        call_command(command, stdout=out, **options)
        return out.getvalue()

    def test_six_state_curves(self):
        path = self._path('six.csv')
        self._run('rates', protocol='six-state', variants='oneway,proposed,bstep',
                  p_start=0.0, p_end=0.16, steps=161, out=path)
        with open(path, newline='') as handle:
            header = handle.readline().strip()
            handle.seek(0)
            rows = read_curve_csv(handle)
        self.assertEqual(header, ','.join(CURVE_HEADER))
        self.assertEqual(len(rows), 483)
        first = [row for row in rows if row['param'] == 0.0]
        self.assertEqual(len(first), 3)
        self.assertTrue(all(row['rate_raw'] == 1.0 for row in first))
        self.assertTrue(all(row['rate_clamped'] == max(0.0, row['rate_raw']) for row in rows))

    def test_rows_round_trip_at_fifteen_digits(self):
        path = self._path('bb84.csv')
        self._run('rates', protocol='bb84', variants='proposed', p_end=0.12, steps=13, out=path)
        curve = keyrates.rate_curve(Variant.BB84_PROPOSED, 0.0, 0.12, 13)
        with open(path, newline='') as handle:
            rows = read_curve_csv(handle)
        for row, point in zip(rows, curve):
            self.assertEqual(row['rate_raw'], float(format(point.rate, '.15g')))
            self.assertEqual(row['alpha_star'], float(format(point.alpha_star, '.15g')))

    def test_repeated_runs_are_byte_identical(self):
        outputs = []
        for name in ('a.csv', 'b.csv'):
            path = self._path(name)
            self._run('rates', protocol='bb84', steps=21, out=path)
            with open(path, 'rb') as handle:
                outputs.append(handle.read())
        self.assertEqual(outputs[0], outputs[1])

    def test_config_file_supplies_defaults_and_flags_override(self):
        config = self._path('rates.ini')
        path = self._path('cfg.csv')
        with open(config, 'w') as handle:
            handle.write(f"[settings]\nprotocol = bb84\nvariants = oneway\nsteps = 7\nout = {path}\n")
        self._run('rates', config=config, steps=4)
        with open(path, newline='') as handle:
            rows = read_curve_csv(handle)
        self.assertEqual(len(rows), 4)
        self.assertEqual({row['variant'] for row in rows}, {'bb84-oneway'})

    def test_invalid_flags_exit_2(self):
        with self.assertRaises(CommandError) as ctx:
            self._run('rates', steps=1, out=self._path('x.csv'))
        self.assertEqual(ctx.exception.returncode, 2)
        with self.assertRaises(CommandError) as ctx:
            self._run('rates', variants='twoway', out=self._path('x.csv'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unwritable_output_exits_3(self):
        with self.assertRaises(CommandError) as ctx:
            self._run('rates', steps=3, out=os.path.join(self.tmp.name, 'missing', 'x.csv'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_crossings_prints_six_decimals(self):
        output = self._run('crossings', protocol='bb84', variant='oneway', scan_points=200)
        variant, value = output.split()
        self.assertEqual(variant, 'bb84-oneway')
        self.assertEqual(len(value.split('.')[1]), 6)
        self.assertAlmostEqual(float(value), 0.110028, delta=1e-4)

    def test_crossings_without_sign_change_exit_5(self):
        with self.assertRaises(CommandError) as ctx:
            self._run('crossings', protocol='six-state', variant='oneway', p_end=0.05, scan_points=20)
        self.assertEqual(ctx.exception.returncode, 5)

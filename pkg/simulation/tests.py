"""
Tests for the protocol simulator.

Monte Carlo statistics are checked against the analytic formulas in
rates.keyrates, with fixed seeds so every run draws the same samples.
"""
import csv
import json
import math
import os
import tempfile
from dataclasses import replace
from io import StringIO
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from rates import keyrates
from rates.constants import Protocol
from rates.errormodel import PauliRates, depolarizing
from rates.infomath import binary_entropy
from simulation.constants import Direction, MessageKind, ReconciliationMode
from simulation.exceptions import ConfigError, QueuedTrialFailed
from simulation.protocol import (
    OneTimePad,
    SessionConfig,
    Transcript,
    batch,
    execute_session,
    run_bstep_session,
    run_session,
    run_trials,
    summarize,
)
from simulation.reports import AGGREGATE_RECORD, REPORT_HEADER, report_line, write_csv, write_json_lines
from simulation.tasks import queue_batch

NOISELESS = PauliRates.from_array((1.0, 0.0, 0.0, 0.0))


def six_state(channel, n_signals, **kwargs):
    return SessionConfig(protocol=Protocol.SIX_STATE, channel=channel, n_signals=n_signals, **kwargs)


class SessionConfigTests(SimpleTestCase):
    """Verify unset tunables resolve from settings and bad configs are rejected."""

    def test_unset_tunables_come_from_settings(self):
        cfg = six_state(NOISELESS, 1000).resolved()
        self.assertEqual(cfg.test_fraction, 0.1)
        self.assertEqual(cfg.block_size, 20)
        self.assertEqual(cfg.slack, 4)
        self.assertEqual(cfg.redundancy_factor, 1.0)
        explicit = six_state(NOISELESS, 1000, mode=ReconciliationMode.EXPLICIT).resolved()
        self.assertEqual(explicit.redundancy_factor, 1.15)
        self.assertEqual(explicit.decode_confidence, 0.9999)

    def test_raw_key_is_even(self):
        cfg = six_state(NOISELESS, 1002, test_fraction=0.1).resolved()
        self.assertEqual(cfg.test_bits, 100)
        self.assertEqual(cfg.raw_key_bits, 902)
        cfg = six_state(NOISELESS, 1000, test_fraction=0.101).resolved()
        self.assertEqual(cfg.raw_key_bits % 2, 0)

    def test_invalid_configs(self):
        bad = [
            six_state(NOISELESS, 1001),
            six_state(NOISELESS, 0),
            six_state(NOISELESS, 1000, test_fraction=1.0),
            six_state(NOISELESS, 1000, test_fraction=0.0),
            six_state(NOISELESS, 4, test_fraction=0.5),
            six_state(NOISELESS, 1000, mode=ReconciliationMode.EXPLICIT, block_size=25),
            six_state(NOISELESS, 1000, redundancy_factor=0.0),
            six_state(NOISELESS, 1000, slack=-1),
            six_state(NOISELESS, 1000, decode_confidence=1.0),
            six_state(NOISELESS, 1000, decode_confidence=-0.5),
            six_state(NOISELESS, 1000, seed=-3),
            six_state(NOISELESS, 1000, mode='lossy'),
            six_state((1.0, 0.0, 0.0, 0.0), 1000),
            SessionConfig(protocol='b92', channel=NOISELESS, n_signals=1000),
        ]
        for cfg in bad:
            with self.subTest(cfg=cfg), self.assertRaises(ConfigError):
                run_session(cfg)

    def test_paths_check_bstep_count(self):
        with self.assertRaises(ConfigError):
            run_session(six_state(NOISELESS, 1000, bstep_count=1))
        with self.assertRaises(ConfigError):
            run_bstep_session(six_state(NOISELESS, 1000))


class TranscriptTests(SimpleTestCase):
    """Verify transcript encoding and the parity masking audit."""

    def test_message_hex_and_size(self):
        transcript = Transcript()
        message = transcript.send(Direction.ALICE_TO_BOB, MessageKind.FIRST_BITS, [1, 0, 1, 1, 0, 0, 0, 0, 1])
        self.assertEqual(message.hex(), 'b080')
        self.assertEqual(message.byte_size, 2)
        self.assertEqual(transcript.byte_size, 2)

    def test_seeds_print_as_decimal(self):
        transcript = Transcript()
        transcript.send_seed(Direction.ALICE_TO_BOB, MessageKind.HASH_SEED, 1234567890123)
        self.assertEqual(transcript.hex_dump(), '000000 A->B hash-seed 64 1234567890123\n')
        self.assertEqual(transcript.byte_size, 8)

    def test_masked_parities_pass_the_audit(self):
        pad = OneTimePad(np.random.default_rng(0))
        transcript = Transcript()
        for parities in ([1, 1, 0, 1], [0, 1, 1]):
            offset, bits = pad.draw(len(parities))
            transcript.send(
                Direction.ALICE_TO_BOB, MessageKind.PARITY, np.bitwise_xor(parities, bits),
                pad_offset=offset, unmasked=parities,
            )
        self.assertEqual(transcript.masking_violations(pad), [])
        self.assertEqual(pad.consumed, 7)

    def test_audit_flags_unmasked_reused_and_misdirected_parities(self):
        pad = OneTimePad(np.random.default_rng(1))
        parities = np.array([1, 0, 1, 1], dtype=np.uint8)
        offset, bits = pad.draw(4)
        transcript = Transcript()
        transcript.send(Direction.ALICE_TO_BOB, MessageKind.PARITY, parities ^ bits, pad_offset=offset, unmasked=parities)
        transcript.send(Direction.ALICE_TO_BOB, MessageKind.PARITY, parities ^ bits, pad_offset=offset, unmasked=parities)
        transcript.send(Direction.ALICE_TO_BOB, MessageKind.PARITY, parities)
        transcript.send(Direction.BOB_TO_ALICE, MessageKind.PARITY, parities, pad_offset=0, unmasked=parities)
        problems = transcript.masking_violations(pad)
        self.assertEqual(len(problems), 3)
        self.assertIn('reused', problems[0])
        self.assertIn('without a pad', problems[1])
        self.assertIn('B->A', problems[2])

    def test_audit_flags_parities_that_do_not_match_the_pad(self):
        pad = OneTimePad(np.random.default_rng(2))
        parities = np.array([1, 1, 1], dtype=np.uint8)
        offset, bits = pad.draw(3)
        tampered = parities ^ bits ^ np.array([1, 0, 0], dtype=np.uint8)
        transcript = Transcript()
        transcript.send(Direction.ALICE_TO_BOB, MessageKind.PARITY, tampered, pad_offset=offset, unmasked=parities)
        [problem] = transcript.masking_violations(pad)
        self.assertIn('not the parities XOR the pad', problem)


class ProposedSessionTests(SimpleTestCase):
    """Verify OTP-assisted sessions against the analytic rates in both reconciliation modes."""

    def test_noiseless_channel(self):
        report = run_session(six_state(NOISELESS, 10_000, seed=1))
        self.assertFalse(report.aborted)
        self.assertTrue(report.keys_match)
        self.assertEqual(report.ledger.otp_consumed, 4)
        self.assertEqual(report.blocks_odd, 0)
        self.assertEqual(report.blocks_even, report.raw_key_bits // 2)
        self.assertGreaterEqual(report.empirical_net_rate, 0.95)
        self.assertLessEqual(report.empirical_net_rate, 1.0)

    def test_same_seed_same_session(self):
        cfg = six_state(depolarizing(0.03), 2000, seed=11, mode=ReconciliationMode.EXPLICIT)
        first, second = execute_session(cfg), execute_session(cfg)
        self.assertEqual(first.report, second.report)
        self.assertEqual(first.transcript.hex_dump(), second.transcript.hex_dump())
        np.testing.assert_array_equal(first.alice_key, second.alice_key)
        other = execute_session(replace(cfg, trial=1))
        self.assertNotEqual(first.transcript.hex_dump(), other.transcript.hex_dump())

    def test_block_counts_add_up(self):
        report = run_session(six_state(depolarizing(0.04), 20_000, seed=5))
        self.assertEqual(report.blocks_even + report.blocks_odd, report.raw_key_bits // 2)
        self.assertEqual(report.odd0_count + report.odd1_count, report.blocks_odd)
        self.assertEqual(report.ledger.net, report.ledger.final_total - report.ledger.otp_consumed)

    def test_every_parity_message_is_masked(self):
        for mode in ReconciliationMode.values:
            outcome = execute_session(six_state(depolarizing(0.03), 3000, seed=3, mode=mode))
            self.assertTrue(outcome.report.parities_masked)
            parity_messages = outcome.transcript.of_kind(MessageKind.PARITY)
            self.assertTrue(parity_messages)
            self.assertTrue(all(m.direction == Direction.ALICE_TO_BOB for m in parity_messages))
            self.assertEqual(sum(len(m.bits) for m in parity_messages), outcome.report.ledger.otp_consumed)

    def test_high_noise_aborts(self):
        outcome = execute_session(six_state(depolarizing(0.2), 4000, seed=2))
        report = outcome.report
        self.assertTrue(report.aborted)
        self.assertLessEqual(report.analytic_rate, 0.0)
        self.assertEqual(report.ledger.net, 0)
        self.assertEqual(report.empirical_net_rate, 0.0)
        self.assertTrue(report.keys_match)
        self.assertEqual(outcome.transcript.of_kind(MessageKind.PARITY), [])

    def test_bb84_session(self):
        cfg = SessionConfig(protocol=Protocol.BB84, channel=depolarizing(0.02), n_signals=20_000, seed=8)
        report = run_session(cfg)
        self.assertIsNone(report.observed.p_Y)
        self.assertFalse(report.aborted)
        self.assertTrue(report.keys_match)
        self.assertGreater(report.empirical_net_rate, 0.0)

    def test_ideal_mode_matches_analytic_rate(self):
        # Six-state, depolarizing p = 0.03, 20 trials of 2e5 signals.
        q = depolarizing(0.03)
        cfg = six_state(q, 200_000, seed=2024, test_fraction=0.5)
        reports = [outcome.report for outcome in run_trials(cfg, 20)]
        summary = summarize(cfg, reports)
        self.assertTrue(summary.all_keys_match)
        self.assertAlmostEqual(summary.mean, keyrates.proposed_net_rate(q), delta=0.01)

        blocks = sum(r.blocks_even + r.blocks_odd for r in reports)
        odd = sum(r.blocks_odd for r in reports)
        p_odd = q.odd_parity_rate
        self.assertAlmostEqual(p_odd, 2 * 0.06 * 0.94)
        self.assertLess(abs(odd / blocks - p_odd), 3 * math.sqrt(p_odd * (1 - p_odd) / blocks))

        odd0 = sum(r.odd0_count for r in reports)
        self.assertLess(abs(odd0 / odd - 0.5), 3 * math.sqrt(0.25 / odd))

        for r in reports:
            pairs = r.blocks_even + r.blocks_odd
            h = binary_entropy(r.blocks_odd / pairs)
            ratio = r.ledger.otp_consumed / pairs
            self.assertGreaterEqual(ratio, h)
            self.assertLessEqual(ratio, 1.2 * h + 10 / r.n_signals)

    def test_explicit_mode_keys_match_at_default_settings(self):
        cfg = six_state(depolarizing(0.03), 2000, seed=77, mode=ReconciliationMode.EXPLICIT)
        reports = [outcome.report for outcome in run_trials(cfg, 200)]
        live = [r for r in reports if not r.aborted]
        self.assertGreaterEqual(len(live), 150)
        self.assertGreaterEqual(sum(r.keys_match for r in live) / len(live), 0.95)
        for r in live:
            self.assertEqual(r.keys_match, r.decode_failures == 0)

    def test_bb84_explicit_mode_keys_match_at_default_settings(self):
        cfg = SessionConfig(
            protocol=Protocol.BB84, channel=depolarizing(0.03), n_signals=2000, seed=78,
            mode=ReconciliationMode.EXPLICIT,
        )
        reports = [outcome.report for outcome in run_trials(cfg, 50)]
        live = [r for r in reports if not r.aborted]
        self.assertGreaterEqual(len(live), 30)
        self.assertGreaterEqual(sum(r.keys_match for r in live) / len(live), 0.95)

    def test_short_budgets_are_topped_up_on_request(self):
        outcome = execute_session(six_state(
            depolarizing(0.03), 2000, seed=4, test_fraction=0.5,
            mode=ReconciliationMode.EXPLICIT, redundancy_factor=0.1, slack=0,
        ))
        report = outcome.report
        self.assertTrue(report.keys_match)
        self.assertEqual(report.decode_failures, 0)
        self.assertTrue(report.parities_masked)
        requests = outcome.transcript.of_kind(MessageKind.PARITY_REQUEST)
        self.assertTrue(requests)
        self.assertTrue(all(m.direction == Direction.BOB_TO_ALICE for m in requests))
        self.assertTrue(all(len(m.bits) == 8 for m in requests))

    def test_explicit_decoding_failures_surface(self):
        cfg = six_state(
            depolarizing(0.03), 2000, seed=4, test_fraction=0.5,
            mode=ReconciliationMode.EXPLICIT, redundancy_factor=0.1, slack=0, decode_confidence=0.0,
        )
        outcome = execute_session(cfg)
        self.assertGreater(outcome.report.decode_failures, 0)
        self.assertFalse(outcome.report.keys_match)
        self.assertEqual(outcome.transcript.of_kind(MessageKind.PARITY_REQUEST), [])

    def test_noiseless_explicit_mode(self):
        report = run_session(six_state(NOISELESS, 2000, seed=6, mode=ReconciliationMode.EXPLICIT))
        self.assertTrue(report.keys_match)
        self.assertEqual(report.decode_failures, 0)


class BStepSessionTests(SimpleTestCase):
    """Verify B-step sessions keep the expected survivors and matching keys."""

    def test_noiseless_channel_keeps_half(self):
        report = run_bstep_session(six_state(NOISELESS, 10_000, seed=1, bstep_count=1))
        self.assertTrue(report.keys_match)
        self.assertEqual(report.survivors, report.raw_key_bits // 2)
        self.assertEqual(report.ledger.otp_consumed, 0)
        self.assertAlmostEqual(report.analytic_rate, 0.5)

    def test_survivors_follow_the_bstep_recursion(self):
        q = depolarizing(0.06)
        report = run_bstep_session(six_state(q, 200_000, seed=9, bstep_count=1))
        self.assertFalse(report.aborted)
        self.assertTrue(report.keys_match)

        outcome = keyrates.bstep(q)
        survivors = report.survivors
        for count, expected in zip(report.survivor_pauli_counts, outcome.survived.as_array()):
            sigma = math.sqrt(expected * (1 - expected) / survivors)
            self.assertLess(abs(count / survivors - expected), 3 * sigma)

        pairs = report.raw_key_bits // 2
        s = outcome.survival_prob
        self.assertLess(abs(survivors / pairs - s), 3 * math.sqrt(s * (1 - s) / pairs))

    def test_two_steps(self):
        report = run_bstep_session(six_state(depolarizing(0.05), 40_000, seed=10, bstep_count=2))
        self.assertTrue(report.keys_match)
        self.assertEqual(sum(report.survivor_pauli_counts), report.survivors)
        self.assertLess(report.survivors, report.raw_key_bits // 4 + 1)

    def test_bb84_bstep_session(self):
        cfg = SessionConfig(
            protocol=Protocol.BB84, channel=depolarizing(0.02), n_signals=20_000, seed=12, bstep_count=1,
        )
        report = run_bstep_session(cfg)
        self.assertFalse(report.aborted)
        self.assertTrue(report.keys_match)


class BatchTests(SimpleTestCase):
    """Verify batches aggregate trials and keep outcomes in trial order."""

    def test_single_trial_batch_equals_run_session(self):
        cfg = six_state(depolarizing(0.02), 10_000, seed=21)
        [summary] = batch([cfg], 1)
        self.assertEqual(summary.reports[0], run_session(cfg))
        self.assertEqual(summary.stddev, 0.0)

    def test_zero_trials_is_rejected(self):
        with self.assertRaises(ConfigError):
            batch([six_state(NOISELESS, 1000)], 0)

    def test_batch_keeps_outcomes_in_trial_order(self):
        cfg = six_state(depolarizing(0.02), 2000, seed=22)
        [summary] = batch([cfg], 3)
        self.assertEqual([o.report.trial for o in summary.outcomes], [0, 1, 2])
        self.assertEqual(tuple(o.report for o in summary.outcomes), summary.reports)
        self.assertEqual(summary, summarize(cfg, summary.reports))

    def test_batch_takes_a_runner(self):
        cfg = six_state(NOISELESS, 1000, seed=23)
        calls = []

        def runner(cfg, trials):
            calls.append(trials)
            return list(reversed(run_trials(cfg, trials)))

        [summary] = batch([cfg], 2, runner)
        self.assertEqual(calls, [2])
        self.assertEqual([r.trial for r in summary.reports], [0, 1])

    def test_standard_error_shrinks_with_trials(self):
        cfg = six_state(depolarizing(0.02), 4000, seed=31)
        errors = [summary.stderr for summary in (
            summarize(cfg, [o.report for o in run_trials(replace(cfg, seed=31 + k), trials)])
            for k, trials in enumerate((10, 40, 160))
        )]
        self.assertGreater(errors[0], errors[1])
        self.assertGreater(errors[1], errors[2])
        self.assertTrue(2.0 < errors[0] / errors[2] < 8.0)

    def test_depolarizing_sweep_beats_oneway(self):
        cfgs = [
            six_state(depolarizing(p), 100_000, seed=41, test_fraction=0.5)
            for p in (0.01, 0.02, 0.03, 0.04, 0.05)
        ]
        for cfg, summary in zip(cfgs, batch(cfgs, 10)):
            self.assertTrue(summary.all_keys_match)
            self.assertGreater(summary.mean, keyrates.oneway_rate(cfg.channel))


class ReportFormatTests(SimpleTestCase):
    """Verify CSV, JSON-lines and log-line reports."""

    def setUp(self):
        self.cfg = SessionConfig(protocol=Protocol.BB84, channel=depolarizing(0.02), n_signals=4000, seed=5)
        self.summary = summarize(self.cfg, [o.report for o in run_trials(self.cfg, 3)])

    def test_csv_has_trial_rows_and_aggregate(self):
        handle = StringIO()
        self.assertEqual(write_csv(handle, self.summary), 4)
        handle.seek(0)
        rows = list(csv.DictReader(handle))
        self.assertEqual(tuple(rows[0].keys()), REPORT_HEADER)
        self.assertEqual([row['trial'] for row in rows[:3]], ['0', '1', '2'])
        self.assertEqual(rows[3]['record'], AGGREGATE_RECORD)
        self.assertEqual(float(rows[3]['rate_mean']), float(format(self.summary.mean, '.15g')))
        self.assertEqual(rows[0]['observed_p_y'], '')

    def test_json_lines_are_typed(self):
        handle = StringIO()
        write_json_lines(handle, self.summary)
        records = [json.loads(line) for line in handle.getvalue().splitlines()]
        self.assertEqual(len(records), 4)
        self.assertIsNone(records[0]['observed_p_y'])
        self.assertIs(records[0]['keys_match'], True)
        self.assertEqual(records[-1]['trials'], 3)

    def test_report_line(self):
        line = report_line(self.summary.reports[0])
        self.assertIn('protocol=bb84', line)
        self.assertIn('keys_match=true', line)
        self.assertIn('trial=0', line)


@mock.patch('django_q.conf.Conf.SYNC', True)
class QueuedBatchTests(TestCase):
    """Verify django_q batches give the in-process results and surface failures."""

    def test_queued_trials_match_in_process_trials(self):
        cfg = six_state(depolarizing(0.02), 4000, seed=51)
        queued = queue_batch(cfg, 3, sync=True, wait=5000)
        self.assertEqual([o.report.trial for o in queued], [0, 1, 2])
        self.assertEqual([o.report for o in queued], [o.report for o in run_trials(cfg, 3)])

    def test_failed_task_raises(self):
        failed = mock.Mock(success=False, result='Traceback: boom')
        with mock.patch('simulation.tasks.async_task'), \
                mock.patch('simulation.tasks.fetch_group', return_value=[failed]):
            with self.assertRaises(QueuedTrialFailed):
                queue_batch(six_state(NOISELESS, 1000), 1)

    def test_missing_results_raise(self):
        with mock.patch('simulation.tasks.async_task'), \
                mock.patch('simulation.tasks.fetch_group', return_value=None):
            with self.assertRaises(QueuedTrialFailed):
                queue_batch(six_state(NOISELESS, 1000), 2, wait=10)


class SimulateCommandTests(TestCase):
    """Verify the simulate command's outputs and exit codes."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _path(self, name):
        return os.path.join(self.tmp.name, name)

    def _run(self, **options):
        out = StringIO()
        call_command('simulate', stdout=out, **options)
        return out.getvalue()

    def _rows(self, path):
        with open(path, newline='') as handle:
            return list(csv.DictReader(handle))

    def test_noiseless_run(self):
        path = self._path('noiseless.csv')
        stdout = self._run(p=0.0, n=10_000, trials=3, seed=1, out=path)
        self.assertIn('seed=1', stdout)
        mean = float(next(line for line in stdout.splitlines() if line.startswith('net_rate_mean=')).split('=')[1])
        self.assertGreaterEqual(mean, 0.95)
        rows = self._rows(path)
        self.assertEqual(len(rows), 4)
        self.assertTrue(all(row['keys_match'] == 'true' for row in rows))

    def test_same_seed_gives_identical_files(self):
        outputs = []
        for name in ('a.csv', 'b.csv'):
            path = self._path(name)
            self._run(p=0.02, n=4000, trials=2, seed=42, out=path)
            with open(path, 'rb') as handle:
                outputs.append(handle.read())
        self.assertEqual(outputs[0], outputs[1])

    def test_missing_seed_is_generated_and_echoed(self):
        stdout = self._run(p=0.0, n=1000, out=self._path('fresh.csv'))
        seed = int(stdout.splitlines()[0].split('=')[1])
        self.assertEqual(self._rows(self._path('fresh.csv'))[0]['seed'], str(seed))

    def test_pauli_rates_and_json_lines(self):
        path = self._path('run.jsonl')
        self._run(protocol='bb84', qx=0.02, qy=0.0, qz=0.02, n=4000, seed=3, format='json-lines', out=path)
        with open(path) as handle:
            records = [json.loads(line) for line in handle]
        self.assertEqual(records[-1]['record'], AGGREGATE_RECORD)
        self.assertEqual(records[0]['protocol'], 'bb84')

    def test_transcripts_are_written_per_trial(self):
        directory = self._path('transcripts')
        self._run(p=0.03, n=2000, trials=2, seed=8, out=self._path('t.csv'), transcripts=directory)
        self.assertEqual(sorted(os.listdir(directory)), ['trial-0000.hex', 'trial-0001.hex'])
        with open(os.path.join(directory, 'trial-0000.hex')) as handle:
            first = handle.readline().split()
        self.assertEqual(first[:3], ['000000', 'A->B', 'test-reveal'])

    def test_config_file_supplies_defaults(self):
        config = self._path('simulate.ini')
        path = self._path('cfg.csv')
        with open(config, 'w') as handle:
            handle.write(f"[settings]\np = 0.0\nn = 2000\nseed = 7\ntrials = 2\nout = {path}\n")
        self._run(config=config, trials=1)
        rows = self._rows(path)
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[0]['n_signals'], '2000')
        self.assertEqual(rows[0]['seed'], '7')

    def test_queue_flag_runs_on_the_cluster(self):
        path = self._path('queued.csv')
        with mock.patch('django_q.conf.Conf.SYNC', True), mock.patch(
            'simulation.management.commands.simulate.queue_batch',
            side_effect=lambda cfg, trials: queue_batch(cfg, trials, sync=True, wait=5000),
        ) as queued:
            self._run(p=0.0, n=2000, trials=2, seed=9, queue=True, out=path)
        queued.assert_called_once()
        self.assertEqual(len(self._rows(path)), 3)

    def test_invalid_flags_exit_2(self):
        cases = [
            dict(p=0.01, qx=0.01, out=self._path('x.csv')),
            dict(qx=0.01, out=self._path('x.csv')),
            dict(p=0.5, out=self._path('x.csv')),
            dict(p=0.01),
            dict(p=0.01, n=1001, out=self._path('x.csv')),
            dict(p=0.01, trials=0, out=self._path('x.csv')),
        ]
        for options in cases:
            with self.subTest(options=options), self.assertRaises(CommandError) as ctx:
                self._run(**options)
            self.assertEqual(ctx.exception.returncode, 2)

    def test_unwritable_output_exits_3(self):
        with self.assertRaises(CommandError) as ctx:
            self._run(p=0.0, n=1000, out=self._path('missing/dir/out.csv'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_key_mismatch_exits_4_after_writing(self):
        path = self._path('mismatch.csv')
        with self.assertRaises(CommandError) as ctx:
            self._run(p=0.03, n=2000, seed=4, test_fraction=0.5, mode='explicit',
                      redundancy_factor=0.1, slack=0, decode_confidence=0.0, out=path)
        self.assertEqual(ctx.exception.returncode, 4)
        rows = self._rows(path)
        self.assertEqual(rows[0]['keys_match'], 'false')
        self.assertEqual(rows[-1]['record'], AGGREGATE_RECORD)

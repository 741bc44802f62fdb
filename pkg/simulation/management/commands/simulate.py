"""
Django management command to run Monte Carlo protocol sessions.

    python manage.py simulate --protocol six-state --p 0.03 --n 200000 \
        --trials 20 --seed 42 --out runs.csv

Writes one row per trial plus an aggregate row. The seed is echoed on
standard output; reruns with the same seed give byte-identical files.
"""

from pathlib import Path

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from rates.command_options import (
    EXIT_KEY_MISMATCH,
    EXIT_UNWRITABLE_OUTPUT,
    OptionResolver,
    format_number,
    invalid,
    output_file,
)
from rates.constants import Protocol
from rates.errormodel import PauliRates, depolarizing
from simulation.constants import ReconciliationMode
from simulation.exceptions import ConfigError, QueuedTrialFailed
from simulation.protocol import SessionConfig, batch, run_trials
from simulation.reports import WRITERS, log_reports
from simulation.tasks import queue_batch


def channel_from_options(opts):
    """--p for a depolarizing channel, or --qx/--qy/--qz with q_I taking the rest."""
    p = opts.get('p', float)
    components = [opts.get(name, float) for name in ('qx', 'qy', 'qz')]
    given = [value is not None for value in components]
    if p is not None and any(given):
        raise invalid("Give either --p or --qx/--qy/--qz, not both")
    try:
        if p is not None:
            return depolarizing(p)
        if not all(given):
            raise invalid("Give --p, or all three of --qx, --qy and --qz")
        q_X, q_Y, q_Z = components
        return PauliRates.from_array((1.0 - q_X - q_Y - q_Z, q_X, q_Y, q_Z))
    except ValueError as e:
        raise invalid(f"Bad channel: {e}") from e


class Command(BaseCommand):
    help = 'Simulate QKD post-processing sessions and report empirical net key rates'

    def add_arguments(self, parser):
        parser.add_argument('--protocol', choices=Protocol.values, help='six-state or bb84')
        parser.add_argument('--p', type=float, help='Depolarizing parameter (q_X = q_Y = q_Z = p)')
        parser.add_argument('--qx', type=float, help='Pauli X rate')
        parser.add_argument('--qy', type=float, help='Pauli Y rate')
        parser.add_argument('--qz', type=float, help='Pauli Z rate')
        parser.add_argument('--n', type=int, help='Kept signals per session (default 10000)')
        parser.add_argument('--trials', type=int, help='Sessions per run (default 1)')
        parser.add_argument('--seed', type=int, help='Master seed (default: fresh, echoed)')
        parser.add_argument('--mode', choices=ReconciliationMode.values, help='ideal or explicit reconciliation')
        parser.add_argument('--test-fraction', type=float, help='Share of signals revealed for estimation')
        parser.add_argument('--bsteps', type=int, help='B-steps before one-way distillation (0: OTP preprocessing)')
        parser.add_argument('--block-size', type=int, help='Parities per decoded block in explicit mode (max 24)')
        parser.add_argument('--redundancy-factor', type=float, help='Parity budget factor')
        parser.add_argument('--slack', type=int, help='Extra parities per block')
        parser.add_argument(
            '--decode-confidence', type=float,
            help='Posterior a decoded block must reach before Bob stops asking for parities (0 never asks)',
        )
        parser.add_argument('--out', help='Report file to write')
        parser.add_argument('--format', choices=sorted(WRITERS), help='csv (default) or json-lines')
        parser.add_argument('--transcripts', help='Directory for per-trial hex transcripts')
        parser.add_argument('--queue', action='store_true', default=None, help='Run trials on the django_q cluster')
        parser.add_argument('--config', help='INI file with a [settings] section mirroring these flags')

    def handle(self, *args, **options):
        opts = OptionResolver(options)
        protocol = Protocol(opts.choice('protocol', Protocol.values, default=Protocol.SIX_STATE))
        channel = channel_from_options(opts)
        trials = opts.get('trials', int, default=1)
        if trials < 1:
            raise invalid("--trials must be at least 1")
        seed = opts.get('seed', int)
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
        out = opts.require('out')
        writer = WRITERS[opts.choice('format', tuple(WRITERS), default='csv')]
        transcripts = opts.get('transcripts')

        cfg = SessionConfig(
            protocol=protocol,
            channel=channel,
            n_signals=opts.get('n', int, default=10000),
            test_fraction=opts.get('test_fraction', float),
            mode=opts.choice('mode', ReconciliationMode.values, default=ReconciliationMode.IDEAL),
            block_size=opts.get('block_size', int),
            redundancy_factor=opts.get('redundancy_factor', float),
            slack=opts.get('slack', int),
            decode_confidence=opts.get('decode_confidence', float),
            seed=seed,
            bstep_count=opts.get('bsteps', int, default=0),
        )
        self.stdout.write(f"seed={seed}")

        runner = queue_batch if opts.get('queue', bool, default=False) else run_trials
        try:
            [summary] = batch([cfg], trials, runner)
        except ConfigError as e:
            raise invalid(str(e)) from e
        except QueuedTrialFailed as e:
            raise CommandError(str(e)) from e
        log_reports(summary)

        with output_file(out) as handle:
            written = writer(handle, summary)
        if transcripts:
            self._write_transcripts(Path(transcripts), summary.outcomes)

        self.stdout.write(f"net_rate_mean={format_number(summary.mean)}")
        self.stdout.write(f"net_rate_stderr={format_number(summary.stderr)}")
        if summary.aborted:
            self.stdout.write(self.style.WARNING(f"⚠️ {summary.aborted} of {summary.trials} trial(s) aborted"))
        if not summary.all_keys_match:
            mismatched = sum(not report.keys_match for report in summary.reports)
            raise CommandError(
                f"{mismatched} of {summary.trials} trial(s) ended with different keys (report written to {out})",
                returncode=EXIT_KEY_MISMATCH,
            )
        self.stdout.write(self.style.SUCCESS(f"✅ Wrote {written} rows to {out}"))

    def _write_transcripts(self, directory, outcomes):
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise CommandError(
                f"Cannot create transcript directory {directory}: {e}", returncode=EXIT_UNWRITABLE_OUTPUT,
            ) from e
        for outcome in outcomes:
            with output_file(directory / f"trial-{outcome.report.trial:04d}.hex") as handle:
                handle.write(outcome.transcript.hex_dump())

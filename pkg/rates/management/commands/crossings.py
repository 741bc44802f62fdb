"""
Django management command to locate tolerable error rates.

    python manage.py crossings --protocol bb84 --variant oneway
"""

import csv

from django.core.management.base import BaseCommand, CommandError

from rates.command_options import EXIT_NO_CROSSING, OptionResolver, format_number, invalid, output_file, split_list
from rates.constants import MAX_PARAM, VARIANT_NAMES, Protocol
from rates.exceptions import NoCrossing
from rates.keyrates import find_crossing
from rates.management.commands.rates import resolve_variants


class Command(BaseCommand):
    help = 'Print the bit-error rate where a variant\'s raw key rate reaches zero'

    def add_arguments(self, parser):
        parser.add_argument('--protocol', choices=Protocol.values, help='six-state or bb84')
        parser.add_argument('--variant', help=f"One or more of {','.join(VARIANT_NAMES)} (default: oneway)")
        parser.add_argument('--p-start', type=float, help='Scan start (default 0)')
        parser.add_argument('--p-end', type=float, help='Scan end (default: largest valid bit-error rate)')
        parser.add_argument('--scan-points', type=int, help='Grid points searched for the sign change')
        parser.add_argument('--max-bsteps', type=int, help='Deepest B-step recursion scanned')
        parser.add_argument('--out', help='Optional CSV file (protocol,variant,crossing)')
        parser.add_argument('--config', help='INI file with a [settings] section mirroring these flags')

    def handle(self, *args, **options):
        opts = OptionResolver(options)
        protocol = Protocol(opts.choice('protocol', Protocol.values, default=Protocol.SIX_STATE))
        variants = resolve_variants(protocol, split_list(opts.get('variant', default='oneway')))
        p_start = opts.get('p_start', float, default=0.0)
        p_end = opts.get('p_end', float, default=MAX_PARAM[protocol])
        scan_points = opts.get('scan_points', int)
        max_bsteps = opts.get('max_bsteps', int)
        if scan_points is not None and scan_points < 2:
            raise invalid("--scan-points must be at least 2")

        found = []
        for variant in variants:
            try:
                crossing = find_crossing(variant, p_start, p_end, scan_points, max_steps=max_bsteps)
            except NoCrossing as e:
                raise CommandError(str(e), returncode=EXIT_NO_CROSSING) from e
            except ValueError as e:
                raise invalid(str(e)) from e
            found.append((variant, crossing))
            self.stdout.write(f"{variant} {crossing:.6f}")

        out = opts.get('out')
        if out:
            with output_file(out) as handle:
                writer = csv.writer(handle, lineterminator='\n')
                writer.writerow(('protocol', 'variant', 'crossing'))
                for variant, crossing in found:
                    writer.writerow((protocol.value, variant.value, format_number(crossing)))
            self.stdout.write(self.style.SUCCESS(f"✅ Wrote {len(found)} crossing(s) to {out}"))

"""
Django management command to write key-rate comparison curves.

    python manage.py rates --protocol six-state --variants oneway,proposed,bstep \
        --p-start 0 --p-end 0.16 --steps 161 --out six_state.csv

The parameter column is the bit-error rate p_Z for both protocols.
"""

from django.core.management.base import BaseCommand

from rates.command_options import OptionResolver, invalid, output_file, split_list
from rates.constants import (
    DEFAULT_CURVE_END,
    DEFAULT_CURVE_STEPS,
    VARIANT_NAMES,
    VARIANTS_BY_NAME,
    Protocol,
)
from rates.export import write_curve_csv
from rates.keyrates import rate_curve


def resolve_variants(protocol, names):
    variants = []
    for name in names:
        variant = VARIANTS_BY_NAME.get((protocol, name))
        if variant is None:
            # Full tags such as six-state-bstep are accepted too.
            variant = next(
                (v for (p, _), v in VARIANTS_BY_NAME.items() if p == protocol and v == name),
                None,
            )
        if variant is None:
            raise invalid(f"Unknown {protocol} variant {name!r}; choose from {', '.join(VARIANT_NAMES)}")
        variants.append(variant)
    return variants


class Command(BaseCommand):
    help = 'Write asymptotic key-rate curves (one-way, proposed, optimal B-steps) as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--protocol', choices=Protocol.values, help='six-state or bb84')
        parser.add_argument(
            '--variants',
            help=f"Comma-separated subset of {','.join(VARIANT_NAMES)} (default: all)",
        )
        parser.add_argument('--p-start', type=float, help='First bit-error rate (default 0)')
        parser.add_argument('--p-end', type=float, help='Last bit-error rate')
        parser.add_argument('--steps', type=int, help=f'Points per curve (default {DEFAULT_CURVE_STEPS})')
        parser.add_argument('--max-bsteps', type=int, help='Deepest B-step recursion scanned')
        parser.add_argument('--out', help='CSV file to write')
        parser.add_argument('--config', help='INI file with a [settings] section mirroring these flags')

    def handle(self, *args, **options):
        opts = OptionResolver(options)
        protocol = Protocol(opts.choice('protocol', Protocol.values, default=Protocol.SIX_STATE))
        variants = resolve_variants(protocol, split_list(opts.get('variants', default=','.join(VARIANT_NAMES))))
        if not variants:
            raise invalid("--variants names no variant")
        p_start = opts.get('p_start', float, default=0.0)
        p_end = opts.get('p_end', float, default=DEFAULT_CURVE_END[protocol])
        steps = opts.get('steps', int, default=DEFAULT_CURVE_STEPS)
        max_bsteps = opts.get('max_bsteps', int)
        out = opts.require('out')

        self.stdout.write(f"📈 Computing {len(variants)} {protocol.label} curve(s) over [{p_start}, {p_end}], {steps} points")
        try:
            curves = [rate_curve(variant, p_start, p_end, steps, max_bsteps) for variant in variants]
        except ValueError as e:
            raise invalid(str(e)) from e

        with output_file(out) as handle:
            written = write_curve_csv(handle, curves)

        self.stdout.write(self.style.SUCCESS(f"✅ Wrote {written} rows to {out}"))

"""CSV export of rate curves."""

import csv

from .command_options import format_number

CURVE_HEADER = ('param', 'variant', 'rate_raw', 'rate_clamped', 'bstep_count', 'alpha_star')


def curve_rows(curves):
    """One row per (point, variant), grouped by parameter value."""
    rows = []
    for points in zip(*(curve.points for curve in curves)):
        for point in points:
            rows.append((
                format_number(point.channel_param),
                str(point.variant),
                format_number(point.rate),
                format_number(point.rate_clamped),
                format_number(point.bstep_count),
                format_number(point.alpha_star),
            ))
    return rows


def write_curve_csv(handle, curves):
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(CURVE_HEADER)
    rows = curve_rows(curves)
    writer.writerows(rows)
    return len(rows)


def read_curve_csv(handle):
    """Parse a file written by write_curve_csv back into typed dicts."""
    rows = []
    for record in csv.DictReader(handle):
        rows.append({
            'param': float(record['param']),
            'variant': record['variant'],
            'rate_raw': float(record['rate_raw']),
            'rate_clamped': float(record['rate_clamped']),
            'bstep_count': int(record['bstep_count']) if record['bstep_count'] else None,
            'alpha_star': float(record['alpha_star']) if record['alpha_star'] else None,
        })
    return rows

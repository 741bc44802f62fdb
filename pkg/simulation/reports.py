"""Serialization of session reports: CSV, JSON lines and field=value log lines."""

import csv
import json
import logging

from rates.command_options import format_number

logger = logging.getLogger(__name__)

TRIAL_RECORD = 'trial'
AGGREGATE_RECORD = 'aggregate'

REPORT_HEADER = (
    'record', 'protocol', 'mode', 'seed', 'trial', 'n_signals', 'bstep_count', 'raw_key_bits',
    'aborted', 'observed_p_x', 'observed_p_y', 'observed_p_z', 'analytic_rate',
    'otp_consumed', 'final_even', 'final_odd0', 'final_odd1', 'net_bits', 'empirical_net_rate',
    'blocks_even', 'blocks_odd', 'odd0_count', 'odd1_count', 'survivors', 'decode_failures',
    'keys_match', 'parities_masked', 'transcript_bytes',
    'trials', 'aborted_trials', 'rate_mean', 'rate_stddev', 'rate_stderr',
)


def trial_record(report):
    ledger = report.ledger
    return {
        'record': TRIAL_RECORD,
        'protocol': str(report.protocol),
        'mode': str(report.mode),
        'seed': report.seed,
        'trial': report.trial,
        'n_signals': report.n_signals,
        'bstep_count': report.bstep_count,
        'raw_key_bits': report.raw_key_bits,
        'aborted': report.aborted,
        'observed_p_x': report.observed.p_X,
        'observed_p_y': report.observed.p_Y,
        'observed_p_z': report.observed.p_Z,
        'analytic_rate': report.analytic_rate,
        'otp_consumed': ledger.otp_consumed,
        'final_even': ledger.final_even,
        'final_odd0': ledger.final_odd0,
        'final_odd1': ledger.final_odd1,
        'net_bits': ledger.net,
        'empirical_net_rate': report.empirical_net_rate,
        'blocks_even': report.blocks_even,
        'blocks_odd': report.blocks_odd,
        'odd0_count': report.odd0_count,
        'odd1_count': report.odd1_count,
        'survivors': report.survivors,
        'decode_failures': report.decode_failures,
        'keys_match': report.keys_match,
        'parities_masked': report.parities_masked,
        'transcript_bytes': report.transcript_bytes,
    }


def aggregate_record(summary):
    cfg = summary.config
    return {
        'record': AGGREGATE_RECORD,
        'protocol': str(cfg.protocol),
        'mode': str(cfg.mode),
        'seed': cfg.seed,
        'n_signals': cfg.n_signals,
        'bstep_count': cfg.bstep_count,
        'keys_match': summary.all_keys_match,
        'trials': summary.trials,
        'aborted_trials': summary.aborted,
        'rate_mean': summary.mean,
        'rate_stddev': summary.stddev,
        'rate_stderr': summary.stderr,
    }


def summary_records(summary):
    """Per-trial records in trial order, then the aggregate."""
    return [trial_record(report) for report in summary.reports] + [aggregate_record(summary)]


def write_csv(handle, summary):
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(REPORT_HEADER)
    records = summary_records(summary)
    for record in records:
        writer.writerow([format_number(record.get(column)) for column in REPORT_HEADER])
    return len(records)


def _json_value(value):
    if isinstance(value, float):
        return float(format_number(value))
    return value


def write_json_lines(handle, summary):
    records = summary_records(summary)
    for record in records:
        handle.write(json.dumps({key: _json_value(value) for key, value in record.items()}) + '\n')
    return len(records)


WRITERS = {
    'csv': write_csv,
    'json-lines': write_json_lines,
}


def report_line(report):
    """One line of field=value pairs for logs."""
    return ' '.join(
        f"{key}={format_number(value)}"
        for key, value in trial_record(report).items()
        if key != 'record'
    )


def log_reports(summary):
    for report in summary.reports:
        logger.info(report_line(report))

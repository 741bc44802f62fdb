"""
Option handling shared by the rates, crossings and simulate commands.

Every command accepts --config FILE, an INI file with a [settings] section
whose keys mirror the flag names with underscores (p_start, max_bsteps, ...).
Explicit flags win over file values, file values win over built-in defaults.
"""

import logging
from contextlib import contextmanager
from pathlib import Path

from decouple import Config, RepositoryIni
from django.core.management.base import CommandError

logger = logging.getLogger(__name__)

EXIT_INVALID_FLAGS = 2
EXIT_UNWRITABLE_OUTPUT = 3
EXIT_KEY_MISMATCH = 4
EXIT_NO_CROSSING = 5


def invalid(message):
    return CommandError(message, returncode=EXIT_INVALID_FLAGS)


def format_number(value):
    """15 significant digits, empty for missing values."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    return format(float(value), '.15g')


class OptionResolver:
    """Looks a flag up in the parsed options, then in the --config file."""

    def __init__(self, options):
        self.options = options
        self.file = None
        path = options.get('config')
        if path:
            if not Path(path).is_file():
                raise invalid(f"Config file not found: {path}")
            self.file = Config(RepositoryIni(path))
            logger.debug(f"Reading command options from {path}")

    def get(self, name, cast=str, default=None):
        value = self.options.get(name)
        if value is None and self.file is not None and name in self.file.repository:
            try:
                value = self.file(name, cast=cast)
            except (TypeError, ValueError) as e:
                raise invalid(f"Bad value for '{name}' in config file: {e}") from e
        return default if value is None else value

    def require(self, name, cast=str):
        value = self.get(name, cast)
        if value is None:
            flag = '--' + name.replace('_', '-')
            raise invalid(f"{flag} is required (on the command line or in --config)")
        return value

    def choice(self, name, choices, default=None):
        value = self.get(name, default=default)
        if value is not None and value not in choices:
            raise invalid(f"{name} must be one of {', '.join(choices)}, got {value!r}")
        return value


def split_list(value):
    return [item.strip() for item in value.split(',') if item.strip()]


@contextmanager
def output_file(path):
    """Open `path` for writing; failures become exit code 3."""
    try:
        handle = open(path, 'w', newline='', encoding='utf-8')
    except OSError as e:
        raise CommandError(f"Cannot write {path}: {e}", returncode=EXIT_UNWRITABLE_OUTPUT) from e
    with handle:
        yield handle

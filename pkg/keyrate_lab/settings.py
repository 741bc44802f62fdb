"""
Django settings for the keyrate_lab project.

The project has no web surface: it hosts the rate calculators, the
reconciliation codec and the protocol simulator, and exposes them through
management commands (rates, crossings, simulate).

Every value below can be overridden from the environment or a .env file
(python-decouple).
"""

from pathlib import Path

import dj_database_url
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='keyrate-lab-local-only-key')
DEBUG = config('DEBUG', default=False, cast=bool)
ALLOWED_HOSTS = []

# === KEY RATE CONFIGURATION ===

# B-step recursion depth scanned by the optimal-B-step variants.
# Beyond ~20 steps the 2^-k yield makes every rate negligible.
KEYRATE_MAX_BSTEPS = config('KEYRATE_MAX_BSTEPS', default=20, cast=int)

# BB84 worst-case alpha search: coarse grid seed, then bounded refinement.
KEYRATE_ALPHA_GRID_STEP = config('KEYRATE_ALPHA_GRID_STEP', default=1e-3, cast=float)
KEYRATE_ALPHA_XATOL = config('KEYRATE_ALPHA_XATOL', default=1e-9, cast=float)

# Zero-crossing location (tolerable error rate).
KEYRATE_CROSSING_XTOL = config('KEYRATE_CROSSING_XTOL', default=1e-7, cast=float)
KEYRATE_CROSSING_SCAN_POINTS = config('KEYRATE_CROSSING_SCAN_POINTS', default=2000, cast=int)

# === RECONCILIATION CONFIGURATION ===

# Finite-size parity budget: l = ceil(factor * m * H) + slack.
# The explicit factor applies to decoded blocks; ideal mode charges the
# empirical parity entropy at factor 1.
RECONCILIATION_REDUNDANCY_FACTOR = config('RECONCILIATION_REDUNDANCY_FACTOR', default=1.15, cast=float)
RECONCILIATION_IDEAL_REDUNDANCY_FACTOR = config('RECONCILIATION_IDEAL_REDUNDANCY_FACTOR', default=1.0, cast=float)
RECONCILIATION_SLACK = config('RECONCILIATION_SLACK', default=4, cast=int)

# Explicit decoding prior: P_odd at the one-sided upper bound on the Z-basis
# test error rate, taken at this confidence level.
RECONCILIATION_PRIOR_LEVEL = config('RECONCILIATION_PRIOR_LEVEL', default=0.95, cast=float)

# Bob asks for RECONCILIATION_EXTRA_PARITIES more parities of a block until its
# decoded pattern holds at least this posterior probability (0 never asks).
RECONCILIATION_DECODE_CONFIDENCE = config('RECONCILIATION_DECODE_CONFIDENCE', default=0.9999, cast=float)
RECONCILIATION_EXTRA_PARITIES = config('RECONCILIATION_EXTRA_PARITIES', default=2, cast=int)

# Parities per exhaustively decoded block (hard limit 24).
RECONCILIATION_BLOCK_SIZE = config('RECONCILIATION_BLOCK_SIZE', default=20, cast=int)

# === SIMULATION CONFIGURATION ===

SIMULATION_TEST_FRACTION = config('SIMULATION_TEST_FRACTION', default=0.1, cast=float)

# How long `simulate --queue` waits for the cluster to finish a batch (-1 waits forever).
SIMULATION_QUEUE_TIMEOUT_MS = config('SIMULATION_QUEUE_TIMEOUT_MS', default=-1, cast=int)


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django_q',
    'rates.apps.RatesConfig',
    'reconciliation.apps.ReconciliationConfig',
    'simulation.apps.SimulationConfig',
]

# Database
# Local runs use SQLite; set DATABASE_URL to point the task queue elsewhere.
DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
    )
}

# Django Q configuration: the ORM broker keeps the cluster self-contained.
Q_CLUSTER = {
    'name': 'keyrate-qcluster',
    'workers': config('Q_WORKERS', default=4, cast=int),
    'recycle': 500,
    'timeout': 600,
    'retry': 900,
    'compress': True,
    'save_limit': 250,
    'queue_limit': 50,
    'label': 'Django Q',
    'orm': 'default',
    'catch_up': False,
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': config('LOG_LEVEL', default='WARNING'),
    },
}

"""
Trials dispatched to the django_q cluster.

Each trial is an independent task; the batch is a task group collected once
every member has finished. Seeds derive from (seed, trial), so queued and
in-process batches give identical reports.
"""

import logging
import uuid
from dataclasses import replace

from django.conf import settings
from django_q.tasks import async_task, fetch_group

from .exceptions import ConfigError, QueuedTrialFailed
from .protocol import execute_session

logger = logging.getLogger(__name__)


def run_trial(cfg, trial):
    return execute_session(replace(cfg, trial=trial))


def queue_batch(cfg, trials, sync=False, wait=None):
    """
    Queue trials 0..trials-1 of cfg and wait for all of them.

    Returns the SessionOutcomes in trial order. `sync` runs every task in
    this process (tests, or no cluster running).
    """
    if trials < 1:
        raise ConfigError(f"Need at least one trial, got {trials}")
    group = f"simulate-{cfg.seed}-{uuid.uuid4().hex[:12]}"
    for trial in range(trials):
        async_task('simulation.tasks.run_trial', cfg, trial, group=group, sync=sync)
    logger.info(f"📤 Queued {trials} trial(s) in group {group}")

    if wait is None:
        wait = getattr(settings, 'SIMULATION_QUEUE_TIMEOUT_MS', -1)
    tasks = fetch_group(group, failures=True, count=trials, wait=wait) or []
    failed = [task for task in tasks if not task.success]
    if failed:
        raise QueuedTrialFailed(f"{len(failed)} trial(s) in group {group} failed: {failed[0].result}")
    if len(tasks) < trials:
        raise QueuedTrialFailed(f"Only {len(tasks)} of {trials} trial(s) in group {group} finished")
    logger.info(f"✅ Collected {trials} trial(s) from group {group}")
    return sorted((task.result for task in tasks), key=lambda outcome: outcome.report.trial)

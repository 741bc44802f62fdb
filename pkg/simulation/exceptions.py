class ConfigError(ValueError):
    """A session configuration that cannot be run."""


class QueuedTrialFailed(RuntimeError):
    """A trial dispatched to the task cluster did not return a report."""

class PufError(Exception):
    """Base class for toolkit errors."""


class UsageError(PufError, ValueError):
    """Caller passed arguments with inconsistent shapes or widths."""


class ConfigError(PufError, ValueError):
    """A configuration is infeasible or internally inconsistent."""

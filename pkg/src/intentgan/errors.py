"""Exception taxonomy shared across the toolkit.

Each class maps to one CLI exit code, see :mod:`intentgan.cli`.
"""


class IntentGanError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(IntentGanError):
    """Invalid configuration value or malformed config file (exit 2)."""


class DataFormatError(IntentGanError):
    """Malformed or inconsistent dataset / embedding input (exit 3)."""


class BindingError(DataFormatError):
    """A feature lookup that cannot be resolved, e.g. id out of range."""


class CheckpointError(IntentGanError):
    """Unreadable or inconsistent model checkpoint (exit 4)."""


class NumericError(IntentGanError):
    """A non-finite value showed up where the math requires finiteness (exit 5)."""

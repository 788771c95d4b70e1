"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
BackendError -> 3.
"""


class EntrankError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(EntrankError):
    """Invalid configuration: unknown query, bad flag combination, malformed registry."""


class DataError(EntrankError):
    """Corpus, score, or ranking data violates a documented format or invariant."""


class BackendError(EntrankError):
    """A scoring backend failed to load or refused an input."""

"""Error types shared across the package.

The CLI maps these onto process exit codes (validation 2, I/O 3,
integrity 4); library callers can catch them individually.
"""


class DriveStressError(Exception):
    pass


class ConfigError(DriveStressError, ValueError):
    """Invalid configuration value, unknown key, or out-of-range id."""


class DomainError(DriveStressError, ValueError):
    """An input outside a function's mathematical domain."""


class ContractError(DriveStressError, ValueError):
    """A call that violates an operation's precondition."""


class IntegrityError(DriveStressError):
    """Stored artifact does not match what was recorded or recomputed."""

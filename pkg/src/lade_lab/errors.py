"""Exception hierarchy for lade-lab.

Every error raised on purpose by the package derives from LadeLabError and
carries the process exit code the CLI should use:

- 2: configuration or parameter error
- 3: numeric failure (domain errors, broken contracts, non-finite loss)
- 4: I/O (missing or unwritable artifacts)
"""


class LadeLabError(Exception):
    """Base class for all lade-lab errors."""

    exit_code: int = 1


class ParameterError(LadeLabError, ValueError):
    """Raised when an operation receives invalid parameters."""

    exit_code = 2


class DimensionError(ParameterError):
    """Raised when array shapes do not conform."""

    pass


class ConfigError(LadeLabError):
    """Raised for unknown keys, invalid values or missing required config entries."""

    exit_code = 2


class DomainError(LadeLabError, ValueError):
    """Raised when a value lies outside a function's domain (e.g. log of zero)."""

    exit_code = 3


class ContractError(LadeLabError, RuntimeError):
    """Raised when an API contract is violated (e.g. backward called twice)."""

    exit_code = 3


class ConstructionError(LadeLabError):
    """Raised when a randomized construction cannot be completed."""

    exit_code = 3


class NumericFailureError(LadeLabError):
    """Raised when training produces a non-finite loss."""

    exit_code = 3


class ArtifactError(LadeLabError, OSError):
    """Raised when an experiment artifact is missing or cannot be written."""

    exit_code = 4

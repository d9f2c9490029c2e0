"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: input/format problems -> 2,
numerical failures during training -> 3, bad configuration -> 4.
"""


class InputFormatError(ValueError):
    """Malformed or inconsistent input data (files or in-memory records)."""


class ConfigError(ValueError):
    """Configuration value outside its valid domain."""


class TrainingDivergedError(ArithmeticError):
    """Training produced a non-finite loss; carries epoch/batch context."""

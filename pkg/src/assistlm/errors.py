"""Exception types shared across the package.

The CLI maps these to exit codes: DataError -> 3, NumericError -> 4.
"""


class DataError(Exception):
    """Bad or missing input data (corpus, vocabulary, checkpoint, request)."""


class CheckpointError(DataError):
    """Unreadable, truncated or mismatched model checkpoint."""


class NumericError(Exception):
    """Non-finite value where a finite one is required (e.g. training loss)."""

"""Exception types shared across the toolkit.

The CLI maps these onto its exit codes: usage problems are handled by the
argument parser (exit 1), :class:`DataError` and subclasses exit 2, and
:class:`NumericError` exits 3.
"""

from __future__ import annotations


class EmbiasError(Exception):
    """Base class for all toolkit errors."""


class DataError(EmbiasError):
    """Invalid input data or a violated validation contract."""


class FormatError(DataError):
    """Malformed file content, with path/line context when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class MissingWordsError(DataError):
    """Words absent from an embedding vocabulary under the strict policy."""

    def __init__(self, missing, source: str = ""):
        self.missing = list(missing)
        where = f" in {source}" if source else ""
        words = ", ".join(repr(w) for w in self.missing)
        super().__init__(f"words not in vocabulary{where}: {words}")


class NumericError(EmbiasError):
    """Numerically undefined operation (zero-norm vector, zero variance, ...)."""

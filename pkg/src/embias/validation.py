"""Input validation helpers shared by the statistics and the estimator."""

from __future__ import annotations

import numpy as np

from .errors import DataError, NumericError


def as_float_matrix(vectors, name: str = "vectors") -> np.ndarray:
    """Coerce a list of vectors (or a 2-D array) to a float64 (m, d) matrix.

    Raises DataError for empty input, ragged rows, or non-finite values.
    """
    try:
        arr = np.asarray(vectors, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{name}: cannot interpret as a numeric matrix ({exc})") from None
    if arr.ndim != 2:
        raise DataError(f"{name}: expected a list of equal-length vectors, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"{name}: empty vector list")
    if not np.isfinite(arr).all():
        raise DataError(f"{name}: contains non-finite values")
    return arr


def as_float_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 vector; reject empty or non-finite input."""
    try:
        arr = np.asarray(v, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{name}: cannot interpret as a numeric vector ({exc})") from None
    if arr.ndim != 1:
        raise DataError(f"{name}: expected a 1-D vector, got ndim={arr.ndim}")
    if arr.size < 1:
        raise DataError(f"{name}: empty vector")
    if not np.isfinite(arr).all():
        raise DataError(f"{name}: contains non-finite values")
    return arr


def check_same_dim(*named_matrices: tuple[str, np.ndarray]) -> int:
    """Check all matrices share one vector dimension; return it."""
    dims = {name: m.shape[-1] for name, m in named_matrices}
    distinct = set(dims.values())
    if len(distinct) != 1:
        detail = ", ".join(f"{k}={v}" for k, v in dims.items())
        raise DataError(f"dimension mismatch: {detail}")
    return distinct.pop()


def unit_rows(matrix: np.ndarray, name: str = "vectors") -> np.ndarray:
    """Normalize rows to unit length; zero-norm rows raise NumericError."""
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise NumericError(f"{name}: zero-norm vector at position {bad}")
    return matrix / norms[:, None]


def check_word_list(words, name: str = "words") -> list[str]:
    """Validate a list of word strings: non-empty list, non-empty entries."""
    out = list(words)
    if not out:
        raise DataError(f"{name}: empty word list")
    for w in out:
        if not isinstance(w, str) or not w:
            raise DataError(f"{name}: invalid word {w!r}")
    return out

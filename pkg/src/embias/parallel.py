"""Worker-count resolution.

The EMBIAS_THREADS environment variable caps how many workers any operation
may use; it defaults to 1, so everything is single-threaded and deterministic
unless the user raises the cap and a caller explicitly asks for more workers.
"""

from __future__ import annotations

import os

from .errors import DataError

ENV_VAR = "EMBIAS_THREADS"


def worker_cap() -> int:
    """The configured worker ceiling (EMBIAS_THREADS, default 1)."""
    raw = os.environ.get(ENV_VAR)
    if raw is None or not raw.strip():
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise DataError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise DataError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return cap


def resolve_workers(requested: int | None = None) -> int:
    """Effective worker count: the request (default 1) clamped to the cap."""
    if requested is None:
        requested = 1
    if requested < 1:
        raise DataError(f"worker count must be >= 1, got {requested}")
    return min(requested, worker_cap())

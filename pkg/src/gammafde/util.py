"""Small shared utilities: thread cap and deterministic chunked maps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap() -> int:
    """Parallelism cap from the FDE_THREADS environment variable (default 1)."""
    try:
        n = int(os.environ.get("FDE_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


def chunked_map(fn, chunks: list):
    """Apply fn to chunks, in parallel when allowed; results keep chunk order."""
    n = thread_cap()
    if n <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, chunks))

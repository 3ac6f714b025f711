"""Shared helpers: compensated summation, deterministic chunking, file digests.

Determinism policy used throughout the package: every reduction over floating
point data happens in a fixed order that does not depend on the worker count.
Work is split into chunks at boundaries derived from the input alone, each
chunk is reduced sequentially, and the per-chunk results are combined in chunk
index order.  math.fsum (exact rounding) is used for the final combines, so
parallel runs are bit-identical to serial ones.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

CACHE_ENV = "APML_CACHE_DIR"
FORCE_PY_ENV = "APML_FORCE_PY"


def fsum(values: Iterable[float]) -> float:
    """Exactly rounded float sum (order independent by construction)."""
    return math.fsum(values)


def neumaier_sum(values: np.ndarray) -> float:
    """Compensated (Kahan/Neumaier) sum of a 1-D float64 array.

    Used where math.fsum would be too slow; the running order is the array
    order, so callers must pass data in a canonical order.
    """
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def chunk_bounds(n: int, target_chunks: int) -> list[tuple[int, int]]:
    """Fixed [start, stop) chunk boundaries for an n-element range.

    The boundaries depend only on n and target_chunks (never on the number of
    workers actually used), which keeps parallel reductions deterministic.
    """
    if n <= 0:
        return []
    k = max(1, min(target_chunks, n))
    step = -(-n // k)
    return [(i, min(i + step, n)) for i in range(0, n, step)]


def run_chunked(
    work: Callable[[int, int], T],
    bounds: Sequence[tuple[int, int]],
    workers: int = 1,
) -> list[T]:
    """Run `work(lo, hi)` over fixed chunk bounds, results in chunk order."""
    if workers <= 1 or len(bounds) <= 1:
        return [work(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(work, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


def resolve_cache_dir(explicit: str | os.PathLike | None = None) -> Path:
    """Cache directory: explicit argument > APML_CACHE_DIR > ./.apml_cache."""
    if explicit is not None:
        path = Path(explicit)
    elif os.environ.get(CACHE_ENV):
        path = Path(os.environ[CACHE_ENV])
    else:
        path = Path.cwd() / ".apml_cache"
    path.mkdir(parents=True, exist_ok=True)
    return path


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def format_float(x: float) -> str:
    """Shortest round-trip decimal form, stable across runs."""
    return repr(float(x))


def format_sig(x: float, digits: int = 17) -> str:
    """Fixed significant-digit form used in numeric CSV columns."""
    return f"{float(x):.{digits - 1}e}"


def loglog_slope(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope/intercept of log|y| against log x.

    Points with y == 0 are dropped (they only make the fitted growth smaller).
    Raises ValueError when fewer than two usable points remain; callers that
    need a 'degenerate' verdict catch it.
    """
    xs = [math.log(x) for x, y in points if y != 0]
    ys = [math.log(abs(y)) for x, y in points if y != 0]
    if len(xs) < 2:
        raise ValueError("need at least two nonzero points for a slope fit")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((u - mx) ** 2 for u in xs)
    sxy = sum((u - mx) * (v - my) for u, v in zip(xs, ys))
    if sxx == 0:
        raise ValueError("degenerate abscissae in slope fit")
    slope = sxy / sxx
    return slope, my - slope * mx

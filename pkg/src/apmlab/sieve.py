"""Segmented prime sieve and the prime/log-prime table used by the moment sums.

Design notes
------------
1. The table stores primes p <= x_max as uint64 and log p as float64; log p is
   computed per prime with np.log, so the stored values do not depend on how
   the sieve was segmented or how many workers ran.
2. The on-disk cache format is little endian:
       magic b"APML1" | version u8 | x_max i64 | count i64 | p u64[count] | logp f64[count]
   Any mismatch (magic, version, truncation, trailing bytes, x_max) triggers a
   silent regeneration; a corrupt cache is never reused.
3. chebyshev_theta uses math.fsum over the ascending prime order, which is
   exactly rounded and therefore independent of chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .util import chunk_bounds, resolve_cache_dir, run_chunked

_MAGIC = b"APML1"
_VERSION = 1


def _simple_sieve(limit: int) -> np.ndarray:
    """Primes <= limit by a plain boolean sieve (used for base primes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.uint64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.uint64)


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) given base primes up to sqrt(hi)."""
    if hi <= lo:
        return np.zeros(0, dtype=np.uint64)
    mask = np.ones(hi - lo, dtype=bool)
    if lo <= 1:
        mask[: min(2 - lo, hi - lo)] = False
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start < hi:
            mask[start - lo :: p] = False
    return (np.flatnonzero(mask) + lo).astype(np.uint64)


def sieve_primes(x_max: int, segment_size: int = 1 << 20, workers: int = 1) -> np.ndarray:
    """All primes <= x_max, ascending.  Segment work may run in parallel; the
    segments are concatenated in index order so the result is reproducible."""
    if x_max < 2:
        return np.zeros(0, dtype=np.uint64)
    base = _simple_sieve(int(math.isqrt(x_max)))
    n_segments = max(1, -(-(x_max + 1) // segment_size))
    bounds = [(i * segment_size, min((i + 1) * segment_size, x_max + 1)) for i in range(n_segments)]
    parts = run_chunked(lambda lo, hi: _sieve_segment(lo, hi, base), bounds, workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint64)


@dataclass
class PrimeLogTable:
    """Primes up to x_max with their natural logs."""

    x_max: int
    primes: np.ndarray = field(repr=False)
    logs: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, x_max: int, segment_size: int = 1 << 20, workers: int = 1) -> "PrimeLogTable":
        primes = sieve_primes(x_max, segment_size=segment_size, workers=workers)
        logs = np.log(primes.astype(np.float64))
        return cls(x_max=int(x_max), primes=primes, logs=logs)

    # -- cache ------------------------------------------------------------

    def cache_path(self, cache_dir=None) -> Path:
        return resolve_cache_dir(cache_dir) / f"primes_{self.x_max}.bin"

    def save(self, cache_dir=None) -> Path:
        path = self.cache_path(cache_dir)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(bytes([_VERSION]))
            fh.write(np.int64(self.x_max).tobytes())
            fh.write(np.int64(len(self.primes)).tobytes())
            fh.write(self.primes.astype("<u8").tobytes())
            fh.write(self.logs.astype("<f8").tobytes())
        tmp.replace(path)
        return path

    @classmethod
    def _read_cache(cls, path: Path, x_max: int) -> "PrimeLogTable | None":
        try:
            raw = path.read_bytes()
        except OSError:
            return None
        header = len(_MAGIC) + 1 + 16
        if len(raw) < header or raw[: len(_MAGIC)] != _MAGIC or raw[len(_MAGIC)] != _VERSION:
            return None
        off = len(_MAGIC) + 1
        stored_x = int(np.frombuffer(raw, "<i8", 1, off)[0])
        count = int(np.frombuffer(raw, "<i8", 1, off + 8)[0])
        if stored_x != x_max or count < 0:
            return None
        need = header + count * 16
        if len(raw) != need:
            return None
        primes = np.frombuffer(raw, "<u8", count, header).copy()
        logs = np.frombuffer(raw, "<f8", count, header + 8 * count).copy()
        if count and (primes[-1] > x_max or np.any(np.diff(primes.astype(np.int64)) <= 0)):
            return None
        return cls(x_max=x_max, primes=primes, logs=logs)

    @classmethod
    def load(
        cls,
        x_max: int,
        cache_dir=None,
        segment_size: int = 1 << 20,
        workers: int = 1,
    ) -> "PrimeLogTable":
        """Load from cache when valid, otherwise build and refresh the cache."""
        x_max = int(x_max)
        path = resolve_cache_dir(cache_dir) / f"primes_{x_max}.bin"
        cached = cls._read_cache(path, x_max)
        if cached is not None:
            return cached
        table = cls.build(x_max, segment_size=segment_size, workers=workers)
        table.save(cache_dir)
        return table

    # -- queries -----------------------------------------------------------

    def upto(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """(primes, logs) restricted to p <= x."""
        if x >= self.x_max:
            if x > self.x_max:
                raise ValueError(f"table only covers primes <= {self.x_max}, asked for {x}")
            return self.primes, self.logs
        idx = int(np.searchsorted(self.primes, math.floor(x), side="right"))
        return self.primes[:idx], self.logs[:idx]

    def prime_count(self, x: float | None = None) -> int:
        return len(self.upto(self.x_max if x is None else x)[0])

    def chebyshev_theta(self, x: float) -> float:
        """theta(x) = sum of log p over p <= x (exactly rounded sum)."""
        _, logs = self.upto(x)
        return math.fsum(logs.tolist())


def chebyshev_theta(table: PrimeLogTable, x: float) -> float:
    return table.chebyshev_theta(x)


def chunked_theta(table: PrimeLogTable, x: float, workers: int = 1, target_chunks: int = 64) -> float:
    """theta(x) computed from per-chunk fsums combined in chunk order.

    Chunk boundaries depend only on the data size, so the result is
    bit-identical for any worker count (chunk fsums each round once, then the
    fixed-order recombination rounds once more).
    """
    _, logs = table.upto(x)
    bounds = chunk_bounds(len(logs), target_chunks)
    partials = run_chunked(lambda lo, hi: math.fsum(logs[lo:hi].tolist()), bounds, workers)
    return math.fsum(partials)

"""Sieve and prime-table tests: counts, caching, corruption handling, theta."""

import math

import numpy as np
import pytest

from apmlab.sieve import PrimeLogTable, chunked_theta, sieve_primes


def _reference_primes(limit):
    """Independent bytearray sieve, kept deliberately naive."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, int(limit**0.5) + 1):
        if flags[p]:
            for m in range(p * p, limit + 1, p):
                flags[m] = 0
    return [n for n in range(limit + 1) if flags[n]]


def test_prime_counts_at_checkpoints():
    assert len(sieve_primes(10)) == 4
    assert len(sieve_primes(100)) == 25
    assert len(sieve_primes(10_000)) == 1229
    assert len(sieve_primes(100_000)) == 9592


def test_sieve_matches_reference_listing():
    got = sieve_primes(10_000)
    assert got.tolist() == _reference_primes(10_000)


def test_sieve_edge_cases():
    assert sieve_primes(0).size == 0
    assert sieve_primes(1).size == 0
    assert sieve_primes(2).tolist() == [2]


def test_segmentation_and_workers_do_not_change_output():
    baseline = sieve_primes(50_000)
    for segment_size in (1 << 10, 1 << 14, 1 << 20):
        for workers in (1, 4):
            other = sieve_primes(50_000, segment_size=segment_size, workers=workers)
            assert np.array_equal(baseline, other)


def test_table_save_load_round_trip(tmp_path):
    table = PrimeLogTable.build(5000)
    path = table.save(tmp_path)
    assert path == tmp_path / "primes_5000.bin"
    loaded = PrimeLogTable.load(5000, cache_dir=tmp_path)
    assert np.array_equal(loaded.primes, table.primes)
    assert np.array_equal(loaded.logs, table.logs)


def test_load_builds_and_caches_when_missing(tmp_path):
    assert not (tmp_path / "primes_300.bin").exists()
    table = PrimeLogTable.load(300, cache_dir=tmp_path)
    assert table.prime_count() == 62
    assert (tmp_path / "primes_300.bin").exists()


@pytest.mark.parametrize(
    "corrupt",
    [
        lambda raw: b"XPML1" + raw[5:],  # bad magic
        lambda raw: raw[:-8],  # truncated payload
        lambda raw: raw + b"\x00",  # trailing junk
        lambda raw: raw[:5] + bytes([raw[5] ^ 1]) + raw[6:],  # bad version
        lambda raw: raw[:6] + np.int64(999).tobytes() + raw[14:],  # wrong x_max
    ],
)
def test_corrupt_cache_is_rebuilt_not_reused(tmp_path, corrupt):
    table = PrimeLogTable.build(1000)
    path = table.save(tmp_path)
    raw = path.read_bytes()
    path.write_bytes(corrupt(raw))
    reloaded = PrimeLogTable.load(1000, cache_dir=tmp_path)
    assert np.array_equal(reloaded.primes, table.primes)
    # the bad bytes must have been replaced by a valid cache
    assert path.read_bytes() == raw


def test_upto_respects_bounds(table_1e4):
    primes, logs = table_1e4.upto(12.9)
    assert primes.tolist() == [2, 3, 5, 7, 11]
    assert logs[-1] == math.log(11)
    assert table_1e4.upto(10_000)[0][-1] == 9973
    with pytest.raises(ValueError):
        table_1e4.upto(10_001)


def test_chebyshev_theta_is_exact_fsum(table_1e4):
    primes, logs = table_1e4.upto(5000)
    assert table_1e4.chebyshev_theta(5000) == math.fsum(logs.tolist())
    # theta(x) ~ x; sanity check the scale
    assert table_1e4.chebyshev_theta(10_000) == pytest.approx(10_000, rel=0.02)
    assert len(primes) == 669


def test_chunked_theta_bitwise_across_workers(table_1e4):
    serial = chunked_theta(table_1e4, 10_000, workers=1)
    threaded = chunked_theta(table_1e4, 10_000, workers=8)
    assert serial == threaded
    assert serial == pytest.approx(table_1e4.chebyshev_theta(10_000), rel=1e-15)

"""Shared-helper tests: summation, chunking, formatting, cache resolution."""

import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apmlab import util


def test_fsum_matches_math_fsum():
    values = [0.1] * 10
    assert util.fsum(values) == math.fsum(values) == 1.0


def test_neumaier_survives_cancellation():
    # Classic case where naive and Kahan sums both lose the small terms.
    data = np.array([1.0, 1e100, 1.0, -1e100])
    assert util.neumaier_sum(data) == 2.0
    assert float(np.sum(data)) != 2.0


def test_neumaier_agrees_with_fsum_on_random_data():
    rng = np.random.default_rng(12345)
    data = rng.standard_normal(1000) * np.logspace(-8, 8, 1000)
    assert util.neumaier_sum(data) == pytest.approx(math.fsum(data), rel=1e-15)


@given(n=st.integers(0, 5000), target=st.integers(1, 64))
@settings(max_examples=200, deadline=None)
def test_chunk_bounds_partition_the_range(n, target):
    bounds = util.chunk_bounds(n, target)
    if n == 0:
        assert bounds == []
        return
    assert bounds[0][0] == 0
    assert bounds[-1][1] == n
    for (lo, hi), (lo2, _) in zip(bounds, bounds[1:]):
        assert hi == lo2
    assert all(lo < hi for lo, hi in bounds)
    assert len(bounds) <= min(target, n)


def test_chunk_bounds_ignore_worker_count_by_construction():
    # Same (n, target) must give the same bounds no matter who asks.
    assert util.chunk_bounds(1000, 8) == util.chunk_bounds(1000, 8)
    assert util.chunk_bounds(7, 16) == [(i, i + 1) for i in range(7)]


def test_run_chunked_results_in_chunk_order():
    data = np.arange(10_000, dtype=np.float64) * 1e-3
    bounds = util.chunk_bounds(len(data), 32)

    def work(lo, hi):
        return util.fsum(data[lo:hi])

    serial = util.run_chunked(work, bounds, workers=1)
    threaded = util.run_chunked(work, bounds, workers=8)
    assert serial == threaded
    assert util.fsum(serial) == util.fsum(threaded)


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=300, deadline=None)
def test_format_sig_round_trips(x):
    assert float(util.format_sig(x)) == x


def test_format_float_is_repr():
    assert util.format_float(0.1) == "0.1"
    assert float(util.format_float(math.pi)) == math.pi


def test_loglog_slope_recovers_power_law():
    points = [(x, 3.7 * x**2.5) for x in (10.0, 100.0, 1000.0, 10000.0)]
    slope, intercept = util.loglog_slope(points)
    assert slope == pytest.approx(2.5, abs=1e-12)
    assert intercept == pytest.approx(math.log(3.7), abs=1e-10)


def test_loglog_slope_rejects_degenerate_input():
    with pytest.raises(ValueError):
        util.loglog_slope([(10.0, 0.0), (100.0, 0.0)])
    with pytest.raises(ValueError):
        util.loglog_slope([(10.0, 1.0)])


def test_resolve_cache_dir_precedence(tmp_path, monkeypatch):
    explicit = tmp_path / "explicit"
    env_dir = tmp_path / "from_env"
    monkeypatch.setenv(util.CACHE_ENV, str(env_dir))
    assert util.resolve_cache_dir(explicit) == explicit
    assert explicit.is_dir()
    assert util.resolve_cache_dir() == env_dir
    monkeypatch.delenv(util.CACHE_ENV)
    monkeypatch.chdir(tmp_path)
    assert util.resolve_cache_dir() == tmp_path / ".apml_cache"


def test_sha256_file_matches_hashlib(tmp_path):
    payload = b"x" * (3 << 20) + b"tail"
    target = tmp_path / "blob.bin"
    target.write_bytes(payload)
    assert util.sha256_file(target) == hashlib.sha256(payload).hexdigest()

"""Shared fixtures; keeps sieve caches out of the working tree."""

import os
import tempfile
from pathlib import Path

import pytest

# Must happen before any PrimeLogTable.load call resolves the default dir.
os.environ.setdefault(
    "APML_CACHE_DIR", str(Path(tempfile.gettempdir()) / "apml_test_cache")
)

from apmlab.sieve import PrimeLogTable  # noqa: E402


@pytest.fixture(scope="session")
def table_1e4() -> PrimeLogTable:
    return PrimeLogTable.load(10_000)


@pytest.fixture(scope="session")
def table_1e6() -> PrimeLogTable:
    return PrimeLogTable.load(1_000_000)

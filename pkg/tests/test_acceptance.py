"""End-to-end acceptance gate: one test per shipped guarantee.

Each test is independent and self-timed where a runtime budget is part of
the guarantee.  Tolerances are the published ones, not re-derived; see
apmlab.verify.THRESHOLDS for the full table.
"""

import json
import math
import time
from pathlib import Path

from apmlab import contour, lattice, verify
from apmlab.cli import main as cli_main
from apmlab.constants import c3, c5, c6, c8, h1, u_at_1, z_bc, z_res, zeta_at
from apmlab.localfactors import run_identity_suite
from apmlab.moments import MomentConfig, decomposition_check
from apmlab.series import (
    coefficient_check,
    eval_series_reg,
    f1_series,
    f_series,
    g_series,
    k_series,
    u_series,
    v_series,
)
from apmlab.sieve import PrimeLogTable, sieve_primes
from apmlab.verify import (
    LEMMA_GRID,
    PERRON_SLOPE_GRID,
    exponent_fit,
    lemma_check,
    method2_check,
)


def test_criterion_01_local_identities_exact():
    start = time.perf_counter()
    primes = sieve_primes(100_000)
    result = run_identity_suite(int(p) for p in primes)
    elapsed = time.perf_counter() - start
    assert len(primes) == 9592
    assert result["checked"] == 9592
    assert result["failures"] == []
    assert elapsed <= 60.0


def test_criterion_02_constant_identities():
    assert abs(c5() * c6() * c8() - 1.0) <= 1e-10
    assert abs(c3() * h1() - 1.0) <= 1e-10
    assert abs(u_at_1() - zeta_at(2) * zeta_at(3) / zeta_at(6)) <= 1e-8
    u0 = eval_series_reg(u_series(), 0.0, prime_cutoff=contour.LINE_CUTOFF)
    assert abs(u0 - 1.0) <= 1e-10
    assert abs(z_bc() - z_res()) <= 1e-10


def test_criterion_03_coefficientwise_factorizations():
    n_max = 10_000
    families = [f_series(), f1_series(), u_series()]
    families += [k_series(d, 1) for d in (1, 2, 3)]
    families += [v_series(delta) for delta in (1, 2, 3)]
    families += [g_series(d, 1) for d in (1, 2, 3)]
    for fact in families:
        ok, first_bad = coefficient_check(fact, n_max)
        assert ok, f"{fact.factor_id}: first mismatch at n = {first_bad}"


def test_criterion_04_perron_quadrature_consistency():
    for which in contour.PERRON_TARGETS:
        for X in (50.0, 200.0, 1000.0):
            direct = contour.perron_direct_sum(which, X)
            quad, _ = contour.line_integral(
                contour.perron_spec(which, X), rel_target=1e-4, abs_floor=abs(direct)
            )
            assert abs(quad - direct) <= 1e-3 * abs(direct), (which, X)
    points = [
        (X, contour.perron_direct_sum("weighted1", X) - contour.perron_main_term("weighted1", X))
        for X in PERRON_SLOPE_GRID
    ]
    fit = exponent_fit(points, 0.2)
    assert not fit.degenerate
    assert fit.slope <= 0.2


def test_criterion_05_lemma_residual_slope():
    start = time.perf_counter()
    fit = lemma_check(LEMMA_GRID)
    elapsed = time.perf_counter() - start
    assert tuple(x for x, _ in fit.points) == LEMMA_GRID
    assert not fit.degenerate
    assert fit.slope <= 3.5  # a slope at 3.9+ would mean a main-term bug
    assert elapsed <= 600.0


def test_criterion_06_method2_residual_slopes():
    fits = {}
    for d, delta in ((1, 1), (2, 1), (1, 2), (3, 1)):
        fit = method2_check(d, delta)
        fits[d, delta] = fit
        assert fit.slope <= 4.1, (d, delta, fit.slope)
    fit51 = method2_check(5, 1)
    # the dropped term is O(X^4 / d): five times smaller at d = 5
    assert fit51.intercept < fits[1, 1].intercept


def test_criterion_07_lattice_identity_finite_range():
    grid = [float(x) for x in range(2, 201)] + [50.5, 199.25]
    for X in grid:
        direct, reassembled = lattice.identity_check(X)
        if direct == 0.0:
            assert reassembled == 0.0
        else:
            assert abs(direct - reassembled) <= 1e-9 * abs(direct), X


def test_criterion_08_moment_decomposition(tmp_path):
    for x, Q in ((1e3, 20.0), (1e4, 50.0)):
        table = PrimeLogTable.load(int(x))
        cfg = MomentConfig(x=x, P=0.0, Q=Q)
        assert decomposition_check(table, cfg) <= 1e-9, (x, Q)
    # the weight the expansion oracle settled on is recorded in run manifests
    rc = cli_main(
        ["moments", "--x", "1000", "--Q", "20", "--out-dir", str(tmp_path), "--output", "csv"]
    )
    assert rc == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["decomposition_weight"] == "x3_over_phi"


def test_criterion_09_prime_side_diagnostics(tmp_path):
    start = time.perf_counter()
    result = verify.run_suite("theorem")
    elapsed = time.perf_counter() - start

    # diagnostics must be emitted as files, not just computed
    written = [Path(p) for p in verify.write_suite_csvs(result, tmp_path)]
    names = {p.name for p in written}
    assert {"theorem.csv", "theorem_v_row.csv", "theorem_ratio_rows.csv"} <= names
    assert all(p.stat().st_size > 0 for p in written)

    v_row = result.tables["v_row"][0]
    assert v_row["x"] == 1e6
    assert 0.75 <= v_row["ratio"] <= 1.25

    rows = result.tables["ratio_rows"]
    assert [row["x"] for row in rows] == [1e4, 1e5, 1e6]
    r32 = [row["r32"] for row in rows]
    assert r32[0] > r32[1] > r32[2], r32
    assert elapsed <= 900.0


def test_criterion_10_determinism_across_workers(tmp_path):
    out = {}
    for workers in (1, 8):
        d = tmp_path / f"workers{workers}"
        d.mkdir()
        for suite in ("lemma", "theorem"):
            result = verify.run_suite(suite, workers=workers)
            verify.write_suite_csvs(result, d)
        out[workers] = d
    names = sorted(p.name for p in out[1].iterdir())
    assert names == sorted(p.name for p in out[8].iterdir())
    assert any("lemma" in n for n in names) and any("theorem" in n for n in names)
    for name in names:
        assert (out[1] / name).read_bytes() == (out[8] / name).read_bytes(), name

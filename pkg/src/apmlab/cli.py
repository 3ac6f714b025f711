"""Command-line front end: every subsystem behind one ``apmlab`` entry point.

Subcommands:

  sieve      build or refresh the cached prime/log table
  constants  Euler-product constants with tail bounds, as JSON
  moments    moment sums over a modulus window, with a per-q CSV export
  lattice    squarefree lattice sums tabulated to CSV (header sum_id,X,value)
  integral   a single shifted-line integral at a fixed height and step
  verify     run check suites; exit 0 iff every gating check passes
  report     run all suites and write every CSV table plus a JSON summary

Reproducibility contract: payload files (CSV/JSON) never contain timestamps
or timings, so a rerun with the same effective configuration is
byte-identical.  Wall time and the run timestamp live only in
``manifest.json``, which also echoes the configuration and the SHA-256
digest of every file written (including the cube-expansion weight the
moment decomposition settled on, so result files are self-describing).

Configuration comes from flags, or from ``--config FILE`` (JSON object with
the same keys as the flags); explicit flags win.  Unknown config keys are
rejected.  ``--output json`` (or the ``--json`` shorthand) prints the JSON
payload on stdout and writes it next to the CSVs; ``--output csv`` prints
plain result lines instead and skips the JSON payload file.  Commands whose
only payload is JSON (constants, integral, sieve) always write it.

Exit codes: 0 success / all gating checks pass, 1 verification or
computation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from . import __version__, contour, lattice, verify
from .constants import c2, euler_product, s_pp, s_script, z_bc, z_res
from .moments import (
    DECOMPOSITION_WEIGHT,
    MomentConfig,
    decomposition_check,
    moment_summary,
    write_per_q_csv,
)
from .sieve import PrimeLogTable

__all__ = ["RunConfig", "ConfigError", "main"]

log = logging.getLogger(__name__)

COMMANDS = ("sieve", "constants", "moments", "lattice", "integral", "verify", "report")
INTEGRAL_KINDS = ("E", "Estar", "I", "Id", "Jd", "perron")
LATTICE_SUMS = (
    "Jstar",
    "Jcal",
    "L",
    "psi1_linear",
    "psi1_quadratic",
    "psi1_plain",
    "psi1_log",
)
SUITE_CHOICES = verify.SUITE_NAMES + ("all",)


class ConfigError(ValueError):
    """Bad flags or config file contents (exit code 2)."""


@dataclass
class RunConfig:
    """Effective run configuration: defaults, overlaid by --config, then flags.

    One flat schema shared by all subcommands; each runner checks that the
    fields it needs are present.  Everything here is echoed verbatim into
    manifest.json, and nothing here involves randomness, so the config
    determines every payload byte.
    """

    command: str = ""
    x: float | None = None
    P: float | None = None
    Q: float | None = None
    A: float = 1.0
    X: float | None = None
    X_grid: tuple[float, ...] = ()
    d: int = 1
    Delta: int = 1
    T: float = 2000.0
    step: float = 0.05
    suite: str = "all"
    which: str | None = None
    sum: str = "Jstar"
    kind: str = "weighted1"
    rel_target: float | None = None
    cache_dir: str | None = None
    out_dir: str = "."
    output: str = "json"
    worker_count: int = 1
    csv: str | None = None
    csv_dir: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.output not in ("csv", "json"):
            raise ConfigError(f"output must be 'csv' or 'json', not {self.output!r}")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.suite not in SUITE_CHOICES:
            raise ConfigError(f"suite must be one of {', '.join(SUITE_CHOICES)}")
        if self.which is not None and self.which not in INTEGRAL_KINDS:
            raise ConfigError(f"--which must be one of {', '.join(INTEGRAL_KINDS)}")
        if self.sum not in LATTICE_SUMS:
            raise ConfigError(f"--sum must be one of {', '.join(LATTICE_SUMS)}")
        if self.kind not in contour.PERRON_TARGETS:
            raise ConfigError(f"--kind must be one of {', '.join(contour.PERRON_TARGETS)}")
        if self.d < 1 or self.Delta < 1:
            raise ConfigError("d and Delta must be >= 1")
        if self.T <= 0 or self.step <= 0:
            raise ConfigError("T and step must be positive")
        if self.A <= 0:
            raise ConfigError("A must be positive")
        if self.rel_target is not None and self.rel_target <= 0:
            raise ConfigError("rel_target must be positive")
        for name in ("x", "P", "Q", "X"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ConfigError(f"{name} must be finite and nonnegative")
        if any(not math.isfinite(v) or v <= 0 for v in self.X_grid):
            raise ConfigError("X_grid entries must be positive")


_GRID_SENTINEL = object()


def _coerce_grid(value) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError("X_grid must be a comma list or JSON array of numbers")
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad X_grid entry: {exc}") from exc


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "X_grid" in data:
        data["X_grid"] = _coerce_grid(data["X_grid"])
    return data


def make_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < explicit flags, then schema validation."""
    merged = asdict(RunConfig())
    if getattr(args, "config", None):
        merged.update(_load_config_file(Path(args.config)))
    merged["command"] = args.command
    for key in merged:
        value = getattr(args, key, None)
        if value is not None and key != "command":
            merged[key] = value
    if getattr(args, "echo_json", False):
        merged["output"] = "json"
    if isinstance(merged["X_grid"], str):
        merged["X_grid"] = _coerce_grid(merged["X_grid"])
    merged["X_grid"] = tuple(merged["X_grid"] or ())
    cfg = RunConfig(**merged)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# runners: each returns the payload, the files written, and pass/fail
# ---------------------------------------------------------------------------


@dataclass
class RunArtifacts:
    payload: dict
    files: list[Path] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    ok: bool = True


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")
    return path


def _run_sieve(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    if cfg.x is None:
        raise ConfigError("sieve needs --x")
    table = PrimeLogTable.load(int(cfg.x), cache_dir=cfg.cache_dir, workers=cfg.worker_count)
    cache = table.cache_path(cfg.cache_dir)
    if not cache.exists():
        cache = table.save(cfg.cache_dir)
    payload = {
        "x_max": table.x_max,
        "prime_count": int(len(table.primes)),
        "cache_file": str(cache),
    }
    summary = _write_json(out_dir / "sieve.json", payload)
    lines = [f"primes <= {table.x_max}: {len(table.primes)} (cache {cache})"]
    return RunArtifacts(payload, [cache, summary], lines)


def _run_constants(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    products = (("C3", "C3"), ("C5", "C5"), ("C6", "C6"), ("C8", "C8"),
                ("h1", "H1"), ("Z_prod", "UP"))
    entries = []
    for name, factor_id in products:
        ev = euler_product(factor_id)
        entries.append({
            "name": name,
            "value": ev.value,
            "tail_bound": ev.tail_bound,
            "prime_cutoff": ev.prime_cutoff,
        })
    # Assembled constants: exact zeta/digamma pieces plus log-weighted prime
    # sums whose series tails are below 1e-15 at the documented orders.
    assembled = (("C2", c2()), ("Z_res", z_res()), ("Z_bc", z_bc()),
                 ("S_pp", s_pp()), ("S_script", s_script()))
    for name, value in assembled:
        entries.append({"name": name, "value": value, "tail_bound": 1e-15, "prime_cutoff": 0})
    payload = {"constants": entries}
    written = _write_json(out_dir / "constants.json", payload)
    lines = [f"{e['name']} = {e['value']!r} (tail {e['tail_bound']:.1e})" for e in entries]
    return RunArtifacts(payload, [written], lines)


def _run_moments(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    if cfg.x is None or cfg.Q is None:
        raise ConfigError("moments needs --x and --Q")
    mcfg = MomentConfig(x=cfg.x, P=cfg.P if cfg.P is not None else 0.0, Q=cfg.Q, A=cfg.A)
    table = PrimeLogTable.load(int(cfg.x), cache_dir=cfg.cache_dir, workers=cfg.worker_count)
    report = moment_summary(table, mcfg, workers=cfg.worker_count, keep_per_q=True)
    residual = decomposition_check(table, mcfg, workers=cfg.worker_count)
    per_q_path = out_dir / "moments_per_q.csv"
    write_per_q_csv(per_q_path, report)
    payload = {
        "x": mcfg.x, "P": mcfg.P, "Q": mcfg.Q, "A": mcfg.A,
        "M": report.M, "V": report.V, "U": report.U, "S1": report.S1,
        "decomposition_residual": residual,
        "decomposition_weight": DECOMPOSITION_WEIGHT,
        "small_q_regime": mcfg.small_q_regime,
    }
    files = [per_q_path]
    if cfg.output == "json":
        files.append(_write_json(out_dir / "moments.json", payload))
    lines = [
        f"M  = {report.M!r}",
        f"V  = {report.V!r}",
        f"U  = {report.U!r}",
        f"S1 = {report.S1!r}",
        f"decomposition residual {residual:.3e} (weight {DECOMPOSITION_WEIGHT})",
    ]
    return RunArtifacts(payload, files, lines)


def _run_lattice(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    grid = cfg.X_grid or ((cfg.X,) if cfg.X is not None else ())
    if not grid:
        raise ConfigError("lattice needs --X or --X-grid")
    results = []
    for X in grid:
        if cfg.sum == "Jstar":
            res = lattice.jstar(X, workers=cfg.worker_count)
        elif cfg.sum == "Jcal":
            res = lattice.jcal(X, workers=cfg.worker_count)
        elif cfg.sum == "L":
            res = lattice.l_sum(cfg.d, cfg.Delta, X)
        else:
            res = lattice.psi1_sums(cfg.sum.removeprefix("psi1_"), X)
        results.append(res)
    csv_path = Path(cfg.csv) if cfg.csv else out_dir / "lattice.csv"
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.write("sum_id,X,value\n")
        for r in results:
            fh.write(f"{r.sum_id},{r.X!r},{r.value!r}\n")
    payload = {
        "sum": cfg.sum, "d": cfg.d, "Delta": cfg.Delta,
        "rows": [
            {"sum_id": r.sum_id, "X": r.X, "value": r.value, "term_count": r.term_count}
            for r in results
        ],
    }
    lines = [f"{r.sum_id}({r.X!r}) = {r.value!r} ({r.term_count} terms)" for r in results]
    return RunArtifacts(payload, [csv_path], lines)


def _integral_spec(cfg: RunConfig) -> contour.LineIntegralSpec:
    X, T, h = cfg.X, cfg.T, cfg.step
    if cfg.which == "E":
        return contour.e_spec(X, T=T, h=h)
    if cfg.which == "Estar":
        return contour.estar_spec(X, T=T, h=h)
    if cfg.which == "I":
        return contour.ivar_spec(X, T=T, h=h)
    if cfg.which == "Id":
        return contour.id_spec(cfg.d, cfg.Delta, X, T=T, h=h)
    if cfg.which == "Jd":
        return contour.jd_spec(cfg.d, cfg.Delta, X, T=T, h=h)
    return contour.perron_spec(cfg.kind, X, T=T, h=h)


def _run_integral(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    if cfg.which is None or cfg.X is None:
        raise ConfigError("integral needs --which and --X")
    spec = _integral_spec(cfg)
    value, err = contour.line_integral(
        spec, rel_target=cfg.rel_target, abs_floor=0.0, workers=cfg.worker_count
    )
    payload = {
        "which": cfg.which, "X": cfg.X, "T": spec.T, "step": spec.h,
        "d": cfg.d, "Delta": cfg.Delta,
        "value": value, "error_estimate": err,
    }
    if cfg.which == "perron":
        payload["kind"] = cfg.kind
        payload["direct_sum"] = contour.perron_direct_sum(cfg.kind, cfg.X)
    written = _write_json(out_dir / "integral.json", payload)
    lines = [f"{cfg.which}(X={cfg.X!r}) = {value!r} +- {err:.3e}"]
    return RunArtifacts(payload, [written], lines)


def _suite_payload(result: verify.SuiteResult) -> dict:
    # elapsed deliberately omitted: payloads must be byte-identical on rerun
    return {
        "name": result.name,
        "passed": result.passed,
        "checks": [
            {"name": c.name, "ok": c.ok, "value": c.value, "bound": c.bound,
             "gating": c.gating, "detail": c.detail}
            for c in result.checks
        ],
        "tables": result.tables,
    }


def _run_suites(names: Sequence[str], cfg: RunConfig, csv_dir: Path | None,
                out_dir: Path, payload_name: str) -> RunArtifacts:
    results: list[verify.SuiteResult] = []
    files: list[Path] = []
    if csv_dir is not None:
        csv_dir.mkdir(parents=True, exist_ok=True)
    for name in names:
        result = verify.run_suite(name, workers=cfg.worker_count)
        results.append(result)
        for line in result.lines():
            log.info("%s", line)
        if csv_dir is not None:
            files.extend(Path(p) for p in verify.write_suite_csvs(result, csv_dir))
    ok = all(r.passed for r in results)
    payload = {"suites": [_suite_payload(r) for r in results], "passed": ok}
    if cfg.output == "json":
        files.append(_write_json(out_dir / payload_name, payload))
    lines = [line for r in results for line in r.lines()]
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    return RunArtifacts(payload, files, lines, ok=ok)


def _run_verify(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    names = verify.SUITE_NAMES if cfg.suite == "all" else (cfg.suite,)
    csv_dir = Path(cfg.csv_dir) if cfg.csv_dir else None
    return _run_suites(names, cfg, csv_dir, out_dir, "verify.json")


def _run_report(cfg: RunConfig, out_dir: Path) -> RunArtifacts:
    # report = all suites, CSV tables always emitted, one JSON summary
    return _run_suites(verify.SUITE_NAMES, cfg, out_dir, out_dir, "report.json")


_RUNNERS: dict[str, Callable[[RunConfig, Path], RunArtifacts]] = {
    "sieve": _run_sieve,
    "constants": _run_constants,
    "moments": _run_moments,
    "lattice": _run_lattice,
    "integral": _run_integral,
    "verify": _run_verify,
    "report": _run_report,
}


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, cfg: RunConfig, artifacts: RunArtifacts,
                   wall_time: float) -> Path:
    written = {}
    for path in artifacts.files:
        try:
            key = str(path.resolve().relative_to(out_dir.resolve()))
        except ValueError:
            key = str(path)
        written[key] = _sha256(path)
    manifest = {
        "tool": "apmlab",
        "version": __version__,
        "command": cfg.command,
        "config": asdict(cfg),
        "decomposition_weight": DECOMPOSITION_WEIGHT,
        "passed": artifacts.ok,
        "wall_time_s": round(wall_time, 3),
        "timestamp_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "written": written,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="ascii")
    return path


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apmlab",
        description="numeric laboratory for moments of primes in arithmetic progressions",
    )
    parser.add_argument("--version", action="version", version=f"apmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", metavar="FILE",
                        help="JSON config file; explicit flags take precedence")
        sp.add_argument("--cache-dir", dest="cache_dir", metavar="DIR",
                        help="prime-table cache directory (default: APML_CACHE_DIR or ./.apml_cache)")
        sp.add_argument("--out-dir", dest="out_dir", metavar="DIR",
                        help="where payloads and manifest.json go (default: .)")
        sp.add_argument("--workers", dest="worker_count", type=int, metavar="N",
                        help="parallel workers; results are identical for any value")
        sp.add_argument("--output", choices=("csv", "json"),
                        help="payload selector: json prints/writes the JSON payload")
        sp.add_argument("--json", dest="echo_json", action="store_true",
                        help="shorthand for --output json")
        sp.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v progress, -vv debug (stderr)")

    sp = sub.add_parser("sieve", help="build or refresh the cached prime/log table")
    sp.add_argument("--x", type=float, help="sieve primes up to this bound")
    add_common(sp)

    sp = sub.add_parser("constants", help="Euler-product constants as JSON")
    add_common(sp)

    sp = sub.add_parser("moments", help="moment sums over P < q <= Q")
    sp.add_argument("--x", type=float, help="prime cutoff")
    sp.add_argument("--P", type=float, help="lower modulus bound (default 0)")
    sp.add_argument("--Q", type=float, help="upper modulus bound")
    sp.add_argument("--A", type=float, help="log-power parameter (default 1)")
    add_common(sp)

    sp = sub.add_parser("lattice", help="squarefree lattice sums to CSV")
    sp.add_argument("--sum", choices=LATTICE_SUMS, help="which sum (default Jstar)")
    sp.add_argument("--X", type=float, help="single evaluation point")
    sp.add_argument("--X-grid", dest="X_grid", metavar="a,b,c",
                    help="comma list of evaluation points")
    sp.add_argument("--d", type=int, help="divisor parameter of the L sum")
    sp.add_argument("--Delta", type=int, help="squarefree modulus parameter")
    sp.add_argument("--csv", metavar="FILE", help="CSV path (default OUT_DIR/lattice.csv)")
    add_common(sp)

    sp = sub.add_parser("integral", help="one shifted-line integral")
    sp.add_argument("--which", choices=INTEGRAL_KINDS, help="integral family")
    sp.add_argument("--X", type=float, help="argument of the integral")
    sp.add_argument("--T", type=float, help="integration height (default 2000)")
    sp.add_argument("--step", type=float, help="quadrature step (default 0.05)")
    sp.add_argument("--d", type=int, help="divisor parameter for Id/Jd")
    sp.add_argument("--Delta", type=int, help="modulus parameter for Id/Jd")
    sp.add_argument("--kind", choices=contour.PERRON_TARGETS,
                    help="perron weight (default weighted1)")
    sp.add_argument("--rel-target", dest="rel_target", type=float,
                    help="refine until this relative error (default: single pass)")
    add_common(sp)

    sp = sub.add_parser("verify", help="run check suites")
    sp.add_argument("--suite", choices=SUITE_CHOICES, help="suite to run (default all)")
    sp.add_argument("--csv-dir", dest="csv_dir", metavar="DIR",
                    help="also write per-suite check/table CSVs here")
    add_common(sp)

    sp = sub.add_parser("report", help="all suites + all CSV tables + JSON summary")
    add_common(sp)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except ConfigError as exc:
        print(f"apmlab: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        artifacts = _RUNNERS[cfg.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"apmlab: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"apmlab: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"apmlab: {exc}", file=sys.stderr)
        return 1
    wall_time = time.perf_counter() - start
    write_manifest(out_dir, cfg, artifacts, wall_time)

    if cfg.output == "json":
        print(json.dumps(artifacts.payload, indent=2, sort_keys=True))
    else:
        for line in artifacts.lines:
            print(line)
    return 0 if artifacts.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

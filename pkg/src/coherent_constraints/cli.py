"""Command-line entry point.

Usage::

    coherent-constraints example1 --nmax 30 --format json
    coherent-constraints trotter --T 2 --slices 10,20,40 --output trotter.csv --format csv
    coherent-constraints gauge --config run.json

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or I/O error.
Reports go to ``--output``, else to ``$COHERENT_CONSTRAINTS_OUTPUT_DIR/<subcommand>.<format>``
when that variable is set, else to stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import fields
from pathlib import Path

from . import __version__
from .report import RunReport, emit_report
from .suites import DEFAULT_NMAX, PLANNED, SUBCOMMANDS, SUITES, RunConfig

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "COHERENT_CONSTRAINTS_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coherent-constraints",
                                     description="Projected coherent-state checks for constrained systems.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        # defaults are None so that explicitly given flags can override a config file
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--nmax", type=int)
        p.add_argument("--cutoffs", type=_int_list, help="cutoff list for projector-suite")
        p.add_argument("--scheme", choices=("per_mode", "total_quanta"))
        p.add_argument("--L", dest="half_width", type=float, help="phase-space box half width")
        p.add_argument("--points", type=int, help="grid points per axis")
        p.add_argument("--T", type=float, help="total evolution time")
        p.add_argument("--slices", type=_int_list)
        p.add_argument("--grid", type=int, help="labels per side of the kernel grid")
        p.add_argument("--seed", type=int)
        p.add_argument("--schedules", type=int)
        p.add_argument("--gauge-slices", dest="gauge_slices", type=int)
        p.add_argument("--output")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--timings", action="store_true", default=None,
                       help="include wall-clock timings (makes output non-reproducible)")
    return parser


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, an optional config file, and flags (flags win)."""
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)} - {"subcommand", "checks"}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key, val in vars(args).items():
        if key not in ("config", "subcommand") and val is not None:
            values[key] = val
    for key in ("cutoffs", "slices"):
        if key in values:
            values[key] = tuple(values[key])

    cfg = RunConfig(subcommand=args.subcommand, **values)
    if cfg.nmax is None:
        cfg.nmax = DEFAULT_NMAX[cfg.subcommand]
    if cfg.subcommand == "example1" and cfg.scheme == "per_mode":
        warnings.warn("example1 needs the rotation-symmetric total_quanta truncation; switching")
        cfg.scheme = "total_quanta"
    _validate(cfg)
    cfg.checks = PLANNED[cfg.subcommand](cfg)
    return cfg


def _validate(cfg: RunConfig):
    positive = {"half_width": cfg.half_width, "points": cfg.points, "T": cfg.T, "grid": cfg.grid,
                "schedules": cfg.schedules, "gauge_slices": cfg.gauge_slices}
    if cfg.nmax is not None:
        positive["nmax"] = cfg.nmax
    for key, val in positive.items():
        if not val > 0:
            raise ConfigError(f"{key} must be positive, got {val}")
    if any(n <= 0 for n in cfg.cutoffs) or any(n <= 0 for n in cfg.slices):
        raise ConfigError("cutoffs and slices must be positive")
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"unknown format {cfg.format!r}")


def run_suite(cfg: RunConfig) -> RunReport:
    report = RunReport(cfg.as_dict(), version=__version__)
    start = time.perf_counter()
    report.checks = SUITES[cfg.subcommand](cfg)
    report.timings[cfg.subcommand] = time.perf_counter() - start
    names = [c.name for c in report.checks]
    if sorted(names) != sorted(cfg.checks) or len(set(names)) != len(names):
        raise RuntimeError(f"suite produced {names}, planned {cfg.checks}")
    return report


def _output_path(cfg: RunConfig) -> Path | None:
    if cfg.output:
        return Path(cfg.output)
    folder = os.environ.get(OUTPUT_DIR_ENV)
    if folder:
        return Path(folder) / f"{cfg.subcommand}.{cfg.format}"
    return None


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        log.error("error: %s", exc)
        return 2

    path = _output_path(cfg)
    if path is not None and not path.parent.is_dir():
        log.error("error: output directory %s does not exist", path.parent)
        return 2

    report = run_suite(cfg)
    try:
        text = emit_report(report, cfg.format, path, include_timings=cfg.timings)
    except OSError as exc:
        log.error("error: cannot write report: %s", exc)
        return 2
    if path is None:
        sys.stdout.write(text)
    for c in report.checks:
        log.info("%-36s %-5s value=%.3e", c.name, "PASS" if c.passed else "FAIL", c.value)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())

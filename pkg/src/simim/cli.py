"""Command-line front end: ``simim run`` and ``simim validate``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from typing import Sequence

from .config import REPORT_FORMATS, ConfigError, RunConfig, load_config, write_default_config
from .reports import write_reports
from .runner import EXIT_CONFIG, EXIT_OK, run

OUT_DIR_ENV = "SIMIM_OUT_DIR"


def _formats(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in REPORT_FORMATS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {','.join(REPORT_FORMATS)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simim", description="Counterparty-specific IM calibration")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment and write reports")
    p_run.add_argument("--config", required=True, help="JSON run config")
    p_run.add_argument("--seed", type=int, help="override simulation.seed")
    p_run.add_argument("--out", help=f"output directory (overrides ${OUT_DIR_ENV} and the config)")
    p_run.add_argument("--paths", type=int, help="override simulation.n_paths")
    p_run.add_argument("--format", type=_formats, help="comma-separated report formats, e.g. csv,json")
    p_run.add_argument("--workers", type=int, help="override simulation.workers")

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("--config", required=True)

    p_init = sub.add_parser("init-config", help="write the default config")
    p_init.add_argument("path")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.paths is not None:
        changes["n_paths"] = args.paths
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.format is not None:
        changes["formats"] = args.format
    env_dir = os.environ.get(OUT_DIR_ENV)
    if args.out is not None:
        changes["output_dir"] = args.out
    elif env_dir:
        changes["output_dir"] = env_dir
    # replace() re-runs validation
    return dataclasses.replace(config, **changes) if changes else config


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "init-config":
        print(write_default_config(args.path))
        return EXIT_OK
    try:
        config = load_config(args.config)
        if args.command == "run":
            config = apply_overrides(config, args)
    except ConfigError as exc:
        print(f"simim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"{args.config}: ok ({len(config.trades)} trades, {len(config.ratings)} ratings, "
              f"{config.n_paths} paths)")
        return EXIT_OK

    report = run(config)
    try:
        paths = write_reports(report, config.output_dir, config.formats)
    except OSError as exc:
        print(f"simim: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    for label, rating in report.failures:
        print(f"simim: alpha solve failed for {label}/{rating}", file=sys.stderr)
    return report.status


if __name__ == "__main__":
    sys.exit(main())

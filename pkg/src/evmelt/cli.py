"""Command-line entry point.

One binary, one subcommand per pipeline; every run is fully determined by
the config plus seed.  Exit codes: 0 success, 2 config parse error,
3 validation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from importlib.metadata import PackageNotFoundError, version as pkg_version

from .codec import CodecError
from .config import DEFAULTS, ConfigError, load_config
from .pipeline import DEMO_OVERRIDES, SUBCOMMANDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def _version() -> str:
    try:
        return pkg_version("evmelt")
    except PackageNotFoundError:
        return "unknown"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evmelt",
        description="Event-camera simulation and melt-pool monitoring pipelines.",
    )
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", type=Path, default=None, help="config file path")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument(
            "--set",
            dest="sets",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config value (repeatable)",
        )
    return parser


def _parse_sets(sets: List[str]) -> dict:
    overrides = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got '{item}'")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value
    return overrides


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_sets(args.sets)
        cfg = load_config(args.config, overrides, extra_defaults=DEMO_OVERRIDES.get(args.command))
        if args.seed is not None:
            cfg["seed"] = args.seed
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        artifacts = SUBCOMMANDS[args.command](cfg, args.out)
    except (ConfigError, ValueError, CodecError) as e:
        print(f"error: validation: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return EXIT_IO
    for p in artifacts:
        print(p)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

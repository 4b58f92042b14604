"""Command line entry point: ``bbgkz <command> --config cfg.json``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .commands import COMMANDS
from .config import ConfigError, load_config
from .poly_roots import DegenerateParameterError

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbgkz", description="Verify rank-2 bbGKZ solution pairings.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON run configuration (defaults apply if omitted)")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be non-negative")
            cfg = replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = COMMANDS[args.command](cfg)
    except DegenerateParameterError as exc:
        print(f"degenerate parameter: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    text = report.dumps(args.format)
    out = args.out or cfg.output
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

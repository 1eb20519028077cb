"""Command-line interface.

Subcommands:

* `run <config>`: every configured check
* `check-conditions <config>`: only the sampled condition and drift checks
* `strong-rate <config>`: only the strong-rate checks
* `compare <config>`: only the comparison checks
* `describe <config>`: the resolved config and derived thresholds, no simulation
* `list-examples`: the packaged configs

A config is a path to a JSON file or the name of a packaged example, with
or without an `examples/` prefix. Exit status is 0 when every verdict
matches its expectation, 2 when one does not, and 1 on a configuration
error. A check configured with `"expect": "fail"` matches when it fails.
"""

import argparse
import json
import logging
import os
from pathlib import Path
import sys
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from tamedlib import __version__
from tamedlib.cli.config import SAMPLED_CHECKS, ExperimentConfig, load_config
from tamedlib.cli.output import write_artifacts
from tamedlib.cli.runner import describe_experiment, run_experiment
from tamedlib.errors import ConfigurationError, EstimationError

logger = logging.getLogger(__name__)

EXAMPLES_PATH = Path(__file__).parent / "examples"
LOG_LEVEL_ENV = "TAMEDLIB_LOG_LEVEL"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK_FAILED = 2

EXIT_STATUS_HELP = (
    'exit status: 0 when every verdict matches its expectation, so a check with "expect": "fail" counts '
    "as matched when it fails; 2 when a verdict does not match; 1 on a configuration error"
)

# check kinds each subcommand runs; None means all
SUBCOMMAND_KINDS: Dict[str, Optional[FrozenSet[str]]] = {
    "run": None,
    "check-conditions": SAMPLED_CHECKS,
    "strong-rate": frozenset({"strong_rate"}),
    "compare": frozenset({"comparison"}),
}


def resolve_config_path(name: str) -> Path:
    """Return the config file for a path or a packaged example name."""
    path = Path(name)
    if path.is_file():
        return path
    stem = name[len("examples/") :] if name.startswith("examples/") else name
    if stem.endswith(".json"):
        stem = stem[: -len(".json")]
    packaged = EXAMPLES_PATH / f"{stem}.json"
    if packaged.is_file():
        return packaged
    raise ConfigurationError(f"no config file or packaged example named {name!r}")


def list_examples() -> List[Tuple[str, str]]:
    """Return (name, description) for every packaged config."""
    return [(path.stem, load_config(path).description) for path in sorted(EXAMPLES_PATH.glob("*.json"))]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tamedlib", description="Structure-preserving explicit schemes for SDEs.", epilog=EXIT_STATUS_HELP
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help=f"log level (default from {LOG_LEVEL_ENV}, else INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for command, help_text in (
        ("run", "run every configured check"),
        ("check-conditions", "run the sampled condition and drift checks"),
        ("strong-rate", "run the strong-rate checks"),
        ("compare", "run the comparison checks"),
    ):
        sub = commands.add_parser(command, help=help_text)
        sub.add_argument("config", help="config path or packaged example name")
        sub.add_argument("--seed", type=int, default=None, help="override the config seed")
        sub.add_argument("--workers", type=int, default=None, help="worker threads (default from TAMEDLIB_WORKERS)")
        sub.add_argument("--out-dir", default=None, help="directory for the artifacts")
        sub.add_argument("--emit-gnuplot", action="store_true", help="also write a gnuplot script")
    describe = commands.add_parser("describe", help="print the resolved config and derived thresholds")
    describe.add_argument("config", help="config path or packaged example name")
    describe.add_argument("--seed", type=int, default=None, help="override the config seed")
    commands.add_parser("list-examples", help="list the packaged example configs")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(resolve_config_path(args.config))
    return config.with_overrides(
        seed=args.seed,
        workers=getattr(args, "workers", None),
        out_dir=getattr(args, "out_dir", None),
        emit_gnuplot=getattr(args, "emit_gnuplot", False),
    )


def _run(args: argparse.Namespace, kinds: Optional[FrozenSet[str]]) -> int:
    config = _load(args)
    if kinds is not None and not any(check.kind in kinds for check in config.analysis):
        raise ConfigurationError(f"{config.name} has no checks of kind {sorted(kinds)} for {args.command}")
    outcome = run_experiment(config, kinds=kinds)
    write_artifacts(outcome)
    for check in outcome.checks:
        verdict = "pass" if check.report.passed else "fail"
        marker = "" if check.matched else "  <-- expected " + check.expect
        print(f"{check.label}: {verdict}{marker}")
    return EXIT_OK if outcome.passed else EXIT_CHECK_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "list-examples":
            for name, description in list_examples():
                print(f"{name}\t{description}")
            return EXIT_OK
        if args.command == "describe":
            print(json.dumps(describe_experiment(_load(args)), sort_keys=True, indent=2, ensure_ascii=False))
            return EXIT_OK
        return _run(args, SUBCOMMAND_KINDS[args.command])
    except (ValidationError, ConfigurationError, OSError) as exc:
        logger.debug("configuration error", exc_info=True)
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

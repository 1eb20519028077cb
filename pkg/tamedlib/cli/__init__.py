"""The configuration-driven experiment runner.

A run reads one JSON config, derives and logs the thresholds, simulates,
evaluates the configured checks and writes `<name>.report.json` and
`<name>.trace.csv`. Packaged configs under `examples/` reproduce the
worked examples of the method.
"""

from .config import (
    ExperimentConfig,
    load_config,
)
from .main import EXAMPLES_PATH, list_examples, main, resolve_config_path
from .output import ReportDocument, build_report, report_schema, write_artifacts
from .runner import CheckOutcome, ExperimentRunner, RunOutcome, describe_experiment, run_experiment

__all__ = [
    # config
    "ExperimentConfig",
    "load_config",
    # main
    "EXAMPLES_PATH",
    "list_examples",
    "main",
    "resolve_config_path",
    # output
    "ReportDocument",
    "build_report",
    "report_schema",
    "write_artifacts",
    # runner
    "CheckOutcome",
    "ExperimentRunner",
    "RunOutcome",
    "describe_experiment",
    "run_experiment",
]

"""Artifacts of a run: `<name>.report.json`, `<name>.trace.csv` and optionally `<name>.gp`.

The JSON report is validated against `ReportDocument` before it is
written; `report_schema()` publishes the schema. The CSV has the fixed
columns step, time, statistic, value, standard_error with floats in
shortest round-trip form. When a run holds several reports, each
statistic is prefixed with the report label, as in `v_integrability@h=0.0625/mean_V`.
Runtimes are logged and never written, so equal config and seed give
byte-identical artifacts.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from tamedlib.cli.runner import RunOutcome

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("step", "time", "statistic", "value", "standard_error")


class CheckDocument(BaseModel):
    """One check in the JSON report."""

    model_config = ConfigDict(extra="forbid")

    label: str
    expect: str = Field(pattern="^(pass|fail)$")
    matched: bool
    kind: str
    passed: bool
    bound: Optional[float]
    bound_description: str
    measured: Dict[str, Any]
    fit: Optional[Dict[str, Any]]
    notes: List[str]
    inputs: Dict[str, Any]


class ReportDocument(BaseModel):
    """The JSON report of one run."""

    model_config = ConfigDict(extra="forbid")

    name: str
    description: str
    config_digest: str = Field(pattern="^[0-9a-f]{64}$")
    config: Dict[str, Any]
    derived: Dict[str, Any]
    passed: bool
    checks: List[CheckDocument]


def report_schema() -> Dict[str, Any]:
    """Return the JSON schema every report validates against."""
    return ReportDocument.model_json_schema()


def build_report(outcome: RunOutcome) -> ReportDocument:
    """Return the validated report document of `outcome`."""
    config = outcome.config
    checks = [
        {"label": check.label, "expect": check.expect, "matched": check.matched, **check.report.to_dict()}
        for check in outcome.checks
    ]
    return ReportDocument.model_validate(
        {
            "name": config.name,
            "description": config.description,
            "config_digest": config.digest(),
            "config": config.canonical(),
            "derived": _finite(outcome.derived),
            "passed": outcome.passed,
            "checks": checks,
        }
    )


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    return value


def _number(value: float) -> str:
    return repr(float(value))


def write_report(outcome: RunOutcome, path: Path) -> None:
    document = build_report(outcome)
    with path.open("w", encoding="utf-8") as f:
        json.dump(document.model_dump(mode="json"), f, sort_keys=True, indent=2, ensure_ascii=False)
        f.write("\n")


def write_trace(outcome: RunOutcome, path: Path) -> List[str]:
    """Write the trace CSV and return the statistic names in order of first appearance."""
    prefixed = len(outcome.checks) > 1
    statistics: List[str] = []
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for check in outcome.checks:
            for row in check.report.rows:
                name = f"{check.label}/{row.statistic}" if prefixed else row.statistic
                if name not in statistics:
                    statistics.append(name)
                writer.writerow([row.step, _number(row.time), name, _number(row.value), _number(row.standard_error)])
    return statistics


def write_gnuplot(name: str, statistics: List[str], path: Path) -> None:
    """Write a plain gnuplot script plotting every statistic of the trace CSV against time."""
    csv_name = f"{name}.trace.csv"
    lines = [
        'set datafile separator ","',
        "set terminal pngcairo size 900,600",
        f'set output "{name}.png"',
        'set xlabel "time"',
        "set logscale y",
        "set key outside",
    ]
    plots = [f'"{csv_name}" skip 1 using 2:(strcol(3) eq "{s}" ? $4 : 1/0) with lines title "{s}"' for s in statistics]
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    with path.open("w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_artifacts(outcome: RunOutcome, out_dir: Optional[Path] = None) -> List[Path]:
    """Write the artifacts of `outcome` and return their paths."""
    config = outcome.config
    directory = Path(config.output.dir) if out_dir is None else out_dir
    directory.mkdir(parents=True, exist_ok=True)
    name = config.artifact_name
    report_path = directory / f"{name}.report.json"
    trace_path = directory / f"{name}.trace.csv"
    write_report(outcome, report_path)
    statistics = write_trace(outcome, trace_path)
    written = [report_path, trace_path]
    if config.output.emit_gnuplot:
        script = directory / f"{name}.gp"
        write_gnuplot(name, statistics, script)
        written.append(script)
    for check in outcome.checks:
        if check.report.runtime is not None:
            logger.debug("%s runtime %.3f s", check.label, check.report.runtime)
    logger.info("wrote %s", ", ".join(str(p) for p in written))
    return written

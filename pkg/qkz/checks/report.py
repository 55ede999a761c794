"""
JSON-lines reports.

Each CheckReport becomes one line. Floats are written with 17 significant
digits so a re-read value is the same double, complex values become
[re, im] pairs and non-finite numbers become null.
"""

import json
import logging
import math
from dataclasses import asdict
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import numpy as np
from jsonschema import Draft202012Validator
from rich.table import Table

from .base import CheckReport

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).with_name("report_schema.json")


def schema_path() -> Path:
    return SCHEMA_PATH


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    with open(SCHEMA_PATH) as f:
        schema = json.load(f)
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def to_jsonable(value: Any) -> Any:
    """Plain Python structure with complex values as [re, im]."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def _encode(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"cannot encode {type(value).__name__} in a report")


def report_to_dict(report: CheckReport) -> Dict[str, Any]:
    record = {"schema_version": SCHEMA_VERSION}
    record.update(to_jsonable(asdict(report)))
    return record


def dumps_report(report: Union[CheckReport, Dict[str, Any]]) -> str:
    """One JSON line for a report."""
    record = report if isinstance(report, dict) else report_to_dict(report)
    return _encode(to_jsonable(record))


def validate_report(record: Dict[str, Any]) -> None:
    """Raise jsonschema's ValidationError when the record does not match the shipped schema."""
    _validator().validate(record)


def write_reports(reports: Iterable[CheckReport], path: Union[str, Path]) -> Path:
    """Write reports as JSON lines in the given order; every line is validated first."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for report in reports:
            line = dumps_report(report)
            validate_report(json.loads(line))
            f.write(line + "\n")
    logger.info(f"Report written to {path}")
    return path


def read_reports(path: Union[str, Path]) -> List[Dict[str, Any]]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def summary_table(reports: Iterable[CheckReport], title: str = "qkz verification") -> Table:
    """Rich table with one row per report."""
    table = Table(title=title)
    table.add_column("Check", style="cyan")
    table.add_column("Inputs")
    table.add_column("Worst residual", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Status")

    for report in reports:
        if report.error:
            status = "[red]✗ error[/red]"
        elif report.passed:
            status = "[green]✓ pass[/green]"
        else:
            status = "[red]✗ fail[/red]"
        table.add_row(
            report.check,
            _inputs_label(report.inputs),
            f"{report.worst_residual:.3e}" if report.residuals else "-",
            f"{report.tolerance:.1e}",
            status,
        )
    return table


def _inputs_label(inputs: Dict[str, Any]) -> str:
    parts = []
    for key in ("n", "N", "levels", "anchors", "kind"):
        if key in inputs:
            parts.append(f"{key}={inputs[key]}")
    if "x" in inputs and "N" not in inputs:
        parts.append(f"N={len(inputs['x'])}")
    return ", ".join(parts) or "-"


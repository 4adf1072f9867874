"""
Report Agent
-------------
Turns EmpiricalReports into the two machine-readable output formats:

  - JSON  one object per report (rows, extras, overall pass flag); floats use
          the shortest round-trip repr, non-finite values become null
  - CSV   long format, one row per compared statistic, fixed header
          experiment,param,replicate_count,statistic,predicted,observed,std_error
          with every number written as %.17g

Neither format carries timestamps or run times, so equal inputs give
byte-identical files.

Usage
-----
  from agents.report_agent import ReportAgent
  text = ReportAgent().render([report], fmt="csv")
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, List, Optional

from errors import InvalidParameterError
from models.report_model import EmpiricalReport

CSV_COLUMNS = [
    "experiment", "param", "replicate_count", "statistic",
    "predicted", "observed", "std_error",
]
FORMATS = ("json", "csv")


class ReportAgent:

    def render(self, reports: Iterable[EmpiricalReport], fmt: str = "json") -> str:
        reports = list(reports)
        if fmt == "json":
            return self.to_json(reports)
        if fmt == "csv":
            return self.to_csv(reports)
        raise InvalidParameterError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")

    def to_json(self, reports: List[EmpiricalReport]) -> str:
        body = [r.to_dict() for r in reports]
        payload = body[0] if len(body) == 1 else {"reports": body, "passed": all(r.passed for r in reports)}
        return dump_json(payload)

    def to_csv(self, reports: List[EmpiricalReport]) -> str:
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            for row in report.rows:
                writer.writerow([
                    report.experiment,
                    report.param,
                    report.replicates,
                    row.statistic,
                    _num(row.predicted),
                    _num(row.observed),
                    _num(row.std_error),
                ])
        return output.getvalue()

    def summary_line(self, report: EmpiricalReport) -> str:
        """One-line verdict for logs: experiment, param, failing statistics."""
        failed = report.check()
        if not failed:
            return f"{report.experiment} [{report.param}] passed {len(report.rows)} row(s)"
        names = ", ".join(f"{r.statistic} (observed {_num(r.observed)}, predicted {_num(r.predicted)})" for r in failed)
        return f"{report.experiment} [{report.param}] FAILED: {names}"


# ── Number formatting ──────────────────────────────────────────────────────

def _num(x: Optional[float]) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _clean(obj):
    # json.dumps would write NaN / Infinity, which is not JSON
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):      # numpy scalars
        return _clean(obj.item())
    return obj


def dump_json(payload) -> str:
    return json.dumps(_clean(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def flatten(payload, prefix: str = "") -> List[tuple]:
    """Nested dicts and lists as (dotted.key, value) pairs in insertion order."""
    if isinstance(payload, dict):
        items = payload.items()
    elif isinstance(payload, (list, tuple)):
        items = enumerate(payload)
    else:
        return [(prefix, payload)]
    out: List[tuple] = []
    for key, value in items:
        out.extend(flatten(value, f"{prefix}.{key}" if prefix else str(key)))
    return out


def dump_key_value_csv(payload: dict) -> str:
    """Two-column CSV (key,value) of a stream or analyze answer."""
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\r\n")
    writer.writerow(["key", "value"])
    for key, value in flatten(payload):
        writer.writerow([key, _cell(value)])
    return output.getvalue()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _num(value)
    return str(value)

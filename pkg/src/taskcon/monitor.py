"""Fulfillment monitoring: route measurement records onto resolved matrix
cells and decide, per cell, whether the pass rate reaches a quantile.

Pass rates are compared as exact fractions so that 19 of 20 samples meets a
0.95 quantile and misses a 0.99 one without float rounding in between.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .model import Comparator, Constraint, ConstraintMatrix, Resolved


class NoResolvedCellsError(Exception):
    """The matrix holds no resolved cell, so there is nothing to monitor."""

    def __init__(self) -> None:
        super().__init__("matrix has no resolved cells to monitor")


@dataclass(frozen=True)
class MonitorRecord:
    """One measurement: a metric value observed while performing a task."""

    task: str
    metric: str
    value: Decimal
    ts: str | None = None


@dataclass(frozen=True)
class CellReport:
    """Per-cell outcome. ``fulfilled`` is None when no sample arrived."""

    interest_id: str
    task_name: str
    constraint: Constraint
    samples: int
    passes: int
    fulfilled: bool | None


@dataclass(frozen=True)
class FulfillmentReport:
    quantile: Fraction
    cells: tuple[CellReport, ...]
    orphans: int
    malformed: int = 0

    def all_fulfilled(self) -> bool:
        """True when every cell that received samples met its quantile."""
        return all(c.fulfilled for c in self.cells if c.fulfilled is not None)


def evaluate_point(constraint: Constraint, value: Decimal) -> bool:
    """Apply the comparator strictly: a boundary value fails < and >."""
    threshold = constraint.threshold
    if constraint.comparator is Comparator.LT:
        return value < threshold
    if constraint.comparator is Comparator.LE:
        return value <= threshold
    if constraint.comparator is Comparator.GT:
        return value > threshold
    return value >= threshold


def _normalize_quantile(quantile) -> Fraction:
    try:
        q = Fraction(str(quantile))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"quantile must be a number, got {quantile!r}") from exc
    if not 0 < q <= 1:
        raise ValueError(f"quantile must be in (0, 1], got {quantile}")
    return q


def fulfillment_report(matrix: ConstraintMatrix, records, quantile,
                       malformed: int = 0) -> FulfillmentReport:
    """Count, for every resolved cell, how many matching records pass its
    constraint; a record that matches no resolved cell counts as an orphan.
    """
    q = _normalize_quantile(quantile)
    targets = []
    for interest_id in matrix.interests:
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            if isinstance(cell.resolution, Resolved):
                targets.append((interest_id, task_name, cell.resolution.constraint))
    if not targets:
        raise NoResolvedCellsError()

    samples = {t[:2]: 0 for t in targets}
    passes = {t[:2]: 0 for t in targets}
    orphans = 0
    for record in records:
        matched = False
        for interest_id, task_name, constraint in targets:
            if record.task == task_name and record.metric == constraint.metric:
                matched = True
                samples[(interest_id, task_name)] += 1
                if evaluate_point(constraint, record.value):
                    passes[(interest_id, task_name)] += 1
        if not matched:
            orphans += 1

    cells = []
    for interest_id, task_name, constraint in targets:
        n = samples[(interest_id, task_name)]
        k = passes[(interest_id, task_name)]
        fulfilled = None if n == 0 else Fraction(k, n) >= q
        cells.append(CellReport(interest_id, task_name, constraint, n, k, fulfilled))
    return FulfillmentReport(q, tuple(cells), orphans, malformed)


def _parse_value(raw) -> Decimal | None:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        return None
    if not math.isfinite(raw):
        return None
    return Decimal(str(raw))


def load_ndjson(text: str) -> tuple[list[MonitorRecord], int]:
    """Parse one JSON object per line with keys task, metric, value and an
    optional ts. Returns the records plus a count of malformed lines.
    """
    records: list[MonitorRecord] = []
    malformed = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            malformed += 1
            continue
        if not isinstance(obj, dict):
            malformed += 1
            continue
        task = obj.get("task")
        metric = obj.get("metric")
        value = _parse_value(obj.get("value"))
        ts = obj.get("ts")
        if (not isinstance(task, str) or not task
                or not isinstance(metric, str) or not metric
                or value is None
                or not (ts is None or isinstance(ts, str))):
            malformed += 1
            continue
        records.append(MonitorRecord(task, metric, value, ts))
    return records, malformed


CSV_HEADER = ["task", "metric", "value", "ts"]


def load_csv(text: str) -> tuple[list[MonitorRecord], int]:
    """Parse rows under the header task,metric,value,ts; an empty ts field
    means no timestamp. Returns the records plus a count of malformed rows.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("csv header must be task,metric,value,ts")
    records: list[MonitorRecord] = []
    malformed = 0
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 4 or not row[0] or not row[1]:
            malformed += 1
            continue
        try:
            value = Decimal(row[2])
        except InvalidOperation:
            malformed += 1
            continue
        if not value.is_finite():
            malformed += 1
            continue
        records.append(MonitorRecord(row[0], row[1], value, row[3] or None))
    return records, malformed


def report_to_json(report: FulfillmentReport) -> str:
    payload = {
        "schema": 1,
        "quantile": float(report.quantile),
        "cells": [
            {
                "interest": c.interest_id,
                "task": c.task_name,
                "constraint": c.constraint.text(),
                "samples": c.samples,
                "passes": c.passes,
                "fulfilled": c.fulfilled,
            }
            for c in report.cells
        ],
        "orphans": report.orphans,
        "malformed": report.malformed,
    }
    return json.dumps(payload, indent=2) + "\n"


def _status(fulfilled: bool | None) -> str:
    if fulfilled is None:
        return "no data"
    return "fulfilled" if fulfilled else "not fulfilled"


def report_to_text(report: FulfillmentReport) -> str:
    header = ("interest", "task", "constraint", "samples", "passes", "status")
    body = [
        (c.interest_id, c.task_name, c.constraint.text(),
         str(c.samples), str(c.passes), _status(c.fulfilled))
        for c in report.cells
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(6)]
    lines = []
    for row in [header, *body]:
        cols = [value.ljust(width) for value, width in zip(row, widths)]
        lines.append("  ".join(cols).rstrip())
    lines.append("")
    lines.append(f"orphan records: {report.orphans}")
    lines.append(f"malformed records: {report.malformed}")
    return "\n".join(lines) + "\n"

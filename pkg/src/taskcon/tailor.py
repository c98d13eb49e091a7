"""Constraint-matrix engine: build, rate, resolve, completeness and
monotonicity checks, and anchor-based derivation of constraint proposals.

All matrix operations are copy-on-write: they return a new ConstraintMatrix
and leave every cell they do not name byte-identical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from .model import (
    Cell,
    Constraint,
    ConstraintMatrix,
    Direction,
    Metric,
    Relevance,
    Resolved,
    Unresolved,
    Waived,
)


class EmptyAxisError(Exception):
    pass


class DuplicateError(Exception):
    pass


class UnknownCellError(Exception):
    def __init__(self, interest_id: str, task_name: str):
        self.interest_id = interest_id
        self.task_name = task_name
        super().__init__(f'no cell {interest_id} x "{task_name}" in the matrix')


class UnknownMetricError(Exception):
    def __init__(self, metric: str):
        self.metric = metric
        super().__init__(f'unknown metric "{metric}"')


class DirectionMismatchError(Exception):
    def __init__(self, constraint: Constraint, direction: Direction):
        self.constraint = constraint
        self.direction = direction
        super().__init__(
            f"comparator {constraint.comparator.value} contradicts "
            f'metric "{constraint.metric}" direction {direction.value}'
        )


class AnchorUnresolvedError(Exception):
    def __init__(self, interest_id: str, task_name: str):
        self.interest_id = interest_id
        self.task_name = task_name
        super().__init__(
            f'anchor cell {interest_id} x "{task_name}" is not resolved '
            "with a constraint"
        )


class UnratedCellError(Exception):
    def __init__(self, interest_id: str, task_name: str):
        self.interest_id = interest_id
        self.task_name = task_name
        super().__init__(f'cell {interest_id} x "{task_name}" has no relevance rating')


class DerivationMode(Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class DerivationPolicy:
    """How thresholds relax as relevance drops, one step per level.

    Multiplicative mode scales by (1 +/- step) per level and therefore needs
    step < 1 and positive anchor thresholds to stay order-preserving.
    """

    mode: DerivationMode = DerivationMode.ADDITIVE
    step: Decimal = Decimal("1")
    rounding: int = 2

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("derivation step must be positive")
        if self.mode is DerivationMode.MULTIPLICATIVE and self.step >= 1:
            raise ValueError("multiplicative derivation needs step < 1")
        if self.rounding < 0:
            raise ValueError("rounding must be a non-negative number of decimals")


@dataclass(frozen=True)
class OrderViolation:
    """A more relevant cell carries a weaker threshold than a less relevant one."""

    interest_id: str
    task_a: str  # the more relevant task
    task_b: str
    relevance_a: Relevance
    relevance_b: Relevance
    constraint_a: Constraint
    constraint_b: Constraint


@dataclass(frozen=True)
class MetricMixViolation:
    """Two resolved cells in one row constrain different metrics."""

    interest_id: str
    task_a: str  # carries the row's reference metric
    task_b: str
    metric_a: str
    metric_b: str


@dataclass(frozen=True)
class Proposal:
    """A derived resolution for one currently unresolved cell."""

    interest_id: str
    task_name: str
    resolution: Resolved


def build_matrix(tasks: list[str], interests: list[str]) -> ConstraintMatrix:
    """Fresh full cross-product matrix, every cell unrated and unresolved."""
    if not tasks or not interests:
        raise EmptyAxisError("a matrix needs at least one task and one interest")
    for axis, names in (("task", tasks), ("interest", interests)):
        seen = set()
        for name in names:
            if name in seen:
                raise DuplicateError(f'duplicate {axis} "{name}"')
            seen.add(name)
    cells = {
        (interest_id, task_name): Cell(None, Unresolved())
        for interest_id in interests
        for task_name in tasks
    }
    return ConstraintMatrix(tuple(tasks), tuple(interests), cells)


def _replace_cell(matrix: ConstraintMatrix, interest_id: str, task_name: str,
                  cell: Cell) -> ConstraintMatrix:
    key = (interest_id, task_name)
    if key not in matrix.cells:
        raise UnknownCellError(interest_id, task_name)
    cells = dict(matrix.cells)
    cells[key] = cell
    return ConstraintMatrix(matrix.tasks, matrix.interests, cells)


def rate(matrix: ConstraintMatrix, interest_id: str, task_name: str,
         relevance: Relevance) -> ConstraintMatrix:
    """Set a cell's relevance rating; its resolution is untouched."""
    old = matrix.cell(interest_id, task_name)
    if old is None:
        raise UnknownCellError(interest_id, task_name)
    return _replace_cell(matrix, interest_id, task_name,
                         Cell(relevance, old.resolution, span=old.span))


def resolve(matrix: ConstraintMatrix, interest_id: str, task_name: str,
            resolution: Waived | Resolved,
            metrics: tuple[Metric, ...] = ()) -> ConstraintMatrix:
    """Set a cell's resolution.

    A Resolved resolution is checked against the metric registry: the metric
    must exist and the comparator must bound it in its better direction.
    """
    old = matrix.cell(interest_id, task_name)
    if old is None:
        raise UnknownCellError(interest_id, task_name)
    if isinstance(resolution, Resolved):
        constraint = resolution.constraint
        metric = next((m for m in metrics if m.name == constraint.metric), None)
        if metric is None:
            raise UnknownMetricError(constraint.metric)
        if constraint.comparator.direction is not metric.direction:
            raise DirectionMismatchError(constraint, metric.direction)
    return _replace_cell(matrix, interest_id, task_name,
                         Cell(old.relevance, resolution, span=old.span))


def check_complete(matrix: ConstraintMatrix) -> list[tuple[str, str]]:
    """Cells still unresolved, in row-major order."""
    return [
        (interest_id, task_name)
        for interest_id in matrix.interests
        for task_name in matrix.tasks
        if isinstance(matrix.cells[(interest_id, task_name)].resolution, Unresolved)
    ]


def check_monotone(matrix: ConstraintMatrix) -> list[OrderViolation | MetricMixViolation]:
    """Check that strictness follows relevance within each interest row.

    For every ordered pair of rated resolved cells (a, b) in a row with
    relevance(a) > relevance(b): a lower-is-better threshold must satisfy
    t(a) <= t(b), a higher-is-better one t(a) >= t(b). Waived and unresolved
    cells are skipped; rows mixing metrics yield uniform-metric violations
    and only same-metric cells are order-compared.
    """
    violations: list[OrderViolation | MetricMixViolation] = []
    for interest_id in matrix.interests:
        resolved = [
            (task_name, matrix.cells[(interest_id, task_name)])
            for task_name in matrix.tasks
            if isinstance(matrix.cells[(interest_id, task_name)].resolution, Resolved)
        ]
        if not resolved:
            continue
        ref_task, ref_cell = resolved[0]
        ref_metric = ref_cell.resolution.constraint.metric
        comparable = []
        for task_name, cell in resolved:
            metric = cell.resolution.constraint.metric
            if metric != ref_metric:
                violations.append(MetricMixViolation(
                    interest_id, ref_task, task_name, ref_metric, metric))
            else:
                comparable.append((task_name, cell))
        rated = [(t, c) for t, c in comparable if c.relevance is not None]
        for task_a, cell_a in rated:
            for task_b, cell_b in rated:
                if cell_a.relevance <= cell_b.relevance:
                    continue
                ca = cell_a.resolution.constraint
                cb = cell_b.resolution.constraint
                if ca.comparator.direction is Direction.LOWER_IS_BETTER:
                    ok = ca.threshold <= cb.threshold
                else:
                    ok = ca.threshold >= cb.threshold
                if not ok:
                    violations.append(OrderViolation(
                        interest_id, task_a, task_b,
                        cell_a.relevance, cell_b.relevance, ca, cb))
    return violations


def round_half_up(value: Decimal, places: int) -> Decimal:
    return value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def derive_proposals(matrix: ConstraintMatrix,
                     anchors: list[tuple[str, str]],
                     policy: DerivationPolicy) -> list[Proposal]:
    """Derive resolutions for unresolved cells from one anchor per row.

    The proposed threshold relaxes by policy.step per relevance level below
    the anchor (additively or multiplicatively); cells rated at or above the
    anchor inherit its threshold.  Results are rounded half-up to
    policy.rounding decimals and then clamped to the anchor's threshold so a
    proposal can never end up stricter than its anchor.
    """
    by_row: dict[str, tuple[str, Cell]] = {}
    for interest_id, task_name in anchors:
        cell = matrix.cell(interest_id, task_name)
        if cell is None:
            raise UnknownCellError(interest_id, task_name)
        if interest_id in by_row:
            raise DuplicateError(f'multiple anchors for row "{interest_id}"')
        if not isinstance(cell.resolution, Resolved):
            raise AnchorUnresolvedError(interest_id, task_name)
        if cell.relevance is None:
            raise UnratedCellError(interest_id, task_name)
        by_row[interest_id] = (task_name, cell)

    proposals: list[Proposal] = []
    for interest_id in matrix.interests:
        if interest_id not in by_row:
            continue
        anchor_task, anchor_cell = by_row[interest_id]
        anchor = anchor_cell.resolution.constraint
        direction = anchor.comparator.direction
        if policy.mode is DerivationMode.MULTIPLICATIVE and anchor.threshold <= 0:
            raise ValueError(
                f'multiplicative derivation needs a positive anchor threshold, '
                f'got {anchor.threshold} in row "{interest_id}"'
            )
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            if not isinstance(cell.resolution, Unresolved):
                continue
            if cell.relevance is None:
                raise UnratedCellError(interest_id, task_name)
            distance = max(0, anchor_cell.relevance.level - cell.relevance.level)
            if policy.mode is DerivationMode.ADDITIVE:
                delta = policy.step * distance
                raw = anchor.threshold + delta \
                    if direction is Direction.LOWER_IS_BETTER \
                    else anchor.threshold - delta
            else:
                factor = (Decimal(1) + policy.step) ** distance \
                    if direction is Direction.LOWER_IS_BETTER \
                    else (Decimal(1) - policy.step) ** distance
                raw = anchor.threshold * factor
            rounded = round_half_up(raw, policy.rounding)
            if direction is Direction.LOWER_IS_BETTER:
                threshold = max(rounded, anchor.threshold)
            else:
                threshold = min(rounded, anchor.threshold)
            proposals.append(Proposal(
                interest_id, task_name,
                Resolved(Constraint(anchor.metric, anchor.comparator,
                                    threshold, anchor.unit)),
            ))
    return proposals


def matrix_to_csv(matrix: ConstraintMatrix) -> str:
    """RFC-4180 CSV: header of task names, one row per interest,
    cell text ``relevance|resolution``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow([""] + list(matrix.tasks))
    for interest_id in matrix.interests:
        row = [interest_id]
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            rating = cell.relevance.value if cell.relevance is not None else ""
            if isinstance(cell.resolution, Resolved):
                resolution = cell.resolution.constraint.text()
            elif isinstance(cell.resolution, Waived):
                resolution = "waived"
            else:
                resolution = "unresolved"
            row.append(f"{rating}|{resolution}")
        writer.writerow(row)
    return buffer.getvalue()

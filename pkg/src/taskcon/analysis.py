"""Semantic rule engine: checks a parsed model against the method's
well-formedness rules R1..R12 and reports ordered diagnostics.

Severities are fixed per rule; "--strict" style escalation is a consumer
concern (the CLI does it), so validate stays pure and deterministic.
"""

from __future__ import annotations

from . import tailor
from .diagnostics import Diagnostic, Severity, SourceSpan, sort_diagnostics
from .model import (
    ExecutionPlan,
    Model,
    Relevance,
    Resolved,
    Task,
    Unresolved,
    find_cycle,
    start_nodes,
)

# rule id -> severity: a closed, stable public contract
RULES: dict[str, Severity] = {
    "R1": Severity.ERROR,  # plan cycle
    "R2": Severity.ERROR,  # plan edge names unknown subtask
    "R3": Severity.ERROR,  # multiple start nodes
    "R4": Severity.ERROR,  # unguarded edge at a decision node
    "R5": Severity.ERROR,  # consumed info has no producer and is not external
    "R6": Severity.WARNING,  # producer does not precede consumer on every path
    "R7": Severity.ERROR,  # matrix row is a non-leaf interest
    "R8": Severity.ERROR,  # comparator contradicts metric direction
    "R9": Severity.ERROR,  # unresolved cell
    "R10": Severity.WARNING,  # interest not important for any task
    "R11": Severity.ERROR,  # monotonicity violation in a row
    "R12": Severity.WARNING,  # unreachable subtask
}


def _fallback_span(model: Model) -> SourceSpan:
    return SourceSpan(model.source_name, 1, 1, 1, 1)


def _diag(rule: str, span: SourceSpan | None, message: str, model: Model) -> Diagnostic:
    return Diagnostic(rule, RULES[rule], span or _fallback_span(model), message)


def _adjacency(plan: ExecutionPlan) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {node: [] for node in plan.nodes()}
    for edge in plan.edges:
        adj[edge.source].append(edge.target)
    return adj


def _paths_to(plan: ExecutionPlan, target: str) -> list[list[str]]:
    """All start-to-target paths in an acyclic plan, each ending at target."""
    adj = _adjacency(plan)
    if target not in adj:
        return []
    paths: list[list[str]] = []

    def walk(node: str, trail: list[str]) -> None:
        trail.append(node)
        if node == target:
            paths.append(list(trail))
        else:
            for succ in adj[node]:
                walk(succ, trail)
        trail.pop()

    for start in start_nodes(plan):
        walk(start, [])
    return paths


def _reachable(plan: ExecutionPlan) -> set[str]:
    adj = _adjacency(plan)
    seen: set[str] = set()
    frontier = list(start_nodes(plan))
    while frontier:
        node = frontier.pop()
        if node in seen:
            continue
        seen.add(node)
        frontier.extend(adj[node])
    return seen


def check_info_flow(task: Task, model: Model) -> list[Diagnostic]:
    """R5/R6 findings for one task.

    R5 looks for producers anywhere in the model; R6 checks that a producer
    within this task's plan precedes the consumer on every start-to-consumer
    path, and is skipped (like R12) when the plan is cyclic.
    """
    diagnostics: list[Diagnostic] = []
    produced_anywhere = {
        name
        for other in model.tasks
        for sub in other.subtasks
        for name in sub.produces
    }
    acyclic = find_cycle(task.plan) is None
    for sub in task.subtasks:
        for name in sub.consumes:
            info = model.info(name)
            if info is not None and info.external:
                continue
            if name not in produced_anywhere:
                diagnostics.append(_diag(
                    "R5", sub.span,
                    f'"{name}" is consumed by subtask "{sub.name}" '
                    "but has no producer and is not external",
                    model,
                ))
                continue
            if not acyclic:
                continue
            producing = {
                s.name for s in task.subtasks if name in s.produces
            }
            for path in _paths_to(task.plan, sub.name):
                if not any(node in producing for node in path[:-1]):
                    diagnostics.append(_diag(
                        "R6", sub.span,
                        f'no producer of "{name}" precedes subtask '
                        f'"{sub.name}" on every plan path',
                        model,
                    ))
                    break
    return diagnostics


def _check_plan(task: Task, model: Model) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    plan = task.plan
    cycle = find_cycle(plan)
    if cycle is not None:
        loop = " -> ".join(f'"{n}"' for n in (*cycle, cycle[0]))
        diagnostics.append(_diag(
            "R1", plan.span or task.span, f"plan contains a cycle: {loop}", model))

    names = {sub.name for sub in task.subtasks}
    for edge in plan.edges:
        for endpoint in dict.fromkeys((edge.source, edge.target)):
            if endpoint not in names:
                diagnostics.append(_diag(
                    "R2", edge.span,
                    f'plan edge references unknown subtask "{endpoint}"', model))

    if plan.edges:
        starts = start_nodes(plan)
        if len(starts) > 1:
            listed = ", ".join(f'"{n}"' for n in starts)
            diagnostics.append(_diag(
                "R3", plan.span or task.span,
                f"plan has multiple start nodes: {listed}", model))

    out_degree: dict[str, int] = {}
    for edge in plan.edges:
        out_degree[edge.source] = out_degree.get(edge.source, 0) + 1
    for edge in plan.edges:
        if out_degree[edge.source] > 1 and edge.guard is None:
            diagnostics.append(_diag(
                "R4", edge.span,
                f'edge "{edge.source}" -> "{edge.target}" needs a guard: '
                f'"{edge.source}" has multiple outgoing edges', model))

    if plan.edges and cycle is None:
        reachable = _reachable(plan)
        for sub in task.subtasks:
            if sub.name not in reachable:
                diagnostics.append(_diag(
                    "R12", sub.span,
                    f'subtask "{sub.name}" is unreachable from the plan start',
                    model))
    return diagnostics


def _row_span(model: Model, interest_id: str) -> SourceSpan | None:
    for (row, _task), cell in model.matrix.cells.items():
        if row == interest_id:
            return cell.span
    return None


def _check_matrix(model: Model) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    matrix = model.matrix

    first_child: dict[str, str] = {}
    for interest in model.interests:
        if interest.refines is not None:
            first_child.setdefault(interest.refines, interest.id)
    for interest_id in matrix.interests:
        if interest_id in first_child:
            diagnostics.append(_diag(
                "R7", _row_span(model, interest_id),
                f'matrix row "{interest_id}" is not a leaf interest: '
                f'refined by "{first_child[interest_id]}"', model))

    for interest_id in matrix.interests:
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            if isinstance(cell.resolution, Resolved):
                constraint = cell.resolution.constraint
                metric = model.metric(constraint.metric)
                if metric is not None and \
                        constraint.comparator.direction is not metric.direction:
                    diagnostics.append(_diag(
                        "R8", constraint.span or cell.span,
                        f"comparator {constraint.comparator.value} contradicts "
                        f'metric "{metric.name}" direction {metric.direction.value}',
                        model))
            elif isinstance(cell.resolution, Unresolved):
                diagnostics.append(_diag(
                    "R9", cell.span,
                    f'cell {interest_id} x "{task_name}" is unresolved', model))

    for interest in model.interests:
        if interest.id not in matrix.interests:
            continue
        row = [matrix.cells[(interest.id, t)] for t in matrix.tasks]
        if row and all(c.relevance is Relevance.NOT_IMPORTANT for c in row):
            diagnostics.append(_diag(
                "R10", interest.span,
                f'interest "{interest.id}" is rated not_important for every task',
                model))

    for violation in tailor.check_monotone(matrix):
        if isinstance(violation, tailor.OrderViolation):
            span_cell = matrix.cell(violation.interest_id, violation.task_a)
            diagnostics.append(_diag(
                "R11", span_cell.span if span_cell else None,
                f'row "{violation.interest_id}": "{violation.task_a}" '
                f"({violation.relevance_a.value}, {violation.constraint_a.text()}) "
                f'is weaker than "{violation.task_b}" '
                f"({violation.relevance_b.value}, {violation.constraint_b.text()})",
                model))
        else:
            span_cell = matrix.cell(violation.interest_id, violation.task_b)
            diagnostics.append(_diag(
                "R11", span_cell.span if span_cell else None,
                f'row "{violation.interest_id}": cells mix metrics '
                f'"{violation.metric_a}" and "{violation.metric_b}"', model))
    return diagnostics


def validate(model: Model) -> list[Diagnostic]:
    """All R1..R12 findings, sorted by (file, position, rule, message).

    Pure and deterministic: equal models yield identical lists. Only R1
    gates other rules (R6/R12 need an acyclic plan); everything else is
    evaluated independently.
    """
    diagnostics: list[Diagnostic] = []
    for task in model.tasks:
        diagnostics.extend(_check_plan(task, model))
        diagnostics.extend(check_info_flow(task, model))
    diagnostics.extend(_check_matrix(model))
    return sort_diagnostics(diagnostics)

"""Domain types for hierarchical user-task models, stakeholder interests,
and per-task constraint matrices, plus basic structural queries.

All types are immutable values: safe to share across threads, updated only
by constructing replacements. Source spans are carried for diagnostics but
never participate in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum

from .diagnostics import SourceSpan


class Priority(Enum):
    """Task selection rank; ``mvp`` marks the minimum-viable-product core."""

    MVP = "mvp"
    HIGH = "high"
    NORMAL = "normal"
    LOW = "low"

    @property
    def rank(self) -> int:
        return _PRIORITY_RANK[self]


_PRIORITY_RANK = {
    Priority.LOW: 0,
    Priority.NORMAL: 1,
    Priority.HIGH: 2,
    Priority.MVP: 3,
}


class InterestClass(Enum):
    """Closed classification schema for stakeholder interests.

    Ten tags covering nine classes: the interface class splits into a user
    and an application flavor.
    """

    USER_INTERFACE = "user_interface"
    APPLICATION_INTERFACE = "application_interface"
    INFORMATIONAL = "informational"
    BEHAVIORAL = "behavioral"
    OPERATING = "operating"
    HUMAN = "human"
    LIFECYCLE = "lifecycle"
    ECONOMIC = "economic"
    DATA_GOVERNANCE = "data_governance"
    LEGAL_POLICY = "legal_policy"


class Relevance(Enum):
    """How much an interest matters for one task; totally ordered."""

    NOT_IMPORTANT = "not_important"
    RATHER_IMPORTANT = "rather_important"
    IMPORTANT = "important"
    VERY_IMPORTANT = "very_important"

    @property
    def level(self) -> int:
        return _RELEVANCE_LEVEL[self]

    def __lt__(self, other: Relevance) -> bool:
        if not isinstance(other, Relevance):
            return NotImplemented
        return self.level < other.level

    def __le__(self, other: Relevance) -> bool:
        if not isinstance(other, Relevance):
            return NotImplemented
        return self.level <= other.level

    def __gt__(self, other: Relevance) -> bool:
        if not isinstance(other, Relevance):
            return NotImplemented
        return self.level > other.level

    def __ge__(self, other: Relevance) -> bool:
        if not isinstance(other, Relevance):
            return NotImplemented
        return self.level >= other.level


_RELEVANCE_LEVEL = {
    Relevance.NOT_IMPORTANT: 0,
    Relevance.RATHER_IMPORTANT: 1,
    Relevance.IMPORTANT: 2,
    Relevance.VERY_IMPORTANT: 3,
}


class Direction(Enum):
    LOWER_IS_BETTER = "lower_is_better"
    HIGHER_IS_BETTER = "higher_is_better"


class Comparator(Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def direction(self) -> Direction:
        """The metric direction this comparator is consistent with."""
        if self in (Comparator.LT, Comparator.LE):
            return Direction.LOWER_IS_BETTER
        return Direction.HIGHER_IS_BETTER


def format_number(value: Decimal) -> str:
    """Canonical decimal text: plain notation, no trailing fraction zeros."""
    text = format(value, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


@dataclass(frozen=True)
class Metric:
    """Registry entry naming a measurable quantity and its improvement sense."""

    name: str
    unit: str
    direction: Direction
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Constraint:
    """Quantitative bound on a metric: unambiguously checkable against a value."""

    metric: str
    comparator: Comparator
    threshold: Decimal
    unit: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def text(self) -> str:
        """Canonical rendering, e.g. ``response_time < 2 ms``."""
        return (
            f"{self.metric} {self.comparator.value} "
            f"{format_number(self.threshold)} {self.unit}"
        )


@dataclass(frozen=True)
class Unresolved:
    """Cell state before stakeholders settle on a constraint or a waiver."""


@dataclass(frozen=True)
class Waived:
    """Agreed exemption: the interest needs no constraint for this task."""

    reason: str


@dataclass(frozen=True)
class Resolved:
    constraint: Constraint


Resolution = Unresolved | Waived | Resolved

UNRESOLVED = Unresolved()


@dataclass(frozen=True)
class Cell:
    relevance: Relevance | None
    resolution: Resolution
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ConstraintMatrix:
    """Grid over (leaf interest rows x selected task columns).

    ``cells`` keys are (interest id, task name) pairs and cover exactly the
    row-column cross product.
    """

    tasks: tuple[str, ...]
    interests: tuple[str, ...]
    cells: dict[tuple[str, str], Cell]

    def is_empty(self) -> bool:
        return not self.tasks and not self.interests

    def cell(self, interest_id: str, task_name: str) -> Cell | None:
        return self.cells.get((interest_id, task_name))


EMPTY_MATRIX = ConstraintMatrix(tasks=(), interests=(), cells={})


@dataclass(frozen=True)
class SystemResponsibility:
    description: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class InformationObject:
    """Data generated or required while a task runs; ``external`` objects are
    supplied from outside any subtask."""

    name: str
    description: str = ""
    external: bool = False
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Edge:
    """One execution-plan arc; a guard labels the branch of a decision point."""

    source: str
    target: str
    guard: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ExecutionPlan:
    edges: tuple[Edge, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def nodes(self) -> list[str]:
        """Edge endpoints in first-appearance order."""
        seen: list[str] = []
        for edge in self.edges:
            if edge.source not in seen:
                seen.append(edge.source)
            if edge.target not in seen:
                seen.append(edge.target)
        return seen


EMPTY_PLAN = ExecutionPlan()


@dataclass(frozen=True)
class Subtask:
    """One step of a task: the user's intention paired with what the system
    must provide, refined with conditions and information objects."""

    name: str
    intention: str
    responsibilities: tuple[SystemResponsibility, ...]
    preconditions: tuple[str, ...] = ()
    postconditions: tuple[str, ...] = ()
    consumes: tuple[str, ...] = ()
    produces: tuple[str, ...] = ()
    refined_in: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Task:
    """A sequence of actions a user performs to attain a goal.

    Refinement is exactly one level deep: subtasks never nest; deeper detail
    goes into a separate model referenced via ``Subtask.refined_in``.
    """

    name: str
    goal: str
    priority: Priority = Priority.NORMAL
    subtasks: tuple[Subtask, ...] = ()
    plan: ExecutionPlan = EMPTY_PLAN
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def subtask(self, name: str) -> Subtask | None:
        for sub in self.subtasks:
            if sub.name == name:
                return sub
        return None


@dataclass(frozen=True)
class StakeholderInterest:
    """Informally documented stakeholder objective, classified and optionally
    refining a broader parent interest."""

    id: str
    statement: str
    interest_class: InterestClass
    refines: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Model:
    """Root aggregate: one model file's tasks, information objects, interests,
    metric registry, and constraint matrix."""

    tasks: tuple[Task, ...] = ()
    info_objects: tuple[InformationObject, ...] = ()
    interests: tuple[StakeholderInterest, ...] = ()
    metrics: tuple[Metric, ...] = ()
    matrix: ConstraintMatrix = EMPTY_MATRIX
    # provenance only, like spans: two models with the same content are equal
    source_name: str = field(default="<memory>", compare=False)

    def task(self, name: str) -> Task | None:
        for task in self.tasks:
            if task.name == name:
                return task
        return None

    def info(self, name: str) -> InformationObject | None:
        for info in self.info_objects:
            if info.name == name:
                return info
        return None

    def interest(self, interest_id: str) -> StakeholderInterest | None:
        for interest in self.interests:
            if interest.id == interest_id:
                return interest
        return None

    def metric(self, name: str) -> Metric | None:
        for metric in self.metrics:
            if metric.name == name:
                return metric
        return None


class CycleError(Exception):
    """The plan's edge graph contains a cycle; carries one witness."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        loop = " -> ".join(f'"{n}"' for n in (*cycle, cycle[0]))
        super().__init__(f"plan contains a cycle: {loop}")


class MultipleStartsError(Exception):
    def __init__(self, starts: tuple[str, ...]):
        self.starts = starts
        names = ", ".join(f'"{n}"' for n in starts)
        super().__init__(f"plan has multiple start nodes: {names}")


class RefinementCycleError(Exception):
    """Interest refinement links loop instead of forming a forest."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = cycle
        loop = " -> ".join((*cycle, cycle[0]))
        super().__init__(f"interest refinement contains a cycle: {loop}")


def _adjacency(plan: ExecutionPlan) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {node: [] for node in plan.nodes()}
    for edge in plan.edges:
        adj[edge.source].append(edge.target)
    return adj


def find_cycle(plan: ExecutionPlan) -> tuple[str, ...] | None:
    """Return one witness cycle as a node sequence, or None when acyclic."""
    adj = _adjacency(plan)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adj}
    path: list[str] = []

    def visit(node: str) -> tuple[str, ...] | None:
        color[node] = GRAY
        path.append(node)
        for succ in adj[node]:
            if color[succ] == GRAY:
                return tuple(path[path.index(succ):])
            if color[succ] == WHITE:
                found = visit(succ)
                if found is not None:
                    return found
        path.pop()
        color[node] = BLACK
        return None

    for node in adj:
        if color[node] == WHITE:
            found = visit(node)
            if found is not None:
                return found
    return None


def topological_order(plan: ExecutionPlan) -> list[str]:
    """Order plan nodes so that every edge points forward.

    Deterministic: ties break by first appearance in the edge list. Raises
    CycleError (with a witness) when no order exists.
    """
    nodes = plan.nodes()
    adj = _adjacency(plan)
    indegree = {node: 0 for node in nodes}
    for edge in plan.edges:
        indegree[edge.target] += 1

    ready = [node for node in nodes if indegree[node] == 0]
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for succ in adj[node]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                ready.append(succ)
    if len(order) != len(nodes):
        cycle = find_cycle(plan)
        assert cycle is not None
        raise CycleError(cycle)
    return order


def start_nodes(plan: ExecutionPlan) -> list[str]:
    """Nodes with no incoming edge, in first-appearance order."""
    targets = {edge.target for edge in plan.edges}
    return [node for node in plan.nodes() if node not in targets]


def paths_from_start(plan: ExecutionPlan) -> list[list[str]]:
    """Enumerate every maximal path from the single start to a terminal node.

    An empty plan has no paths. Raises CycleError on cyclic plans and
    MultipleStartsError when more than one node lacks incoming edges.
    """
    if not plan.edges:
        return []
    cycle = find_cycle(plan)
    if cycle is not None:
        raise CycleError(cycle)
    starts = start_nodes(plan)
    if len(starts) > 1:
        raise MultipleStartsError(tuple(starts))
    adj = _adjacency(plan)

    paths: list[list[str]] = []

    def walk(node: str, trail: list[str]) -> None:
        trail.append(node)
        if not adj[node]:
            paths.append(list(trail))
        else:
            for succ in adj[node]:
                walk(succ, trail)
        trail.pop()

    walk(starts[0], [])
    return paths


def select_tasks(model: Model, threshold: Priority) -> list[Task]:
    """Tasks at or above the priority threshold, in declaration order."""
    return [task for task in model.tasks if task.priority.rank >= threshold.rank]


def refinement_cycle(interests: tuple[StakeholderInterest, ...]) -> tuple[str, ...] | None:
    """Return one witness cycle among refinement links, or None for a forest."""
    parent = {i.id: i.refines for i in interests}
    state: dict[str, int] = {}
    for start in parent:
        if state.get(start):
            continue
        chain: list[str] = []
        node: str | None = start
        while node is not None and node in parent:
            if state.get(node) == 2:
                break
            if state.get(node) == 1:
                return tuple(chain[chain.index(node):])
            state[node] = 1
            chain.append(node)
            node = parent[node]
        for visited in chain:
            state[visited] = 2
    return None


def leaf_interests(model: Model) -> list[StakeholderInterest]:
    """Interests with no children in the refinement forest, declaration order.

    Raises RefinementCycleError when refinement links loop.
    """
    cycle = refinement_cycle(model.interests)
    if cycle is not None:
        raise RefinementCycleError(cycle)
    parents = {i.refines for i in model.interests if i.refines is not None}
    return [i for i in model.interests if i.id not in parents]

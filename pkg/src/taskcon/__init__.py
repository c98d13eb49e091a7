"""taskcon: task-oriented stakeholder-interest modeling.

A textual language for hierarchical user-task models, a semantic validator,
a constraint-matrix engine for tailoring quality requirements per task, and
a fulfillment monitor for measurement streams.
"""

from .diagnostics import Diagnostic, Severity, SourceSpan, format_diagnostic, sort_diagnostics
from .model import (
    Cell,
    Comparator,
    Constraint,
    ConstraintMatrix,
    CycleError,
    Direction,
    Edge,
    ExecutionPlan,
    InformationObject,
    InterestClass,
    Metric,
    Model,
    MultipleStartsError,
    Priority,
    RefinementCycleError,
    Relevance,
    Resolved,
    StakeholderInterest,
    Subtask,
    SystemResponsibility,
    Task,
    Unresolved,
    Waived,
    find_cycle,
    format_number,
    leaf_interests,
    paths_from_start,
    select_tasks,
    start_nodes,
    topological_order,
)
from .analysis import RULES, check_info_flow, validate
from .dsl import ParseResult, parse, print_model

__version__ = "0.1.0"

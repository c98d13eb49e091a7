"""Renderers: Graphviz DOT for a task's subtask flow, plus Markdown and
HTML views of a constraint matrix.

Output is deterministic: node ids come from a per-diagram slug pool, info
colors from a fixed palette keyed by declaration order, and matrix cells
walk rows and columns in matrix order.
"""

from __future__ import annotations

import html
import re
from typing import Iterable, Sequence

from .analysis import validate
from .model import (
    ConstraintMatrix,
    InformationObject,
    Model,
    Relevance,
    Resolved,
    Task,
    Unresolved,
    Waived,
)

# qualitative palette, cycled by info declaration index
INFO_PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072",
    "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
)

CLUSTER_FILL = "#eeeeee"

UNSET_GLYPH = "—"  # em dash marks cells with nothing to show


class InvalidModelError(Exception):
    """The task's plan is too broken to draw (cycle, unknown node, ...)."""


class _SlugPool:
    """Allocate unique DOT ids: lowercase, non-alphanumerics collapsed to
    underscores, duplicates suffixed _2, _3, and so on.
    """

    def __init__(self) -> None:
        self._seen: dict[str, int] = {}

    def claim(self, text: str) -> str:
        base = re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_") or "n"
        count = self._seen.get(base, 0) + 1
        self._seen[base] = count
        return base if count == 1 else f"{base}_{count}"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(task: Task, infos: Sequence[InformationObject] = ()) -> str:
    """Render one task as a DOT digraph: a cluster per subtask holding its
    responsibility nodes, plan edges between clusters, and dashed edges to
    the information objects the subtasks produce and consume.

    Raises InvalidModelError when the plan has structural errors, since
    edges into unknown or cyclic structure cannot be drawn faithfully.
    """
    probe = Model(tasks=(task,), info_objects=tuple(infos))
    details = [d.message for d in validate(probe)
               if d.rule in ("R1", "R2", "R3", "R4")]
    details.extend(f'subtask "{s.name}" has no responsibilities to draw'
                   for s in task.subtasks if not s.responsibilities)
    if details:
        raise InvalidModelError(
            f'task "{task.name}" is not renderable: {"; ".join(details)}')

    pool = _SlugPool()
    lines = [
        f"digraph {pool.claim(task.name)} {{",
        "  graph [compound=true, fontname=\"Helvetica\"];",
        "  node [fontname=\"Helvetica\"];",
        f"  label={_quote(task.name + ': ' + task.goal)};",
    ]

    cluster_of: dict[str, str] = {}
    anchor_of: dict[str, str] = {}
    for subtask in task.subtasks:
        cluster = "cluster_" + pool.claim(subtask.name)
        cluster_of[subtask.name] = cluster
        lines.append(f"  subgraph {cluster} {{")
        lines.append(f"    label={_quote(subtask.name)};")
        lines.append("    style=\"rounded,filled\";")
        lines.append(f"    fillcolor=\"{CLUSTER_FILL}\";")
        tooltip = _conditions_tooltip(subtask.preconditions,
                                      subtask.postconditions)
        if tooltip:
            lines.append(f"    tooltip={_quote(tooltip)};")
        lines.append(f"    labeltooltip={_quote(subtask.intention)};")
        for index, responsibility in enumerate(subtask.responsibilities):
            node = pool.claim(subtask.name + f"_r{index + 1}")
            if index == 0:
                anchor_of[subtask.name] = node
            lines.append(
                f"    {node} [label={_quote(responsibility.description)},"
                " shape=box, style=rounded];")
        lines.append("  }")

    referenced: list[str] = []
    for subtask in task.subtasks:
        for name in (*subtask.consumes, *subtask.produces):
            if name not in referenced:
                referenced.append(name)
    info_node: dict[str, str] = {}
    for index, info in enumerate(infos):
        if info.name not in referenced:
            continue
        node = "info_" + pool.claim(info.name)
        info_node[info.name] = node
        color = INFO_PALETTE[index % len(INFO_PALETTE)]
        label = info.name + (" (external)" if info.external else "")
        lines.append(
            f"  {node} [label={_quote(label)}, shape=note,"
            f" style=filled, fillcolor=\"{color}\"];")

    for edge in task.plan.edges:
        src = anchor_of[edge.source]
        dst = anchor_of[edge.target]
        attrs = [f"ltail={cluster_of[edge.source]}",
                 f"lhead={cluster_of[edge.target]}"]
        if edge.guard is not None:
            attrs.append(f"label={_quote(edge.guard)}")
        lines.append(f"  {src} -> {dst} [{', '.join(attrs)}];")

    for subtask in task.subtasks:
        anchor = anchor_of[subtask.name]
        cluster = cluster_of[subtask.name]
        for name in subtask.produces:
            if name in info_node:
                lines.append(
                    f"  {anchor} -> {info_node[name]}"
                    f" [style=dashed, ltail={cluster}];")
        for name in subtask.consumes:
            if name in info_node:
                lines.append(
                    f"  {info_node[name]} -> {anchor}"
                    f" [style=dashed, lhead={cluster}];")

    lines.append("}")
    return "\n".join(lines) + "\n"


def _conditions_tooltip(pre: Iterable[str], post: Iterable[str]) -> str:
    parts = [f"pre: {p}" for p in pre] + [f"post: {p}" for p in post]
    return "; ".join(parts)


def scan_dot(text: str) -> list[str]:
    """Cheap well-formedness scan for generated DOT: balanced braces and
    quotes, a digraph header, and edges that only touch declared nodes.
    Returns a list of problems, empty when the text looks sound.
    """
    problems: list[str] = []
    depth = 0
    in_string = False
    escaped = False
    bare = []  # text outside quoted strings
    for ch in text:
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                problems.append("unbalanced braces: '}' without opener")
                depth = 0
        bare.append(ch)
    if in_string:
        problems.append("unterminated string")
    if depth != 0:
        problems.append("unbalanced braces: missing '}'")
    stripped = "".join(bare)
    if not stripped.lstrip().startswith("digraph"):
        problems.append("missing digraph header")

    declared = set()
    for match in re.finditer(r"(?m)^\s*(\w+)\s*\[", stripped):
        name = match.group(1)
        if name not in ("graph", "node", "edge"):
            declared.add(name)
    for match in re.finditer(r"(\w+)\s*->\s*(\w+)", stripped):
        for endpoint in match.groups():
            if endpoint not in declared:
                problems.append(f"edge endpoint {endpoint} is not declared")
    return problems


def _markdown_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def matrix_to_markdown(matrix: ConstraintMatrix, view: str = "constraints") -> str:
    """Emit the matrix as a Markdown table. The relevance view shows the
    ratings, the constraints view the resolutions; missing entries show an
    em dash so every row keeps the full column count.
    """
    if view not in ("relevance", "constraints"):
        raise ValueError(f'view must be "relevance" or "constraints", got {view!r}')
    header = ["interest", *matrix.tasks]
    rows = [header, ["---"] * len(header)]
    for interest_id in matrix.interests:
        row = [interest_id]
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            if view == "relevance":
                row.append(cell.relevance.value if cell.relevance else UNSET_GLYPH)
            else:
                row.append(_resolution_text(cell.resolution))
        rows.append(row)
    lines = ["| " + " | ".join(_markdown_escape(col) for col in row) + " |"
             for row in rows]
    return "\n".join(lines) + "\n"


def _resolution_text(resolution) -> str:
    if isinstance(resolution, Resolved):
        return resolution.constraint.text()
    if isinstance(resolution, Waived):
        return "waived"
    return UNSET_GLYPH


RELEVANCE_GRAYS = {
    None: "#ffffff",
    Relevance.NOT_IMPORTANT: "#f5f5f5",
    Relevance.RATHER_IMPORTANT: "#d9d9d9",
    Relevance.IMPORTANT: "#a6a6a6",
    Relevance.VERY_IMPORTANT: "#737373",
}


def matrix_to_html(matrix: ConstraintMatrix) -> str:
    """Emit the matrix as an HTML table fragment. Cell backgrounds encode
    relevance in four grays (darkest is very important); cell text carries
    the resolution.
    """
    lines = ["<table>", "  <tr>", "    <th>interest</th>"]
    for task_name in matrix.tasks:
        lines.append(f"    <th>{html.escape(task_name)}</th>")
    lines.append("  </tr>")
    for interest_id in matrix.interests:
        lines.append("  <tr>")
        lines.append(f"    <th>{html.escape(interest_id)}</th>")
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            color = RELEVANCE_GRAYS[cell.relevance]
            title = cell.relevance.value if cell.relevance else "unrated"
            text = html.escape(_resolution_text(cell.resolution))
            lines.append(
                f'    <td style="background:{color}" title="{title}">'
                f"{text}</td>")
        lines.append("  </tr>")
    lines.append("</table>")
    return "\n".join(lines) + "\n"

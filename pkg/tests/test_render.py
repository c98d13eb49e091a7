"""Renderer tests: DOT structure for the fixture task, slug and palette
behavior, the DOT scanner, and the two matrix table views.
"""

import re
from decimal import Decimal
from pathlib import Path

import pytest

from taskcon import dsl
from taskcon.model import (
    Comparator,
    Constraint,
    Direction,
    Edge,
    ExecutionPlan,
    InformationObject,
    Metric,
    Relevance,
    Resolved,
    Subtask,
    SystemResponsibility,
    Task,
    Waived,
)
from taskcon.render import (
    INFO_PALETTE,
    InvalidModelError,
    matrix_to_html,
    matrix_to_markdown,
    scan_dot,
    to_dot,
)
from taskcon.tailor import build_matrix, rate, resolve


@pytest.fixture(scope="module")
def bookstore():
    text = (Path(__file__).parent / "fixtures" / "bookstore.tac").read_text()
    return dsl.parse(text, "bookstore.tac").model


def simple_task(name="T", subtask_names=("A", "B"), edges=(("A", "B"),),
                guards=None):
    subtasks = tuple(
        Subtask(n, f"do {n}", (SystemResponsibility(f"handle {n}"),))
        for n in subtask_names)
    plan_edges = tuple(
        Edge(s, t, (guards or {}).get((s, t))) for s, t in edges)
    return Task(name, "demo goal", subtasks=subtasks,
                plan=ExecutionPlan(plan_edges))


def test_fixture_task_dot_structure(bookstore):
    task = bookstore.tasks[0]
    assert task.name == "Search for book"
    dot = to_dot(task, bookstore.info_objects)

    assert dot.startswith("digraph search_for_book {")
    assert dot.count("subgraph cluster_") == 2
    assert "subgraph cluster_enter_search_terms {" in dot
    assert "subgraph cluster_review_result_list {" in dot
    assert "compound=true" in dot

    # the plan edge connects the clusters through their first nodes
    assert re.search(
        r"enter_search_terms_r1 -> review_result_list_r1 "
        r"\[ltail=cluster_enter_search_terms, "
        r"lhead=cluster_review_result_list\];", dot)

    # produced and consumed info flows are dashed and touch the info node
    assert "info_search_terms" in dot
    assert re.search(r"enter_search_terms_r1 -> info_search_terms "
                     r"\[style=dashed, ltail=cluster_enter_search_terms\];", dot)
    assert re.search(r"info_search_terms -> review_result_list_r1 "
                     r"\[style=dashed, lhead=cluster_review_result_list\];", dot)

    # "Search terms" is the first declared info, so it gets the first color
    assert INFO_PALETTE[0] in dot
    assert scan_dot(dot) == []


def test_unreferenced_infos_not_drawn(bookstore):
    task = bookstore.tasks[0]
    dot = to_dot(task, bookstore.info_objects)
    assert "info_credit_card_details" not in dot
    assert dot.count("shape=note") == 1


def test_every_fixture_task_renders_clean(bookstore):
    for task in bookstore.tasks:
        assert scan_dot(to_dot(task, bookstore.info_objects)) == []


def test_external_info_marked(bookstore):
    task = bookstore.tasks[1]  # consumes the external credit card details
    dot = to_dot(task, bookstore.info_objects)
    assert "(external)" in dot


def test_guard_becomes_edge_label():
    task = simple_task(subtask_names=("A", "B", "C"),
                       edges=(("A", "B"), ("A", "C")),
                       guards={("A", "B"): "found", ("A", "C"): "not found"})
    dot = to_dot(task, ())
    assert 'label="found"' in dot
    assert 'label="not found"' in dot
    assert scan_dot(dot) == []


def test_conditions_become_tooltips():
    subtask = Subtask("A", "do A", (SystemResponsibility("handle A"),),
                      preconditions=("cart is open",),
                      postconditions=("receipt stored",))
    task = Task("T", "demo goal", subtasks=(subtask,))
    dot = to_dot(task, ())
    assert 'tooltip="pre: cart is open; post: receipt stored";' in dot


def test_slug_collisions_get_suffixes():
    task = simple_task(subtask_names=("Pay!", "Pay?"), edges=(("Pay!", "Pay?"),))
    dot = to_dot(task, ())
    assert "subgraph cluster_pay {" in dot
    assert "subgraph cluster_pay_2 {" in dot
    assert re.search(r"pay_r1 -> pay_r1_2 ", dot)
    assert scan_dot(dot) == []


def test_palette_cycles_by_declaration_index():
    infos = tuple(InformationObject(f"I{i}") for i in range(10))
    subtasks = (
        Subtask("A", "a", (SystemResponsibility("r"),),
                produces=tuple(f"I{i}" for i in range(10))),
    )
    task = Task("T", "g", subtasks=subtasks)
    dot = to_dot(task, infos)
    assert dot.count(INFO_PALETTE[0]) == 2  # info 0 and info 8 share a color
    assert dot.count(INFO_PALETTE[2]) == 1


def test_quotes_in_names_are_escaped():
    task = simple_task(subtask_names=('Say "hi"',), edges=())
    dot = to_dot(task, ())
    assert 'label="Say \\"hi\\""' in dot
    assert scan_dot(dot) == []


def test_cyclic_plan_is_not_renderable():
    task = simple_task(edges=(("A", "B"), ("B", "A")))
    with pytest.raises(InvalidModelError, match="not renderable"):
        to_dot(task, ())


def test_unknown_plan_node_is_not_renderable():
    task = simple_task(edges=(("A", "Ghost"),))
    with pytest.raises(InvalidModelError, match="Ghost"):
        to_dot(task, ())


def test_empty_subtask_is_not_renderable():
    task = Task("T", "g", subtasks=(Subtask("A", "a", ()),))
    with pytest.raises(InvalidModelError, match="no responsibilities"):
        to_dot(task, ())


def test_rendering_is_deterministic(bookstore):
    task = bookstore.tasks[0]
    assert to_dot(task, bookstore.info_objects) == \
        to_dot(task, bookstore.info_objects)


# --- scan_dot on hand-made inputs ---


def test_scan_dot_flags_undeclared_endpoints():
    problems = scan_dot("digraph g {\n  a -> b;\n}\n")
    assert sorted(problems) == [
        "edge endpoint a is not declared",
        "edge endpoint b is not declared",
    ]


def test_scan_dot_flags_structure_problems():
    assert "missing digraph header" in scan_dot("graph g { }")
    assert "unbalanced braces: missing '}'" in scan_dot("digraph g {")
    assert "unbalanced braces: '}' without opener" in scan_dot("digraph g }")
    assert "unterminated string" in scan_dot('digraph g { a [label="oops]; }')


def test_scan_dot_ignores_arrows_inside_strings():
    text = 'digraph g {\n  a [label="x -> y"];\n}\n'
    assert scan_dot(text) == []


# --- matrix views ---

REGISTRY = (Metric("response_time", "ms", Direction.LOWER_IS_BETTER),)


def small_matrix():
    matrix = build_matrix(["Search for book", "Write a review"], ["RESP", "PEAK"])
    matrix = rate(matrix, "RESP", "Search for book", Relevance.VERY_IMPORTANT)
    matrix = resolve(matrix, "RESP", "Search for book",
                     Resolved(Constraint("response_time", Comparator.LT,
                                         Decimal("2"), "ms")), REGISTRY)
    matrix = resolve(matrix, "RESP", "Write a review", Waived("low traffic"),
                     REGISTRY)
    matrix = rate(matrix, "PEAK", "Write a review", Relevance.IMPORTANT)
    return matrix


def test_markdown_constraints_view():
    assert matrix_to_markdown(small_matrix(), "constraints") == (
        "| interest | Search for book | Write a review |\n"
        "| --- | --- | --- |\n"
        "| RESP | response_time < 2 ms | waived |\n"
        "| PEAK | — | — |\n"
    )


def test_markdown_relevance_view():
    assert matrix_to_markdown(small_matrix(), "relevance") == (
        "| interest | Search for book | Write a review |\n"
        "| --- | --- | --- |\n"
        "| RESP | very_important | — |\n"
        "| PEAK | — | important |\n"
    )


def test_markdown_escapes_pipes():
    matrix = build_matrix(["A|B"], ["R"])
    table = matrix_to_markdown(matrix, "relevance")
    assert "A\\|B" in table
    # every line keeps the same column count
    for line in table.splitlines():
        assert line.count("|") - line.count("\\|") == 3


def test_markdown_rejects_unknown_view():
    with pytest.raises(ValueError):
        matrix_to_markdown(small_matrix(), "heatmap")


def test_markdown_fixture_matrix_constant_width(bookstore):
    table = matrix_to_markdown(bookstore.matrix, "constraints")
    lines = table.splitlines()
    assert len(lines) == 2 + len(bookstore.matrix.interests)
    assert "response_time < 2 ms" in lines[2]
    for line in lines:
        assert line.count("|") == len(bookstore.matrix.tasks) + 2


def test_html_heatmap():
    matrix = build_matrix(["T1", "T2"], ["R1", "R2"])
    levels = [Relevance.NOT_IMPORTANT, Relevance.RATHER_IMPORTANT,
              Relevance.IMPORTANT, Relevance.VERY_IMPORTANT]
    cells = [("R1", "T1"), ("R1", "T2"), ("R2", "T1"), ("R2", "T2")]
    for (iid, task), level in zip(cells, levels):
        matrix = rate(matrix, iid, task, level)
    page = matrix_to_html(matrix)
    assert page.startswith("<table>")
    assert page.endswith("</table>\n")
    for gray in ("#f5f5f5", "#d9d9d9", "#a6a6a6", "#737373"):
        assert gray in page
    assert page.index("#737373") > page.index("#f5f5f5")
    assert 'title="very_important"' in page


def test_html_escapes_markup():
    matrix = build_matrix(["<b>&task</b>"], ["R"])
    page = matrix_to_html(matrix)
    assert "<b>" not in page.replace("<b>&task</b>", "")
    assert "&lt;b&gt;&amp;task&lt;/b&gt;" in page


def test_html_unrated_cell_is_white():
    matrix = build_matrix(["T"], ["R"])
    page = matrix_to_html(matrix)
    assert 'style="background:#ffffff" title="unrated"' in page
    assert "—" in page

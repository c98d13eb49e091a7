"""Lexer, parser, and canonical printer for the ``.tac`` model format.

Syntax errors become diagnostics, never exceptions: the parser recovers at
the next top-level keyword so one run reports every problem it can find.
A parse yields a Model only when no error-severity diagnostic was emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .diagnostics import Diagnostic, Severity, SourceSpan, sort_diagnostics
from .model import (
    Cell,
    Comparator,
    Constraint,
    ConstraintMatrix,
    Direction,
    Edge,
    ExecutionPlan,
    InformationObject,
    InterestClass,
    Metric,
    Model,
    Priority,
    Relevance,
    Resolved,
    StakeholderInterest,
    Subtask,
    SystemResponsibility,
    Task,
    Unresolved,
    Waived,
    format_number,
    refinement_cycle,
)

# Parse-level rule ids (semantic rules R1..R12 live in taskcon.analysis).
SYNTAX = "syntax"
DUPLICATE = "duplicate"
EMPTY = "empty"
UNKNOWN_REF = "unknown-ref"
UNIT_MISMATCH = "unit-mismatch"
STRUCTURE = "structure"

TOP_KEYWORDS = ("metric", "info", "task", "interest", "matrix")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
_REVERSE_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def unescape_char(ch: str) -> str:
    """Map the character after a backslash to the character it stands for."""
    return _ESCAPES.get(ch, ch)

_WORD_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_WORD_CHARS = _WORD_START | set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str  # WORD NUMBER STRING { } : / -> => < <= > >= EOF
    value: str
    span: SourceSpan


@dataclass(frozen=True)
class ParseResult:
    """Parsed model plus everything the parser had to say about the input.

    ``model`` is None exactly when at least one diagnostic is an error.
    """

    model: Model | None
    diagnostics: list[Diagnostic]


class _Lexer:
    def __init__(self, source: str, file_name: str):
        self.source = source
        self.file = file_name
        self.pos = 0
        self.line = 1
        self.col = 1
        self.diagnostics: list[Diagnostic] = []

    def _advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.pos >= len(self.source):
                return
            if self.source[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _span(self, start_line: int, start_col: int) -> SourceSpan:
        return SourceSpan(self.file, start_line, start_col, self.line, self.col)

    def _error(self, message: str, start_line: int, start_col: int) -> None:
        self.diagnostics.append(
            Diagnostic(SYNTAX, Severity.ERROR, self._span(start_line, start_col), message)
        )

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        src = self.source
        while self.pos < len(src):
            ch = src[self.pos]
            if ch in " \t\r\n":
                self._advance()
                continue
            if ch == "/" and src.startswith("//", self.pos):
                while self.pos < len(src) and src[self.pos] != "\n":
                    self._advance()
                continue
            line, col = self.line, self.col
            if ch == '"':
                out.append(self._string(line, col))
                continue
            if ch in _WORD_START:
                start = self.pos
                while self.pos < len(src) and src[self.pos] in _WORD_CHARS:
                    self._advance()
                out.append(Token("WORD", src[start:self.pos], self._span(line, col)))
                continue
            if ch.isdigit() or (
                ch == "-" and self.pos + 1 < len(src) and src[self.pos + 1].isdigit()
            ):
                out.append(self._number(line, col))
                continue
            if ch == "-" and src.startswith("->", self.pos):
                self._advance(2)
                out.append(Token("->", "->", self._span(line, col)))
                continue
            if ch == "=" and src.startswith("=>", self.pos):
                self._advance(2)
                out.append(Token("=>", "=>", self._span(line, col)))
                continue
            if ch in "<>":
                op = ch
                self._advance()
                if self.pos < len(src) and src[self.pos] == "=":
                    op += "="
                    self._advance()
                out.append(Token(op, op, self._span(line, col)))
                continue
            if ch in "{}:/":
                self._advance()
                out.append(Token(ch, ch, self._span(line, col)))
                continue
            self._advance()
            self._error(f"unexpected character {ch!r}", line, col)
        eof_span = SourceSpan(self.file, self.line, self.col, self.line, self.col)
        out.append(Token("EOF", "", eof_span))
        return out

    def _string(self, line: int, col: int) -> Token:
        src = self.source
        self._advance()  # opening quote
        parts: list[str] = []
        while self.pos < len(src):
            ch = src[self.pos]
            if ch == '"':
                self._advance()
                return Token("STRING", "".join(parts), self._span(line, col))
            if ch == "\n":
                break
            if ch == "\\":
                self._advance()
                if self.pos < len(src) and src[self.pos] in _ESCAPES:
                    parts.append(_ESCAPES[src[self.pos]])
                    self._advance()
                else:
                    bad_line, bad_col = self.line, self.col
                    escaped = src[self.pos] if self.pos < len(src) else ""
                    self._error(f"invalid escape sequence '\\{escaped}'", bad_line, bad_col)
                    if self.pos < len(src):
                        self._advance()
                continue
            parts.append(ch)
            self._advance()
        self._error("unterminated string", line, col)
        return Token("STRING", "".join(parts), self._span(line, col))

    def _number(self, line: int, col: int) -> Token:
        src = self.source
        start = self.pos
        if src[self.pos] == "-":
            self._advance()
        while self.pos < len(src) and src[self.pos].isdigit():
            self._advance()
        if (
            self.pos + 1 < len(src)
            and src[self.pos] == "."
            and src[self.pos + 1].isdigit()
        ):
            self._advance()
            while self.pos < len(src) and src[self.pos].isdigit():
                self._advance()
        return Token("NUMBER", src[start:self.pos], self._span(line, col))


class _SyntaxAbort(Exception):
    """Internal unwind to the top-level recovery point."""


class _Parser:
    def __init__(self, tokens: list[Token], file_name: str):
        self.tokens = tokens
        self.file = file_name
        self.idx = 0
        self.diagnostics: list[Diagnostic] = []
        self.metrics: list[Metric] = []
        self.infos: list[InformationObject] = []
        self.tasks: list[Task] = []
        self.interests: list[StakeholderInterest] = []
        self.matrix_cells: list[tuple[str, str, Cell]] = []
        self.matrix_span: SourceSpan | None = None

    # --- token plumbing ---

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.idx + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.idx]
        if tok.kind != "EOF":
            self.idx += 1
        return tok

    def at_word(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.value == value

    def report(self, rule: str, span: SourceSpan, message: str) -> None:
        self.diagnostics.append(Diagnostic(rule, Severity.ERROR, span, message))

    def fail(self, message: str, span: SourceSpan | None = None) -> None:
        self.report(SYNTAX, span or self.peek().span, message)
        raise _SyntaxAbort

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what}, found {_describe(tok)}")
        return self.advance()

    def expect_word(self, value: str) -> Token:
        tok = self.peek()
        if not self.at_word(value):
            self.fail(f"expected '{value}', found {_describe(tok)}")
        return self.advance()

    def span_from(self, start: Token) -> SourceSpan:
        prev = self.tokens[max(self.idx - 1, 0)]
        return SourceSpan(
            self.file,
            start.span.start_line,
            start.span.start_col,
            prev.span.end_line,
            prev.span.end_col,
        )

    def nonempty(self, tok: Token, what: str) -> str:
        if tok.value == "":
            self.report(EMPTY, tok.span, f"empty {what}")
        return tok.value

    # --- top level ---

    def parse(self) -> None:
        while self.peek().kind != "EOF":
            tok = self.peek()
            try:
                if self.at_word("metric"):
                    self.parse_metric()
                elif self.at_word("info"):
                    self.parse_info()
                elif self.at_word("task"):
                    self.parse_task()
                elif self.at_word("interest"):
                    self.parse_interest()
                elif self.at_word("matrix"):
                    self.parse_matrix()
                else:
                    self.fail(
                        "expected a top-level declaration "
                        "(metric, info, task, interest, or matrix), "
                        f"found {_describe(tok)}"
                    )
            except _SyntaxAbort:
                self.recover(tok)

    def recover(self, error_at: Token) -> None:
        if self.peek() is error_at and self.peek().kind != "EOF":
            self.advance()
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind == "WORD" and tok.value in TOP_KEYWORDS:
                return
            self.advance()

    # --- declarations ---

    def parse_metric(self) -> None:
        start = self.expect_word("metric")
        name = self.expect("WORD", "metric name")
        self.expect("{", "'{'")
        self.expect_word("unit")
        self.expect(":", "':'")
        unit_tok = self.expect("STRING", "unit string")
        unit = self.nonempty(unit_tok, "unit")
        if unit and not _is_unit_word(unit):
            self.report(
                STRUCTURE,
                unit_tok.span,
                f"metric unit {unit!r} must be word-like "
                "(letters, digits, underscores, optionally joined by '/')",
            )
        self.expect_word("direction")
        self.expect(":", "':'")
        direction_tok = self.expect("WORD", "direction")
        direction = _DIRECTIONS.get(direction_tok.value)
        if direction is None:
            self.fail(
                "expected 'lower_is_better' or 'higher_is_better', "
                f"found '{direction_tok.value}'",
                direction_tok.span,
            )
        self.expect("}", "'}'")
        metric = Metric(name.value, unit, direction, span=self.span_from(start))
        if any(m.name == metric.name for m in self.metrics):
            self.report(DUPLICATE, name.span, f"duplicate metric \"{metric.name}\"")
        else:
            self.metrics.append(metric)

    def parse_info(self) -> None:
        start = self.expect_word("info")
        name_tok = self.expect("STRING", "information object name")
        name = self.nonempty(name_tok, "information object name")
        external = False
        if self.at_word("external"):
            self.advance()
            external = True
        description = ""
        if self.peek().kind == "{":
            self.advance()
            self.expect_word("description")
            self.expect(":", "':'")
            description = self.expect("STRING", "description string").value
            self.expect("}", "'}'")
        info = InformationObject(name, description, external, span=self.span_from(start))
        if any(i.name == info.name for i in self.infos):
            self.report(DUPLICATE, name_tok.span, f"duplicate information object \"{info.name}\"")
        else:
            self.infos.append(info)

    def parse_task(self) -> None:
        start = self.expect_word("task")
        name_tok = self.expect("STRING", "task name")
        name = self.nonempty(name_tok, "task name")
        self.expect("{", "'{'")
        self.expect_word("goal")
        self.expect(":", "':'")
        goal_tok = self.expect("STRING", "goal string")
        goal = self.nonempty(goal_tok, "goal")
        priority = Priority.NORMAL
        if self.at_word("priority"):
            self.advance()
            self.expect(":", "':'")
            prio_tok = self.expect("WORD", "priority")
            try:
                priority = Priority(prio_tok.value)
            except ValueError:
                self.fail(
                    f"unknown priority '{prio_tok.value}' "
                    "(expected mvp, high, normal, or low)",
                    prio_tok.span,
                )
        subtasks: list[Subtask] = []
        while self.at_word("subtask"):
            sub = self.parse_subtask()
            if any(s.name == sub.name for s in subtasks):
                self.report(
                    DUPLICATE,
                    sub.span or name_tok.span,
                    f"duplicate subtask \"{sub.name}\" in task \"{name}\"",
                )
            else:
                subtasks.append(sub)
        plan = ExecutionPlan()
        if self.at_word("plan"):
            plan = self.parse_plan()
        self.expect("}", "'}'")
        task = Task(
            name,
            goal,
            priority,
            tuple(subtasks),
            plan,
            span=self.span_from(start),
        )
        if any(t.name == task.name for t in self.tasks):
            self.report(DUPLICATE, name_tok.span, f"duplicate task \"{task.name}\"")
        else:
            self.tasks.append(task)

    def parse_subtask(self) -> Subtask:
        start = self.expect_word("subtask")
        name_tok = self.expect("STRING", "subtask name")
        name = self.nonempty(name_tok, "subtask name")
        self.expect("{", "'{'")
        self.expect_word("intention")
        self.expect(":", "':'")
        intention = self.nonempty(self.expect("STRING", "intention string"), "intention")
        responsibilities: list[SystemResponsibility] = []
        while self.at_word("responsibility"):
            resp_start = self.advance()
            text_tok = self.expect("STRING", "responsibility description")
            text = self.nonempty(text_tok, "responsibility")
            responsibilities.append(
                SystemResponsibility(text, span=self.span_from(resp_start))
            )
        if not responsibilities:
            self.report(
                STRUCTURE,
                self.peek().span,
                f"subtask \"{name}\" needs at least one responsibility",
            )
        pre: list[str] = []
        while self.at_word("pre"):
            self.advance()
            self.expect(":", "':'")
            pre.append(self.expect("STRING", "precondition string").value)
        post: list[str] = []
        while self.at_word("post"):
            self.advance()
            self.expect(":", "':'")
            post.append(self.expect("STRING", "postcondition string").value)
        consumes: list[str] = []
        produces: list[str] = []
        while self.at_word("consumes") or self.at_word("produces"):
            io_kind = self.advance().value
            io_tok = self.expect("STRING", "information object name")
            target = consumes if io_kind == "consumes" else produces
            if io_tok.value in target:
                self.report(
                    DUPLICATE,
                    io_tok.span,
                    f"\"{io_tok.value}\" listed twice under {io_kind}",
                )
            else:
                target.append(io_tok.value)
        refined_in = None
        if self.at_word("refined_in"):
            self.advance()
            refined_in = self.expect("STRING", "model path").value
        self.expect("}", "'}'")
        span = self.span_from(start)
        overlap = [n for n in consumes if n in produces]
        for dup in overlap:
            self.report(
                STRUCTURE,
                span,
                f"\"{dup}\" appears in both consumes and produces of subtask \"{name}\"",
            )
        return Subtask(
            name,
            intention,
            tuple(responsibilities),
            tuple(pre),
            tuple(post),
            tuple(consumes),
            tuple(produces),
            refined_in,
            span=span,
        )

    def parse_plan(self) -> ExecutionPlan:
        start = self.expect_word("plan")
        self.expect("{", "'{'")
        edges: list[Edge] = []
        while self.peek().kind == "STRING":
            edge_start = self.advance()
            self.expect("->", "'->'")
            target = self.expect("STRING", "subtask name")
            guard = None
            if self.at_word("if"):
                self.advance()
                guard = self.expect("STRING", "guard string").value
            edges.append(
                Edge(edge_start.value, target.value, guard, span=self.span_from(edge_start))
            )
        self.expect("}", "'}'")
        return ExecutionPlan(tuple(edges), span=self.span_from(start))

    def parse_interest(self) -> None:
        start = self.expect_word("interest")
        id_tok = self.expect("WORD", "interest id")
        statement = self.nonempty(self.expect("STRING", "interest statement"), "statement")
        self.expect("{", "'{'")
        self.expect_word("class")
        self.expect(":", "':'")
        class_tok = self.expect("WORD", "interest class")
        try:
            interest_class = InterestClass(class_tok.value)
        except ValueError:
            self.fail(f"unknown interest class '{class_tok.value}'", class_tok.span)
        refines = None
        if self.at_word("refines"):
            self.advance()
            self.expect(":", "':'")
            refines = self.expect("WORD", "parent interest id").value
        self.expect("}", "'}'")
        interest = StakeholderInterest(
            id_tok.value, statement, interest_class, refines, span=self.span_from(start)
        )
        if any(i.id == interest.id for i in self.interests):
            self.report(DUPLICATE, id_tok.span, f"duplicate interest \"{interest.id}\"")
        else:
            self.interests.append(interest)

    def parse_matrix(self) -> None:
        start = self.expect_word("matrix")
        if self.matrix_span is not None:
            self.report(DUPLICATE, start.span, "a model holds exactly one matrix")
        self.expect("{", "'{'")
        cells: list[tuple[str, str, Cell]] = []
        while self.peek().kind == "WORD" and not (
            self.peek().value in TOP_KEYWORDS and self.peek(1).kind != "WORD"
        ):
            cells.append(self.parse_cell())
        self.expect("}", "'}'")
        if self.matrix_span is None:
            self.matrix_span = self.span_from(start)
            self.matrix_cells = cells

    def parse_cell(self) -> tuple[str, str, Cell]:
        interest_tok = self.expect("WORD", "interest id")
        self.expect_word("x")
        task_tok = self.expect("STRING", "task name")
        relevance = None
        if self.peek().kind == ":":
            self.advance()
            rel_tok = self.expect("WORD", "relevance")
            try:
                relevance = Relevance(rel_tok.value)
            except ValueError:
                self.fail(f"unknown relevance '{rel_tok.value}'", rel_tok.span)
        self.expect("=>", "'=>'")
        resolution: Unresolved | Waived | Resolved
        if self.at_word("unresolved"):
            self.advance()
            resolution = Unresolved()
        elif self.at_word("waived"):
            self.advance()
            reason = self.nonempty(self.expect("STRING", "waiver reason"), "waiver reason")
            resolution = Waived(reason)
        else:
            metric_tok = self.expect("WORD", "metric name")
            cmp_tok = self.peek()
            if cmp_tok.kind not in ("<", "<=", ">", ">="):
                self.fail(f"expected a comparator, found {_describe(cmp_tok)}")
            self.advance()
            number_tok = self.expect("NUMBER", "threshold number")
            unit_parts = [self.expect("WORD", "unit").value]
            while self.peek().kind == "/":
                self.advance()
                unit_parts.append(self.expect("WORD", "unit").value)
            constraint = Constraint(
                metric_tok.value,
                Comparator(cmp_tok.value),
                Decimal(number_tok.value),
                "/".join(unit_parts),
                span=self.span_from(metric_tok),
            )
            resolution = Resolved(constraint)
        cell_span = self.span_from(interest_tok)
        return interest_tok.value, task_tok.value, Cell(relevance, resolution, span=cell_span)

    # --- post-parse resolution ---

    def resolve_references(self) -> None:
        info_names = {i.name for i in self.infos}
        interest_ids = {i.id for i in self.interests}
        task_names = {t.name for t in self.tasks}
        metric_by_name = {m.name: m for m in self.metrics}

        for task in self.tasks:
            for sub in task.subtasks:
                for kind, names in (("consumes", sub.consumes), ("produces", sub.produces)):
                    for name in names:
                        if name not in info_names:
                            self.report(
                                UNKNOWN_REF,
                                sub.span,
                                f"unknown information object \"{name}\" in {kind} "
                                f"of subtask \"{sub.name}\"",
                            )

        for interest in self.interests:
            if interest.refines is not None and interest.refines not in interest_ids:
                self.report(
                    UNKNOWN_REF,
                    interest.span,
                    f"interest \"{interest.id}\" refines unknown interest "
                    f"\"{interest.refines}\"",
                )
        cycle = refinement_cycle(tuple(self.interests))
        if cycle is not None:
            loop = " -> ".join((*cycle, cycle[0]))
            head = self.interests[0].span if self.interests else self.matrix_span
            for interest in self.interests:
                if interest.id == cycle[0]:
                    head = interest.span
            self.report(STRUCTURE, head, f"interest refinement contains a cycle: {loop}")

        for interest_id, task_name, cell in self.matrix_cells:
            if interest_id not in interest_ids:
                self.report(
                    UNKNOWN_REF, cell.span, f"unknown interest \"{interest_id}\" in matrix cell"
                )
            if task_name not in task_names:
                self.report(
                    UNKNOWN_REF, cell.span, f"unknown task \"{task_name}\" in matrix cell"
                )
            if isinstance(cell.resolution, Resolved):
                constraint = cell.resolution.constraint
                metric = metric_by_name.get(constraint.metric)
                if metric is None:
                    self.report(
                        UNKNOWN_REF,
                        constraint.span,
                        f"unknown metric \"{constraint.metric}\" in constraint",
                    )
                elif constraint.unit != metric.unit:
                    self.report(
                        UNIT_MISMATCH,
                        constraint.span,
                        f"constraint unit \"{constraint.unit}\" does not match "
                        f"metric \"{metric.name}\" unit \"{metric.unit}\"",
                    )

    def build_matrix(self) -> ConstraintMatrix:
        if not self.matrix_cells:
            return ConstraintMatrix((), (), {})
        row_order: list[str] = []
        col_order: list[str] = []
        cells: dict[tuple[str, str], Cell] = {}
        for interest_id, task_name, cell in self.matrix_cells:
            if interest_id not in row_order:
                row_order.append(interest_id)
            if task_name not in col_order:
                col_order.append(task_name)
            key = (interest_id, task_name)
            if key in cells:
                self.report(
                    DUPLICATE,
                    cell.span,
                    f"duplicate matrix cell {interest_id} x \"{task_name}\"",
                )
            else:
                cells[key] = cell
        for interest_id in row_order:
            for task_name in col_order:
                if (interest_id, task_name) not in cells:
                    self.report(
                        STRUCTURE,
                        self.matrix_span,
                        f"matrix is missing cell {interest_id} x \"{task_name}\" "
                        "(cells must cover the full row-column cross product)",
                    )
        return ConstraintMatrix(tuple(col_order), tuple(row_order), cells)


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "STRING":
        return f'string "{tok.value}"' if len(tok.value) <= 20 else "a string"
    if tok.kind in ("WORD", "NUMBER"):
        return f"'{tok.value}'"
    return f"'{tok.kind}'"


def _is_unit_word(unit: str) -> bool:
    parts = unit.split("/")
    return all(
        part != "" and part[0] in _WORD_START and set(part) <= _WORD_CHARS
        for part in parts
    )


_DIRECTIONS = {d.value: d for d in Direction}


def parse(source: str, file_name: str = "<memory>") -> ParseResult:
    """Parse ``.tac`` source into a Model.

    Never raises on bad input: every problem is a located diagnostic, and the
    model is withheld whenever an error-severity diagnostic exists.
    """
    lexer = _Lexer(source, file_name)
    tokens = lexer.tokens()
    parser = _Parser(tokens, file_name)
    parser.diagnostics.extend(lexer.diagnostics)
    parser.parse()
    matrix = parser.build_matrix()
    parser.resolve_references()
    diagnostics = sort_diagnostics(parser.diagnostics)
    if any(d.severity == Severity.ERROR for d in diagnostics):
        return ParseResult(None, diagnostics)
    model = Model(
        tasks=tuple(parser.tasks),
        info_objects=tuple(parser.infos),
        interests=tuple(parser.interests),
        metrics=tuple(parser.metrics),
        matrix=matrix,
        source_name=file_name,
    )
    return ParseResult(model, diagnostics)


# --- canonical printer ---


def _quote(text: str) -> str:
    return '"' + "".join(_REVERSE_ESCAPES.get(ch, ch) for ch in text) + '"'


def _print_metric(metric: Metric, out: list[str]) -> None:
    out.append(f"metric {metric.name} {{")
    out.append(f"  unit: {_quote(metric.unit)}")
    out.append(f"  direction: {metric.direction.value}")
    out.append("}")


def _print_info(info: InformationObject, out: list[str]) -> None:
    head = f"info {_quote(info.name)}"
    if info.external:
        head += " external"
    if info.description:
        out.append(head + " {")
        out.append(f"  description: {_quote(info.description)}")
        out.append("}")
    else:
        out.append(head)


def _print_subtask(sub: Subtask, out: list[str]) -> None:
    out.append(f"  subtask {_quote(sub.name)} {{")
    out.append(f"    intention: {_quote(sub.intention)}")
    for resp in sub.responsibilities:
        out.append(f"    responsibility {_quote(resp.description)}")
    for condition in sub.preconditions:
        out.append(f"    pre: {_quote(condition)}")
    for condition in sub.postconditions:
        out.append(f"    post: {_quote(condition)}")
    for name in sub.consumes:
        out.append(f"    consumes {_quote(name)}")
    for name in sub.produces:
        out.append(f"    produces {_quote(name)}")
    if sub.refined_in is not None:
        out.append(f"    refined_in {_quote(sub.refined_in)}")
    out.append("  }")


def _print_task(task: Task, out: list[str]) -> None:
    out.append(f"task {_quote(task.name)} {{")
    out.append(f"  goal: {_quote(task.goal)}")
    out.append(f"  priority: {task.priority.value}")
    for sub in task.subtasks:
        _print_subtask(sub, out)
    if task.plan.edges:
        out.append("  plan {")
        for edge in task.plan.edges:
            line = f"    {_quote(edge.source)} -> {_quote(edge.target)}"
            if edge.guard is not None:
                line += f" if {_quote(edge.guard)}"
            out.append(line)
        out.append("  }")
    out.append("}")


def _print_interest(interest: StakeholderInterest, out: list[str]) -> None:
    out.append(f"interest {interest.id} {_quote(interest.statement)} {{")
    out.append(f"  class: {interest.interest_class.value}")
    if interest.refines is not None:
        out.append(f"  refines: {interest.refines}")
    out.append("}")


def format_cell_line(interest_id: str, task_name: str, cell: Cell) -> str:
    """One matrix cell in concrete syntax, without indentation."""
    line = f"{interest_id} x {_quote(task_name)}"
    if cell.relevance is not None:
        line += f": {cell.relevance.value}"
    line += " => "
    if isinstance(cell.resolution, Resolved):
        line += cell.resolution.constraint.text()
    elif isinstance(cell.resolution, Waived):
        line += f"waived {_quote(cell.resolution.reason)}"
    else:
        line += "unresolved"
    return line


def _print_matrix(matrix: ConstraintMatrix, out: list[str]) -> None:
    out.append("matrix {")
    for interest_id in matrix.interests:
        for task_name in matrix.tasks:
            cell = matrix.cells[(interest_id, task_name)]
            out.append("  " + format_cell_line(interest_id, task_name, cell))
    out.append("}")


def print_model(model: Model) -> str:
    """Emit canonical ``.tac`` text: declaration order, 2-space indentation,
    numbers without trailing zeros. The empty model prints as "".
    """
    blocks: list[str] = []
    for metric in model.metrics:
        lines: list[str] = []
        _print_metric(metric, lines)
        blocks.append("\n".join(lines))
    for info in model.info_objects:
        lines = []
        _print_info(info, lines)
        blocks.append("\n".join(lines))
    for task in model.tasks:
        lines = []
        _print_task(task, lines)
        blocks.append("\n".join(lines))
    for interest in model.interests:
        lines = []
        _print_interest(interest, lines)
        blocks.append("\n".join(lines))
    if not model.matrix.is_empty():
        lines = []
        _print_matrix(model.matrix, lines)
        blocks.append("\n".join(lines))
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"

"""Source spans, diagnostics, and the one-line diagnostic text format."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class SourceSpan:
    """Half-open region of a source document, 1-based lines and columns."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """A single finding: stable rule id, severity, location, message.

    Rule ids are public API: semantic rules use R1..R12, parse-level
    findings use lowercase word ids (``syntax``, ``duplicate``, ``empty``,
    ``unknown-ref``, ``matrix-shape``).
    """

    rule: str
    severity: Severity
    span: SourceSpan
    message: str


def format_diagnostic(diag: Diagnostic) -> str:
    """Render the stable one-line form ``file:line:col: severity[RULE] message``."""
    span = diag.span
    return (
        f"{span.file}:{span.start_line}:{span.start_col}: "
        f"{diag.severity.value}[{diag.rule}] {diag.message}"
    )


def _rule_rank(rule: str) -> tuple[int, str]:
    # R2 sorts before R10; non-R rules (parser ids) keep their textual order.
    if rule.startswith("R") and rule[1:].isdigit():
        return (int(rule[1:]), "")
    return (0, rule)


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Order findings by (file, start position, rule id, message)."""
    return sorted(
        diags,
        key=lambda d: (
            d.span.file,
            d.span.start_line,
            d.span.start_col,
            _rule_rank(d.rule),
            d.message,
        ),
    )

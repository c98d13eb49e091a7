"""Command line front end.

Subcommands: check (parse and validate), render (DOT or matrix tables),
derive (propose constraints from anchors), monitor (judge measurement
records against the matrix), and init (write a starter model).

Exit codes are part of the contract: 0 means clean, 1 means findings in
the model or unfulfilled constraints, 2 means the invocation itself was
unusable (bad flags, missing files, broken config).
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from . import dsl
from .analysis import RULES, validate
from .diagnostics import (
    Diagnostic,
    Severity,
    SourceSpan,
    format_diagnostic,
    sort_diagnostics,
)
from .model import Cell, Model
from .monitor import (
    NoResolvedCellsError,
    fulfillment_report,
    load_csv,
    load_ndjson,
    report_to_json,
    report_to_text,
)
from .render import (
    InvalidModelError,
    matrix_to_html,
    matrix_to_markdown,
    to_dot,
)
from .tailor import (
    AnchorUnresolvedError,
    DerivationMode,
    DerivationPolicy,
    DuplicateError,
    UnknownCellError,
    UnratedCellError,
    derive_proposals,
)

CONFIG_NAME = "taskcon.toml"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Config:
    strict: bool = False
    quantile: Decimal = Decimal("1")
    suppress: tuple[str, ...] = ()
    derive: DerivationPolicy = field(default_factory=DerivationPolicy)


def _parse_suppress(values) -> tuple[str, ...]:
    rules = []
    for value in values:
        for rule in str(value).replace(",", " ").split():
            if rule not in RULES:
                raise ConfigError(
                    f"cannot suppress {rule!r}: rule ids are R1..R12")
            if rule not in rules:
                rules.append(rule)
    return tuple(rules)


def load_config(text: str) -> Config:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    unknown = set(data) - {"strict", "quantile", "suppress", "derive"}
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")

    strict = data.get("strict", False)
    if not isinstance(strict, bool):
        raise ConfigError("config key 'strict' must be a boolean")

    quantile = data.get("quantile", 1)
    if isinstance(quantile, bool) or not isinstance(quantile, (int, float)):
        raise ConfigError("config key 'quantile' must be a number")
    quantile = Decimal(str(quantile))
    if not 0 < quantile <= 1:
        raise ConfigError("config key 'quantile' must be in (0, 1]")

    suppress_raw = data.get("suppress", [])
    if not isinstance(suppress_raw, list):
        raise ConfigError("config key 'suppress' must be a list of rule ids")
    suppress = _parse_suppress(suppress_raw)

    derive_raw = data.get("derive", {})
    if not isinstance(derive_raw, dict):
        raise ConfigError("config key 'derive' must be a table")
    unknown = set(derive_raw) - {"mode", "step", "rounding"}
    if unknown:
        raise ConfigError(f"unknown config key 'derive.{sorted(unknown)[0]}'")
    mode_name = derive_raw.get("mode", "additive")
    try:
        mode = DerivationMode(mode_name)
    except ValueError:
        raise ConfigError(
            "config key 'derive.mode' must be 'additive' or 'multiplicative'")
    step_raw = derive_raw.get("step", "1")
    if isinstance(step_raw, bool) or not isinstance(step_raw, (int, float, str)):
        raise ConfigError("config key 'derive.step' must be a number")
    try:
        step = Decimal(str(step_raw))
    except InvalidOperation:
        raise ConfigError("config key 'derive.step' must be a number")
    rounding = derive_raw.get("rounding", 2)
    if isinstance(rounding, bool) or not isinstance(rounding, int):
        raise ConfigError("config key 'derive.rounding' must be an integer")
    try:
        policy = DerivationPolicy(mode, step, rounding)
    except ValueError as exc:
        raise ConfigError(f"config table 'derive' is invalid: {exc}")

    return Config(strict, quantile, suppress, policy)


def find_config(explicit: str | None) -> Config:
    if explicit is not None:
        path = Path(explicit)
        if not path.is_file():
            raise ConfigError(f"config file not found: {explicit}")
        return load_config(path.read_text())
    default = Path(CONFIG_NAME)
    if default.is_file():
        return load_config(default.read_text())
    return Config()


def _use_color(stream) -> bool:
    if "TASKCON_NO_COLOR" in os.environ:
        return False
    return bool(getattr(stream, "isatty", lambda: False)())


def _emit(diags, stream=None) -> None:
    stream = stream or sys.stderr
    color = _use_color(stream)
    for diag in diags:
        line = format_diagnostic(diag)
        if color:
            code = "31" if diag.severity is Severity.ERROR else "33"
            line = f"\x1b[{code}m{line}\x1b[0m"
        print(line, file=stream)


def _fail(message: str) -> int:
    print(f"taskcon: {message}", file=sys.stderr)
    return 2


def _parse_file(path_text: str):
    """Returns (ParseResult, None) or (None, exit_code) on an IO failure."""
    path = Path(path_text)
    try:
        text = path.read_text()
    except OSError as exc:
        return None, _fail(f"cannot read {path_text}: {exc.strerror or exc}")
    return dsl.parse(text, path_text), None


def _check_refinement_files(model: Model, path_text: str) -> list[Diagnostic]:
    base = Path(path_text).parent
    found = []
    for task in model.tasks:
        for subtask in task.subtasks:
            target = subtask.refined_in
            if target is None or (base / target).is_file():
                continue
            span = subtask.span or SourceSpan(path_text, 1, 1, 1, 1)
            found.append(Diagnostic(
                "missing-file", Severity.ERROR, span,
                f'subtask "{subtask.name}" is refined in missing file'
                f' "{target}"'))
    return found


def cmd_check(args, config: Config) -> int:
    suppress = set(config.suppress)
    if args.suppress:
        try:
            suppress = set(_parse_suppress(args.suppress))
        except ConfigError as exc:
            return _fail(str(exc))
    strict = args.strict or config.strict

    findings: list[Diagnostic] = []
    for file_name in args.files:
        result, code = _parse_file(file_name)
        if result is None:
            return code
        findings.extend(result.diagnostics)
        if result.model is not None:
            findings.extend(validate(result.model))
            findings.extend(_check_refinement_files(result.model, file_name))

    findings = sort_diagnostics(
        [d for d in findings if d.rule not in suppress])
    _emit(findings)
    blocking = any(
        d.severity is Severity.ERROR
        or (strict and d.severity is Severity.WARNING)
        for d in findings)
    return 1 if blocking else 0


def _write_artifact(text: str, out: str | None) -> int:
    if out is None:
        sys.stdout.write(text)
        return 0
    try:
        Path(out).write_text(text)
    except OSError as exc:
        return _fail(f"cannot write {out}: {exc.strerror or exc}")
    return 0


def cmd_render(args, config: Config) -> int:
    result, code = _parse_file(args.file)
    if result is None:
        return code
    if result.model is None:
        _emit(sort_diagnostics(result.diagnostics))
        return 1
    model = result.model

    if args.format == "dot":
        names = [t.name for t in model.tasks]
        if args.task is not None:
            if args.task not in names:
                return _fail(f'no task named "{args.task}" in {args.file}')
            task = model.tasks[names.index(args.task)]
        elif len(model.tasks) == 1:
            task = model.tasks[0]
        else:
            return _fail("--task is required when the model holds "
                         f"{len(model.tasks)} tasks")
        try:
            text = to_dot(task, model.info_objects)
        except InvalidModelError as exc:
            print(f"taskcon: {exc}", file=sys.stderr)
            return 1
    else:
        if not model.matrix.cells:
            return _fail(f"{args.file} has no matrix to render")
        if args.format == "md":
            text = matrix_to_markdown(model.matrix, args.view)
        else:
            text = matrix_to_html(model.matrix)
    return _write_artifact(text, args.out)


_ANCHOR_RE = re.compile(r'(\w+)\s+x\s+"((?:[^"\\]|\\.)*)"')


def _parse_anchor(raw: str) -> tuple[str, str] | None:
    """Read an anchor written like a matrix cell, INTEREST x "Task",
    or in the colon shorthand INTEREST:TASK."""
    match = _ANCHOR_RE.fullmatch(raw.strip())
    if match:
        task = re.sub(r"\\(.)", lambda m: dsl.unescape_char(m[1]), match[2])
        return match[1], task
    interest_id, sep, task_name = raw.partition(":")
    if sep and interest_id and task_name:
        return interest_id, task_name
    return None


def cmd_derive(args, config: Config) -> int:
    result, code = _parse_file(args.file)
    if result is None:
        return code
    if result.model is None:
        _emit(sort_diagnostics(result.diagnostics))
        return 1
    matrix = result.model.matrix
    if not matrix.cells:
        return _fail(f"{args.file} has no matrix to derive from")

    anchors = []
    for raw in args.anchor:
        parsed = _parse_anchor(raw)
        if parsed is None:
            return _fail(f'anchor {raw!r} must look like INTEREST x "Task" '
                         "or INTEREST:TASK")
        anchors.append(parsed)

    policy = config.derive
    mode = DerivationMode(args.mode) if args.mode else policy.mode
    step = args.step if args.step is not None else policy.step
    rounding = args.rounding if args.rounding is not None else policy.rounding
    try:
        policy = DerivationPolicy(mode, step, rounding)
    except ValueError as exc:
        return _fail(str(exc))

    try:
        proposals = derive_proposals(matrix, anchors, policy)
    except (UnknownCellError, DuplicateError) as exc:
        return _fail(str(exc))
    except (AnchorUnresolvedError, UnratedCellError, ValueError) as exc:
        print(f"taskcon: {exc}", file=sys.stderr)
        return 1

    for proposal in proposals:
        relevance = matrix.cells[
            (proposal.interest_id, proposal.task_name)].relevance
        line = dsl.format_cell_line(
            proposal.interest_id, proposal.task_name,
            Cell(relevance, proposal.resolution))
        print(line)
    return 0


def _load_records(path_text: str):
    path = Path(path_text)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path_text}: {exc.strerror or exc}")
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return load_csv(text)
    if suffix in (".ndjson", ".jsonl", ".json"):
        return load_ndjson(text)
    raise ValueError(
        f"cannot tell the record format of {path_text}: use .csv, .ndjson,"
        " .jsonl, or .json")


def cmd_monitor(args, config: Config) -> int:
    result, code = _parse_file(args.file)
    if result is None:
        return code
    if result.model is None:
        _emit(sort_diagnostics(result.diagnostics))
        return 1

    try:
        records, malformed = _load_records(args.records)
    except ValueError as exc:
        return _fail(str(exc))
    if malformed and not records:
        return _fail(f"all {malformed} records in {args.records} are malformed")

    quantile = args.quantile if args.quantile is not None else config.quantile
    try:
        report = fulfillment_report(
            result.model.matrix, records, quantile, malformed)
    except (NoResolvedCellsError, ValueError) as exc:
        return _fail(str(exc))

    if args.format == "json":
        sys.stdout.write(report_to_json(report))
    else:
        sys.stdout.write(report_to_text(report))
    return 0 if report.all_fulfilled() else 1


INIT_TEMPLATE = '''\
// Starter model. Rename things, then run: taskcon check <this file>

metric response_time {
  unit: "ms"
  direction: lower_is_better
}

info "Example input" {
  description: "Something one step produces and a later step needs."
}

task "Example task" {
  goal: "What the user wants to get done, in one sentence."
  priority: normal
  subtask "Collect input" {
    intention: "What the user is trying to do at this step."
    responsibility "What the system must contribute here."
    produces "Example input"
  }
  subtask "Show result" {
    intention: "What the user expects to see at the end."
    responsibility "Present the outcome."
    consumes "Example input"
  }
  plan {
    "Collect input" -> "Show result"
  }
}

// Checklist: walk all nine interest classes for every task. The class
// tags the grammar accepts are listed after each class.
//
//   interface        user_interface, application_interface
//   informational    informational
//   behavioral       behavioral
//   operating        operating
//   human            human
//   lifecycle        lifecycle
//   economic         economic
//   data governance  data_governance
//   legal and policy legal_policy

interest RESP "Answers arrive fast enough to keep the user in flow." {
  class: behavioral
}

matrix {
  RESP x "Example task": very_important => response_time < 2 ms
}
'''


def cmd_init(args, config: Config) -> int:
    path = Path(args.path)
    if path.exists() and not args.force:
        return _fail(f"{args.path} already exists (use --force to overwrite)")
    try:
        path.write_text(INIT_TEMPLATE)
    except OSError as exc:
        return _fail(f"cannot write {args.path}: {exc.strerror or exc}")
    print(f"wrote {args.path}", file=sys.stderr)
    return 0


def _decimal_arg(text: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskcon",
        description="Task models, stakeholder interests, and the matrix "
                    "of constraints between them.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help=f"config file (default: ./{CONFIG_NAME} if present)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common],
                       help="parse files and report findings")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--strict", action="store_true",
                   help="treat warnings as blocking")
    p.add_argument("--suppress", action="append", default=[], metavar="RULES",
                   help="rule ids to drop, comma separated (repeatable)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("render", parents=[common],
                       help="draw a task or print the matrix")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--format", choices=["dot", "md", "html"], default="dot")
    p.add_argument("--task", metavar="NAME",
                   help="task to draw (needed when several exist)")
    p.add_argument("--view", choices=["relevance", "constraints"],
                   default="constraints", help="matrix view for md output")
    p.add_argument("-o", "--out", metavar="FILE",
                   help="write here instead of stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("derive", parents=[common],
                       help="propose constraints for unresolved cells")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--anchor", action="append", required=True,
                   metavar="CELL",
                   help='resolved cell to start from, written INTEREST x '
                        '"Task" or INTEREST:TASK (repeatable, one per row)')
    p.add_argument("--mode", choices=["additive", "multiplicative"])
    p.add_argument("--step", type=_decimal_arg, metavar="N")
    p.add_argument("--rounding", type=int, metavar="PLACES")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("monitor", parents=[common],
                       help="judge measurement records against the matrix")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--records", required=True, metavar="FILE",
                   help="measurements as .csv or .ndjson/.jsonl")
    p.add_argument("--quantile", type=_decimal_arg, metavar="Q",
                   help="required pass rate in (0, 1] (default 1)")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("init", parents=[common],
                       help="write a starter model file")
    p.add_argument("path", nargs="?", default="model.tac", metavar="FILE")
    p.add_argument("--force", action="store_true",
                   help="overwrite an existing file")
    p.set_defaults(func=cmd_init)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        config = find_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc))
    return args.func(args, config)


def entrypoint() -> None:
    raise SystemExit(main())

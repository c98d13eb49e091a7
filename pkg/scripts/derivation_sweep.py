#!/usr/bin/env python3
"""Compare derivation policies against hand-set thresholds.

For each matrix row the most relevant resolved cell is kept as an anchor,
every other resolved cell is blanked, and derive_proposals fills the row
back in under a grid of policies. The output table puts the proposals next
to the hand-set values from the file, plus the mean absolute relative
deviation per policy.

Usage: python3 scripts/derivation_sweep.py [model.tac]
"""

import argparse
import dataclasses
import sys
from decimal import Decimal
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from taskcon import dsl
from taskcon.model import Resolved, Unresolved, format_number
from taskcon.tailor import DerivationMode, DerivationPolicy, derive_proposals

POLICIES = [
    ("add 0.5", DerivationPolicy(DerivationMode.ADDITIVE, Decimal("0.5"))),
    ("add 1", DerivationPolicy(DerivationMode.ADDITIVE, Decimal("1"))),
    ("mul 0.25", DerivationPolicy(DerivationMode.MULTIPLICATIVE, Decimal("0.25"))),
    ("mul 0.5", DerivationPolicy(DerivationMode.MULTIPLICATIVE, Decimal("0.5"))),
]


def pick_anchor(matrix, interest_id):
    """Most relevant rated and resolved cell of the row, leftmost on ties."""
    best = None
    for task_name in matrix.tasks:
        cell = matrix.cells[(interest_id, task_name)]
        if cell.relevance is None or not isinstance(cell.resolution, Resolved):
            continue
        if best is None or cell.relevance > matrix.cells[
                (interest_id, best)].relevance:
            best = task_name
    return best


def blank_row(matrix, interest_id, anchor_task):
    cells = dict(matrix.cells)
    for task_name in matrix.tasks:
        if task_name == anchor_task:
            continue
        cell = cells[(interest_id, task_name)]
        if cell.relevance is not None and isinstance(cell.resolution, Resolved):
            cells[(interest_id, task_name)] = dataclasses.replace(
                cell, resolution=Unresolved())
    return dataclasses.replace(matrix, cells=cells)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("model", nargs="?",
                        default="tests/fixtures/bookstore.tac")
    args = parser.parse_args()

    result = dsl.parse(Path(args.model).read_text(), args.model)
    if result.model is None:
        for diag in result.diagnostics:
            print(diag.message, file=sys.stderr)
        return 1
    matrix = result.model.matrix
    if not matrix.cells:
        print("model has no matrix", file=sys.stderr)
        return 1

    deviations = {label: [] for label, _ in POLICIES}
    width = max(len(t) for t in matrix.tasks)
    print(f"{'row':8} {'task':{width}} {'hand-set':>10} "
          + " ".join(f"{label:>10}" for label, _ in POLICIES))
    for interest_id in matrix.interests:
        anchor_task = pick_anchor(matrix, interest_id)
        if anchor_task is None:
            continue
        blanked = blank_row(matrix, interest_id, anchor_task)
        proposals = {}
        for label, policy in POLICIES:
            for p in derive_proposals(blanked, [(interest_id, anchor_task)],
                                      policy):
                proposals[(label, p.task_name)] = \
                    p.resolution.constraint.threshold
        for task_name in matrix.tasks:
            if task_name == anchor_task:
                continue
            cell = matrix.cells[(interest_id, task_name)]
            if not isinstance(cell.resolution, Resolved):
                continue
            human = cell.resolution.constraint.threshold
            row = [f"{interest_id:8} {task_name:{width}} "
                   f"{format_number(human):>10}"]
            for label, _ in POLICIES:
                proposed = proposals[(label, task_name)]
                row.append(f"{format_number(proposed):>10}")
                if human:
                    deviations[label].append(abs(proposed - human) / abs(human))
            print(" ".join(row))

    print()
    for label, _ in POLICIES:
        values = deviations[label]
        mean = sum(values) / len(values) if values else Decimal(0)
        print(f"mean |proposal - hand-set| / |hand-set| under {label:9}: "
              f"{float(mean):.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

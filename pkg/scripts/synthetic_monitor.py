#!/usr/bin/env python3
"""Fulfillment under synthetic load, across a sweep of quantiles.

Draws noisy measurements around each resolved constraint of a model and
reports how many cells stay fulfilled as the required quantile climbs.
Useful for getting a feel for how tight a model's thresholds are relative
to measurement noise.

Usage: python3 scripts/synthetic_monitor.py [model.tac] [--samples N]
"""

import argparse
import random
import sys
from decimal import Decimal
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from taskcon import dsl
from taskcon.model import Direction, Resolved
from taskcon.monitor import MonitorRecord, fulfillment_report

QUANTILES = [Decimal(q) / 100 for q in (50, 75, 90, 95, 99)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("model", nargs="?",
                        default="tests/fixtures/bookstore.tac")
    parser.add_argument("--samples", type=int, default=200,
                        help="measurements per cell (default 200)")
    parser.add_argument("--noise", type=float, default=0.25,
                        help="relative spread of the synthetic load")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    result = dsl.parse(Path(args.model).read_text(), args.model)
    if result.model is None:
        for diag in result.diagnostics:
            print(diag.message, file=sys.stderr)
        return 1
    model = result.model
    directions = {m.name: m.direction for m in model.metrics}

    rng = random.Random(args.seed)
    records = []
    for (interest_id, task_name), cell in model.matrix.cells.items():
        if not isinstance(cell.resolution, Resolved):
            continue
        constraint = cell.resolution.constraint
        center = float(constraint.threshold)
        lower = directions.get(
            constraint.metric, Direction.LOWER_IS_BETTER) \
            is Direction.LOWER_IS_BETTER
        for _ in range(args.samples):
            # aim a bit inside the threshold, with symmetric noise around it
            factor = rng.gauss(0.85 if lower else 1.15, args.noise)
            value = Decimal(str(round(center * max(factor, 0.0), 6)))
            records.append(MonitorRecord(task_name, constraint.metric, value))

    print(f"{len(records)} synthetic measurements over "
          f"{sum(1 for c in model.matrix.cells.values() if isinstance(c.resolution, Resolved))} cells "
          f"(noise {args.noise}, seed {args.seed})")
    for quantile in QUANTILES:
        report = fulfillment_report(model.matrix, records, quantile)
        ok = sum(1 for c in report.cells if c.fulfilled)
        print(f"quantile {quantile}: {ok}/{len(report.cells)} cells fulfilled")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

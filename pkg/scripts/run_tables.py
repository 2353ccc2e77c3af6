"""Rejection-rate tables for Scenarios 1-5.

    python scripts/run_tables.py --scenarios 1 2 3 --out results/
    python scripts/run_tables.py --full-scale --workers 8

Each scenario is written to ``scenario<k>.csv`` and the aligned tables to
``tables.txt``.  Finished cells are reused when a run is restarted.
"""

import argparse
import logging
from pathlib import Path

from ctsboot.experiments import DEFAULT_LENGTHS, GridConfig, RejectionTable, run_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenarios", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--lengths", type=int, nargs="+", default=list(DEFAULT_LENGTHS))
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--B", type=int, default=250)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = []
    for s in args.scenarios:
        grid = GridConfig(
            scenarios=(s,), lengths=tuple(args.lengths), N=args.N, B=args.B,
            seed=args.seed, full_scale=args.full_scale, workers=args.workers,
        )
        path = out / f"scenario{s}.csv"
        existing = RejectionTable.from_csv(path.read_text()) if path.exists() else None
        done = RejectionTable(list(existing.rows) if existing else [])

        def save(row, done=done, path=path):
            done.rows.append(row)
            path.write_text(done.to_csv())

        table = run_grid(grid, existing, save)
        path.write_text(table.to_csv())
        text.append(table.format())
    (out / "tables.txt").write_text("\n".join(text))
    print("\n".join(text))


if __name__ == "__main__":
    main()

"""Rejection rate as a function of the MBB block size and the SB continuation probability.

    python scripts/run_tuning.py --scenario 1 --T 200 --out results/tuning1.csv

Sweeps b in {4, 6, ..., 20} and p in {1/4, 1/6, ..., 1/20}.  Every sweep
point reuses the simulated pairs of its base cell, so the curves differ only
through the tuning parameter.
"""

import argparse
import logging
from pathlib import Path

from ctsboot.experiments import DEFAULT_DELTAS, GridConfig, run_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", type=int, default=1)
    ap.add_argument("--T", type=int, default=200)
    ap.add_argument("--deltas", type=float, nargs="+")
    ap.add_argument("--metrics", nargs="+", default=["cc", "b", "mle"])
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--B", type=int, default=250)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/tuning.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    sizes = tuple(range(4, 21, 2))
    grid = GridConfig(
        scenarios=(args.scenario,),
        deltas=tuple(args.deltas or DEFAULT_DELTAS[args.scenario]),
        lengths=(args.T,),
        metrics=tuple(args.metrics),
        methods=("mbb", "sb"),
        block_sizes=sizes,
        cont_probs=tuple(1.0 / b for b in sizes),
        N=args.N,
        B=args.B,
        seed=args.seed,
        workers=args.workers,
    )
    table = run_grid(grid)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(table.tuning_csv())
    print(table.tuning_csv())


if __name__ == "__main__":
    main()

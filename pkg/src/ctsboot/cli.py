"""Command line: ``ctsboot {simulate,test,bench,cluster,encode}``.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as cio
from .bootstrap import run_test
from .cluster import classical_mds, pvalue_clustering, pvalue_matrix
from .experiments import GridConfig, InadmissibleDeltaError, RejectionTable, run_grid, scenario_spec
from .models import ModelSpecError, simulate
from .rng import RandomStream
from .series import Alphabet, InvalidSeriesError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _test_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML/JSON file with test settings; flags override it")
    p.add_argument("--metric", choices=["cc", "b", "mle"])
    p.add_argument("--method", choices=["ba", "mbb", "sb"])
    p.add_argument("--B", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lags", help="comma-separated lag set, e.g. 1,2")
    p.add_argument("--block-size", type=int)
    p.add_argument("--cont-prob", type=float)
    p.add_argument("--model", choices=["mc", "hmm", "ndarma"])
    p.add_argument("--order", type=int, help="hidden states (hmm) or autoregressive order (ndarma)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, dest="n_jobs")


def _test_config(args):
    d = {"metric": "cc", "method": "mbb", "B": 500, "alpha": 0.05, "seed": 0}
    if args.config:
        d.update(cio.load_config(args.config))
    for key in ("metric", "method", "B", "alpha", "lags", "block_size", "cont_prob", "model", "order", "seed", "n_jobs"):
        value = getattr(args, key, None)
        if value is not None:
            d[key] = value
    return cio.test_config_from_dict(d)


def cmd_simulate(args) -> int:
    stream = RandomStream(args.seed)
    meta = {"seed": str(args.seed)}
    if args.spec:
        spec = cio.model_spec_from_dict(cio.load_config(args.spec))
        specs = [spec] * args.count
        meta["spec"] = Path(args.spec).name
    elif args.scenario is not None:
        try:
            if args.scenario == 4:
                Rs = [int(stream.child("R", k).generator().integers(2, 6)) for k in range(args.count)]
                specs = [scenario_spec(4, args.delta, R) for R in Rs]
                meta["alphabet_sizes"] = ",".join(map(str, Rs))
            else:
                specs = [scenario_spec(args.scenario, args.delta)] * args.count
        except ModelSpecError as exc:
            raise InadmissibleDeltaError(f"delta={args.delta} is outside Scenario {args.scenario}'s range: {exc}")
        meta.update(scenario=str(args.scenario), delta=f"{args.delta:g}")
    else:
        raise cio.InputError("give either --scenario or --spec")
    r = max(s.r for s in specs)
    alphabet = Alphabet.of_size(r)
    rows = [[alphabet.labels[v] for v in simulate(s, args.T, stream.child("series", k)).values] for k, s in enumerate(specs)]
    meta["T"] = str(args.T)
    _emit(cio.format_sequences(cio.SequenceFile(rows, alphabet, meta)), args.out)
    return EXIT_OK


def _single(path) -> cio.SequenceFile:
    sf = cio.read_sequences(path)
    if len(sf.rows) != 1:
        raise cio.InputError(f"{path}: expected exactly one series, found {len(sf.rows)}")
    return sf


def cmd_test(args) -> int:
    f1, f2 = _single(args.file1), _single(args.file2)
    if f1.alphabet is not None and f2.alphabet is not None and f1.alphabet != f2.alphabet:
        raise cio.InputError("the two files declare different alphabets")
    alphabet = f1.alphabet or f2.alphabet or cio.infer_alphabet(f1.rows + f2.rows)
    (x1,), (x2,) = f1.to_series(alphabet), f2.to_series(alphabet)
    cfg = _test_config(args)
    res = run_test(x1, x2, cfg)
    b, p = cfg.tuning(min(x1.T, x2.T))
    lines = [
        f"metric: {cfg.metric}",
        f"method: {cfg.method}",
        f"lags: {','.join(map(str, cfg.lags))}",
        f"B: {cfg.B}",
        f"alpha: {cfg.alpha:g}",
        f"seed: {cfg.seed}",
    ]
    if cfg.method == "mbb":
        lines.append(f"block_size: {b}")
    if cfg.method == "sb":
        lines.append(f"cont_prob: {p:.6g}")
    lines += [
        f"observed: {res.observed:.10g}",
        f"critical: {res.critical:.10g}",
        f"pvalue: {res.pvalue:.10g}",
        f"reject: {str(res.reject).lower()}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    d = cio.load_config(args.config)
    for key in ("seed", "N", "B"):
        if getattr(args, key) is not None:
            d[key] = getattr(args, key)
    if args.full_scale:
        d["full_scale"] = True
    if args.workers is not None:
        d["workers"] = args.workers
    try:
        grid = GridConfig.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise cio.InputError(f"invalid grid config: {exc}") from None

    existing = None
    out = Path(args.out) if args.out else None
    tuning_out = out.with_name(out.stem + ".tuning.csv") if out else None
    if args.resume and out and out.exists():
        existing = RejectionTable.from_csv(
            out.read_text(encoding="utf-8"),
            tuning_out.read_text(encoding="utf-8") if tuning_out.exists() else None,
        )
    partial = RejectionTable(list(existing.rows) if existing else [])

    def checkpoint(row):
        if out is None:
            return
        partial.rows.append(row)
        out.write_text(partial.to_csv(), encoding="utf-8", newline="\n")
        if any(r.cell.tuned for r in partial.rows):
            tuning_out.write_text(partial.tuning_csv(), encoding="utf-8", newline="\n")

    table = run_grid(grid, existing, checkpoint)
    if out is None:
        sys.stdout.write(table.to_csv())
        if any(r.cell.tuned for r in table.rows):
            sys.stdout.write("\n" + table.tuning_csv())
    else:
        out.write_text(table.to_csv(), encoding="utf-8", newline="\n")
        if any(r.cell.tuned for r in table.rows):
            tuning_out.write_text(table.tuning_csv(), encoding="utf-8", newline="\n")
        sys.stdout.write(table.format())
    return EXIT_OK


def _matrix_csv(names, M, seed) -> str:
    lines = [f"# seed: {seed}", "series," + ",".join(names)]
    for name, row in zip(names, M):
        lines.append(name + "," + ",".join(f"{v:.10g}" for v in row))
    return "\n".join(lines) + "\n"


def cmd_cluster(args) -> int:
    sf = cio.read_sequences(args.corpus)
    if not sf.rows:
        raise cio.InputError(f"{args.corpus}: no series")
    if sf.alphabet is None and len({t for row in sf.rows for t in row}) < 2:
        raise cio.InputError(f"{args.corpus}: cannot infer an alphabet; add an #alphabet header")
    corpus = sf.to_series()
    names = sf.meta.get("records", "").split()
    if len(names) != len(corpus):
        names = [f"s{k + 1}" for k in range(len(corpus))]
    cfg = _test_config(args)
    pm = pvalue_matrix(corpus, cfg)
    part = pvalue_clustering(pm, cfg.alpha)
    if len(corpus) > 1:
        with warnings.catch_warnings():
            # a rank-deficient layout (e.g. duplicated series) is padded with zeros
            warnings.simplefilter("ignore", RuntimeWarning)
            coords, _ = classical_mds(pm.distances, 2)
    else:
        coords = np.zeros((1, 2))

    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "pvalues.csv").write_text(_matrix_csv(names, pm.pvalues, cfg.seed), encoding="utf-8", newline="\n")
    (outdir / "distances.csv").write_text(_matrix_csv(names, pm.distances, cfg.seed), encoding="utf-8", newline="\n")
    lines = [f"# seed: {cfg.seed}", f"# alpha: {cfg.alpha:g}", "series,cluster"]
    lines += [f"{n},{k + 1}" for n, k in zip(names, part.labels)]
    (outdir / "partition.csv").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    lines = [f"# seed: {cfg.seed}", "series,x,y"] + [f"{n},{x:.10g},{y:.10g}" for n, (x, y) in zip(names, coords)]
    (outdir / "coords.csv").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    sizes = np.bincount(part.labels)
    sys.stdout.write(f"{len(corpus)} series, {part.n_clusters} clusters (sizes {','.join(map(str, sizes))})\n")
    return EXIT_OK


def cmd_encode(args) -> int:
    try:
        text = Path(args.fasta).read_text(encoding="utf-8")
    except OSError as exc:
        raise cio.InputError(f"cannot read {args.fasta}: {exc}") from None
    mapping = cio.load_mapping(args.mapping) if args.mapping else None
    _emit(cio.format_sequences(cio.encode_protein(text, mapping)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctsboot", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate series from a scenario or a model spec file")
    p.add_argument("--scenario", type=int, choices=[1, 2, 3, 4, 5])
    p.add_argument("--spec", help="YAML/JSON model spec (family: mc|hmm|ndarma)")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="test whether two series share a generating process")
    p.add_argument("file1")
    p.add_argument("file2")
    _test_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("bench", help="Monte Carlo rejection rates over a scenario grid")
    p.add_argument("--config", required=True, help="grid config (YAML/JSON)")
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--full-scale", action="store_true", help="N=1000, B=500")
    p.add_argument("--workers", type=int)
    p.add_argument("--resume", action="store_true", help="reuse cells already in --out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cluster", help="p-value clustering and 2-D scaling of a corpus")
    p.add_argument("corpus")
    _test_args(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("encode", help="encode FASTA proteins into three hydrophobicity classes")
    p.add_argument("fasta")
    p.add_argument("--mapping", help="YAML/JSON residue-to-class mapping")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (cio.InputError, InvalidSeriesError, InadmissibleDeltaError, ModelSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

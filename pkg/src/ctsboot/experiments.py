"""Monte Carlo rejection-rate experiments on the five simulation scenarios.

Scenarios 1-3 compare Markov chains, hidden Markov models and DAR(1)
processes over three categories; Scenario 4 is a Markov chain with a random
number of categories R in {2, ..., 5}; Scenario 5 is an NDARMA(2, 0) process
whose dependence needs two lags.  In every scenario the first process is at
``delta = 0`` and the second at ``delta``.

Scenario matrices with identical rows give serially independent chains
whose marginal law is that row.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .bootstrap import TestConfig, default_tuning, run_test
from .models import HiddenMarkov, MarkovChain, ModelFamily, ModelSpec, ModelSpecError, Ndarma, simulate
from .rng import RandomStream

log = logging.getLogger(__name__)

SCENARIOS = (1, 2, 3, 4, 5)

# default delta grid per scenario
DEFAULT_DELTAS = {
    1: (0.0, 0.05, 0.075, 0.10),
    2: (0.0, 0.025, 0.05, 0.075),
    3: (0.0, 0.10, 0.15, 0.20),
    4: (0.0, 0.05, 0.10, 0.15),
    5: (0.0, 0.025, 0.05, 0.075),
}
DEFAULT_LENGTHS = (100, 200, 500)


class InadmissibleDeltaError(ValueError):
    pass


def _constant_rows(row: Sequence[float]) -> np.ndarray:
    row = np.asarray(row, dtype=float)
    return np.tile(row, (row.size, 1))


def scenario_spec(scenario: int, delta: float, R: int = 3) -> ModelSpec:
    """The generating model of ``scenario`` at a single ``delta``."""
    d = delta
    if scenario == 1:
        return MarkovChain(_constant_rows([0.1 + d, 0.3 + d, 0.6 - 2 * d]))
    if scenario == 2:
        M = _constant_rows([0.3 + d, 0.3 + d, 0.4 - 2 * d])
        return HiddenMarkov(M, M)
    if scenario == 3:
        return Ndarma([0.2, 0.3 - d, 0.5 + d], [0.6 - d, 0.4 + d], p=1)
    if scenario == 4:
        row = np.full(R, 1.0 / R)
        row[0] -= d
        row[-1] += d
        return MarkovChain(_constant_rows(row))
    if scenario == 5:
        return Ndarma([0.3, 0.3 - d, 0.4 + d], [0.4 - d, 0.4 - d, 0.2 + 2 * d], p=2)
    raise ValueError(f"unknown scenario {scenario}")


def check_delta(scenario: int, delta: float) -> None:
    try:
        if scenario == 4:
            for R in (2, 3, 4, 5):
                scenario_spec(4, delta, R)
        else:
            scenario_spec(scenario, delta)
    except ModelSpecError as exc:
        raise InadmissibleDeltaError(f"delta={delta} is outside Scenario {scenario}'s range: {exc}") from None


def build_scenario(scenario: int, delta: float, stream: RandomStream | None = None) -> tuple[ModelSpec, ModelSpec]:
    """``(spec at delta 0, spec at delta)``; Scenario 4 draws its R from ``stream``."""
    check_delta(scenario, delta)
    R = 3
    if scenario == 4:
        if stream is None:
            raise ValueError("Scenario 4 needs a stream to draw the number of categories")
        R = int(stream.generator().integers(2, 6))
    return scenario_spec(scenario, 0.0, R), scenario_spec(scenario, delta, R)


def scenario_family(scenario: int) -> ModelFamily:
    return {
        1: ModelFamily("mc"),
        2: ModelFamily("hmm", 3),
        3: ModelFamily("ndarma", 1),
        4: ModelFamily("mc"),
        5: ModelFamily("ndarma", 2),
    }[scenario]


def scenario_lags(scenario: int) -> tuple[int, ...]:
    return (1, 2) if scenario == 5 else (1,)


def scenario_config(scenario: int, metric: str, method: str, **kwargs) -> TestConfig:
    """Test configuration with the scenario's true model class and lag set."""
    kwargs.setdefault("lags", scenario_lags(scenario))
    kwargs.setdefault("family", scenario_family(scenario))
    return TestConfig(metric=metric, method=method, **kwargs)


def _replication(args) -> bool:
    scenario, delta, T, cfg, stream = args
    spec1, spec2 = build_scenario(scenario, delta, stream.child("spec"))
    x1 = simulate(spec1, T, stream.child("x", 1))
    x2 = simulate(spec2, T, stream.child("x", 2))
    return run_test(x1, x2, cfg, stream.child("test")).reject


def rejection_rate(
    scenario: int,
    delta: float,
    T: int,
    cfg: TestConfig,
    N: int,
    stream: RandomStream,
    workers: int = 1,
) -> float:
    """Fraction of ``N`` independent simulated pairs for which ``cfg`` rejects H0."""
    check_delta(scenario, delta)
    jobs = [(scenario, delta, T, cfg, stream.child(i)) for i in range(N)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rejects = list(pool.map(_replication, jobs, chunksize=max(1, N // (4 * workers))))
    else:
        rejects = [_replication(j) for j in jobs]
    return float(np.mean(rejects))


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Cell:
    scenario: int
    delta: float
    T: int
    metric: str
    method: str
    block_size: int | None = None
    cont_prob: float | None = None

    @property
    def key(self) -> tuple:
        return (self.scenario, round(self.delta, 9), self.T, self.metric, self.method,
                self.block_size, None if self.cont_prob is None else round(self.cont_prob, 9))

    @property
    def tuned(self) -> bool:
        return self.block_size is not None or self.cont_prob is not None


@dataclass
class GridConfig:
    scenarios: tuple[int, ...] = (1,)
    deltas: dict[int, tuple[float, ...]] | tuple[float, ...] | None = None  # None -> DEFAULT_DELTAS
    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    metrics: tuple[str, ...] = ("cc", "b", "mle")
    methods: tuple[str, ...] = ("ba", "mbb", "sb")
    N: int = 200
    B: int = 250
    alpha: float = 0.05
    seed: int = 0
    block_sizes: tuple[int, ...] = ()  # MBB sweep
    cont_probs: tuple[float, ...] = ()  # SB sweep
    full_scale: bool = False  # N=1000, B=500
    workers: int = 1

    def __post_init__(self):
        if self.full_scale:
            self.N, self.B = 1000, 500

    def deltas_for(self, scenario: int) -> tuple[float, ...]:
        if self.deltas is None:
            return DEFAULT_DELTAS[scenario]
        if isinstance(self.deltas, dict):
            return tuple(self.deltas.get(scenario, self.deltas.get(str(scenario), ())))
        return tuple(self.deltas)

    def cells(self) -> list[Cell]:
        out = []
        for s in self.scenarios:
            for d, T, metric, method in itertools.product(self.deltas_for(s), self.lengths, self.metrics, self.methods):
                out.append(Cell(s, float(d), int(T), metric, method))
                if method == "mbb":
                    out += [Cell(s, float(d), int(T), metric, method, block_size=int(b)) for b in self.block_sizes]
                if method == "sb":
                    out += [Cell(s, float(d), int(T), metric, method, cont_prob=float(p)) for p in self.cont_probs]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> GridConfig:
        d = dict(d)
        for k in ("scenarios", "lengths", "metrics", "methods", "block_sizes", "cont_probs"):
            if k in d and not isinstance(d[k], (list, tuple)):
                d[k] = [d[k]]
            if k in d:
                d[k] = tuple(d[k])
        if isinstance(d.get("deltas"), dict):
            d["deltas"] = {int(k): tuple(v) for k, v in d["deltas"].items()}
        elif d.get("deltas") is not None:
            d["deltas"] = tuple(d["deltas"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        return cls(**d)


def cell_stream(seed: int, cell: Cell) -> RandomStream:
    """Seed of a cell; tuning-parameter sweeps reuse their base cell's pairs (common random numbers)."""
    return RandomStream(seed).child(cell.scenario, cell.delta, cell.T, cell.metric, cell.method)


@dataclass(frozen=True)
class Row:
    scenario: int
    delta: float
    T: int
    metric: str
    method: str
    rate: float
    N: int
    B: int
    alpha: float
    seed: int
    block_size: int | None = None
    cont_prob: float | None = None

    @property
    def cell(self) -> Cell:
        return Cell(self.scenario, self.delta, self.T, self.metric, self.method, self.block_size, self.cont_prob)


CSV_COLUMNS = ("scenario", "delta", "T", "metric", "method", "rate", "N", "B", "alpha", "seed")
TUNING_COLUMNS = CSV_COLUMNS[:5] + ("param", "value") + CSV_COLUMNS[5:]


@dataclass
class RejectionTable:
    rows: list[Row] = field(default_factory=list)

    def get(self, cell: Cell) -> Row | None:
        for row in self.rows:
            if row.cell.key == cell.key:
                return row
        return None

    def rate(self, scenario, delta, T, metric, method, **tuning) -> float:
        row = self.get(Cell(scenario, delta, T, metric, method, **tuning))
        if row is None:
            raise KeyError((scenario, delta, T, metric, method, tuning))
        return row.rate

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            if not r.cell.tuned:
                w.writerow([r.scenario, f"{r.delta:g}", r.T, r.metric, r.method, f"{r.rate:.3f}", r.N, r.B, f"{r.alpha:g}", r.seed])
        return buf.getvalue()

    def tuning_csv(self) -> str:
        """Rate against block size (MBB) or continuation probability (SB), one row per sweep point."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TUNING_COLUMNS)
        for r in self.rows:
            if r.cell.tuned:
                param, value = ("b", r.block_size) if r.block_size is not None else ("p", f"{r.cont_prob:.6g}")
                w.writerow([r.scenario, f"{r.delta:g}", r.T, r.metric, r.method, param, value,
                            f"{r.rate:.3f}", r.N, r.B, f"{r.alpha:g}", r.seed])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, tuning_text: str | None = None) -> RejectionTable:
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(_row_from_record(rec))
        if tuning_text:
            for rec in csv.DictReader(io.StringIO(tuning_text)):
                b = int(rec["value"]) if rec["param"] == "b" else None
                p = float(rec["value"]) if rec["param"] == "p" else None
                rows.append(_row_from_record(rec, b, p))
        return cls(rows)

    def format(self) -> str:
        """Aligned text tables: one block per scenario, delta blocks as rows, T x method columns."""
        out = []
        plain = [r for r in self.rows if not r.cell.tuned]
        for s in sorted({r.scenario for r in plain}):
            rows = [r for r in plain if r.scenario == s]
            Ts = sorted({r.T for r in rows})
            methods = [m for m in ("ba", "mbb", "sb") if any(r.method == m for r in rows)]
            cols = [(T, m) for T in Ts for m in methods]
            out.append(f"Scenario {s}")
            out.append(" " * 12 + "".join(f"{'T=' + str(T):>{8 * len(methods)}}" for T in Ts))
            out.append(" " * 12 + "".join(f"{m.upper():>8}" for _, m in cols))
            for d in sorted({r.delta for r in rows}):
                out.append(f"delta={d:.3f}")
                for metric in [m for m in ("cc", "b", "mle") if any(r.metric == m for r in rows)]:
                    cells = []
                    for T, m in cols:
                        row = next((r for r in rows if r.delta == d and r.T == T and r.metric == metric and r.method == m), None)
                        cells.append(f"{row.rate:8.3f}" if row else f"{'-':>8}")
                    out.append(f"  d_{metric.upper():<8}" + "".join(cells))
            out.append("")
        return "\n".join(out)


def _row_from_record(rec: dict, b=None, p=None) -> Row:
    return Row(int(rec["scenario"]), float(rec["delta"]), int(rec["T"]), rec["metric"], rec["method"],
               float(rec["rate"]), int(rec["N"]), int(rec["B"]), float(rec["alpha"]), int(rec["seed"]), b, p)


def run_cell(grid: GridConfig, cell: Cell) -> Row:
    cfg = scenario_config(
        cell.scenario, cell.metric, cell.method, B=grid.B, alpha=grid.alpha,
        block_size=cell.block_size, cont_prob=cell.cont_prob,
    )
    rate = rejection_rate(cell.scenario, cell.delta, cell.T, cfg, grid.N, cell_stream(grid.seed, cell), grid.workers)
    return Row(cell.scenario, cell.delta, cell.T, cell.metric, cell.method, rate, grid.N, grid.B,
               grid.alpha, grid.seed, cell.block_size, cell.cont_prob)


def run_grid(
    grid: GridConfig,
    existing: RejectionTable | None = None,
    on_row: Callable[[Row], None] | None = None,
) -> RejectionTable:
    """Evaluate every cell; cells already present in ``existing`` (same N, B, alpha, seed) are reused."""
    table = RejectionTable()
    for cell in grid.cells():
        prev = existing.get(cell) if existing is not None else None
        if prev is not None and (prev.N, prev.B, prev.alpha, prev.seed) == (grid.N, grid.B, grid.alpha, grid.seed):
            table.rows.append(prev)
            continue
        log.info("running cell %s", cell)
        row = run_cell(grid, cell)
        table.rows.append(row)
        if on_row is not None:
            on_row(row)
    return table

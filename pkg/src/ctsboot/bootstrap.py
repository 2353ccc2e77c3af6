"""Bootstrap tests of equality of two categorical generating processes.

Three resampling schemes approximate the null distribution of a distance:

* ``ba``  -- fit a parametric model to each series, average the coefficient
  vectors, and simulate pairs of independent series from the averaged model;
* ``mbb`` -- draw fixed-length overlapping blocks from the pooled block set
  of both series;
* ``sb``  -- stationary bootstrap over the pooled series, where running off
  the end of one series continues at the start of the other.

H0 is rejected when the observed distance exceeds the empirical
``1 - alpha`` quantile of the bootstrap distances.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distances import DistanceKind, embed_batch
from .models import ModelFamily, average_theta, simulate, simulate_batch, spec_from_theta
from .rng import RandomStream, as_stream
from .series import CategoricalSeries

METHODS = ("ba", "mbb", "sb")

# replicates are generated in fixed-size chunks, each with its own stream,
# so results do not depend on how many threads evaluate them
CHUNK_SIZE = 50


class ConfigError(ValueError):
    pass


def default_tuning(T: int) -> tuple[int, float]:
    """Block size ``ceil(T^(1/3))`` and continuation probability ``T^(-1/3)``."""
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    cube = T ** (1.0 / 3.0)
    b = math.ceil(round(cube, 9))
    return b, 1.0 / cube


@dataclass(frozen=True)
class TestConfig:
    metric: str = "cc"
    method: str = "mbb"
    B: int = 500
    alpha: float = 0.05
    lags: tuple[int, ...] = (1,)
    family: ModelFamily = field(default_factory=ModelFamily)
    block_size: int | None = None  # None -> ceil(T^(1/3))
    cont_prob: float | None = None  # None -> T^(-1/3)
    seed: int = 0
    n_jobs: int = 1

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "method", self.method.lower())
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.B < 1:
            raise ConfigError(f"B must be at least 1, got {self.B}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.block_size is not None and self.block_size < 1:
            raise ConfigError(f"block size must be positive, got {self.block_size}")
        if self.cont_prob is not None and not 0 <= self.cont_prob <= 1:
            raise ConfigError(f"continuation probability must lie in [0, 1], got {self.cont_prob}")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be positive")
        # raises on a bad metric or lag set
        self.kind

    @property
    def kind(self) -> DistanceKind:
        return DistanceKind(self.metric, self.lags, self.family)

    def tuning(self, T: int) -> tuple[int, float]:
        b, p = default_tuning(T)
        return (self.block_size or b, p if self.cont_prob is None else self.cont_prob)


@dataclass(frozen=True, eq=False)
class TestResult:
    observed: float
    replicates: np.ndarray
    critical: float
    pvalue: float
    reject: bool

    __test__ = False

    @property
    def B(self) -> int:
        return self.replicates.shape[0]


def critical_value(replicates: np.ndarray, alpha: float) -> float:
    """Order statistic of rank ``ceil((1 - alpha) B)``."""
    d = np.sort(np.asarray(replicates, dtype=float))
    rank = math.ceil(round((1 - alpha) * d.size, 9))
    return float(d[max(rank, 1) - 1])


def pvalue_from_replicates(observed: float, replicates) -> float:
    d = np.asarray(replicates, dtype=float)
    if d.size == 0:
        raise ValueError("need at least one bootstrap replicate")
    return float((1 + np.count_nonzero(d >= observed)) / (d.size + 1))


# ---------------------------------------------------------------------------
# index generation shared by the single-pair and batched paths

def _block_starts(T1: int, T2: int, b: int) -> np.ndarray:
    """Start offsets, in the concatenation ``x1 || x2``, of every length-``b`` block."""
    if b > min(T1, T2):
        raise ConfigError(f"block size {b} exceeds series length {min(T1, T2)}")
    return np.concatenate([np.arange(T1 - b + 1), T1 + np.arange(T2 - b + 1)])


def mbb_block_pool(x1: CategoricalSeries, x2: CategoricalSeries, b: int) -> np.ndarray:
    """All overlapping blocks of both series as a ``(q1 + q2, b)`` array."""
    pooled = np.concatenate([x1.values, x2.values])
    starts = _block_starts(x1.T, x2.T, b)
    return pooled[starts[:, None] + np.arange(b)]


def _mbb_indices(starts: np.ndarray, b: int, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    k = -(-T // b)
    chosen = starts[rng.integers(starts.size, size=(n, k))]
    return (chosen[..., None] + np.arange(b)).reshape(n, k * b)[:, :T]


def _sb_indices(L: int, p: float, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    restart = rng.random((n, T)) < p
    restart[:, 0] = True
    jump = rng.integers(L, size=(n, T))
    t = np.arange(T)
    last = np.maximum.accumulate(np.where(restart, t, 0), axis=1)
    rows = np.arange(n)[:, None]
    return (jump[rows, last] + (t - last)) % L


def mbb_resample_pair(x1: CategoricalSeries, x2: CategoricalSeries, b: int, stream=None):
    """One moving-blocks pseudo-pair with the original lengths."""
    rng = as_stream(stream).generator()
    pooled = np.concatenate([x1.values, x2.values])
    starts = _block_starts(x1.T, x2.T, b)
    y1 = pooled[_mbb_indices(starts, b, x1.T, 1, rng)[0]]
    y2 = pooled[_mbb_indices(starts, b, x2.T, 1, rng)[0]]
    return CategoricalSeries(y1, x1.alphabet), CategoricalSeries(y2, x2.alphabet)


def sb_resample_pair(x1: CategoricalSeries, x2: CategoricalSeries, p: float, stream=None):
    """One stationary-bootstrap pseudo-pair with the original lengths."""
    if not 0 <= p <= 1:
        raise ConfigError(f"continuation probability must lie in [0, 1], got {p}")
    rng = as_stream(stream).generator()
    pooled = np.concatenate([x1.values, x2.values])
    y1 = pooled[_sb_indices(pooled.size, p, x1.T, 1, rng)[0]]
    y2 = pooled[_sb_indices(pooled.size, p, x2.T, 1, rng)[0]]
    return CategoricalSeries(y1, x1.alphabet), CategoricalSeries(y2, x2.alphabet)


def ba_resample_pair(theta_avg, T: int, stream=None, T2: int | None = None):
    """Two independent simulations from the averaged model, on distinct sub-streams."""
    stream = as_stream(stream)
    spec = spec_from_theta(theta_avg)
    return simulate(spec, T, stream.child(0)), simulate(spec, T if T2 is None else T2, stream.child(1))


# ---------------------------------------------------------------------------
# the test

def _fit_pair(x1, x2, family: ModelFamily, stream: RandomStream):
    t1 = family.fit(x1, stream)
    t2 = family.fit(x2, stream)
    return average_theta(t1, t2)


def run_test(
    x1: CategoricalSeries,
    x2: CategoricalSeries,
    cfg: TestConfig,
    stream: RandomStream | int | None = None,
) -> TestResult:
    """Bootstrap test of H0: both series come from the same process."""
    if x1.alphabet != x2.alphabet:
        raise ConfigError("series must share an alphabet")
    stream = RandomStream(cfg.seed) if stream is None else as_stream(stream)
    kind, r = cfg.kind, x1.r
    T1, T2 = x1.T, x2.T

    obs1 = embed_batch(x1.values[None], r, kind, stream.child("obs").generator())
    obs2 = embed_batch(x2.values[None], r, kind, stream.child("obs").generator())
    observed = float(np.sum((obs1 - obs2) ** 2))

    b, p = cfg.tuning(min(T1, T2))
    pooled = np.concatenate([x1.values, x2.values])
    if cfg.method == "mbb":
        starts = _block_starts(T1, T2, b)
    elif cfg.method == "ba":
        spec = spec_from_theta(_fit_pair(x1, x2, cfg.family, stream.child("fit")))

    def chunk(c: int) -> np.ndarray:
        n = min(CHUNK_SIZE, cfg.B - c * CHUNK_SIZE)
        rng = stream.child("rep", c).generator()
        if cfg.method == "mbb":
            Y1 = pooled[_mbb_indices(starts, b, T1, n, rng)]
            Y2 = pooled[_mbb_indices(starts, b, T2, n, rng)]
        elif cfg.method == "sb":
            Y1 = pooled[_sb_indices(pooled.size, p, T1, n, rng)]
            Y2 = pooled[_sb_indices(pooled.size, p, T2, n, rng)]
        else:
            Y1 = simulate_batch(spec, T1, n, rng)
            Y2 = simulate_batch(spec, T2, n, rng)
        e1 = embed_batch(Y1, r, kind, rng)
        e2 = embed_batch(Y2, r, kind, rng)
        return np.sum((e1 - e2) ** 2, axis=1)

    n_chunks = -(-cfg.B // CHUNK_SIZE)
    if cfg.n_jobs > 1 and n_chunks > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            parts = list(pool.map(chunk, range(n_chunks)))
    else:
        parts = [chunk(c) for c in range(n_chunks)]
    replicates = np.concatenate(parts)
    replicates.setflags(write=False)

    critical = critical_value(replicates, cfg.alpha)
    return TestResult(
        observed=observed,
        replicates=replicates,
        critical=critical,
        pvalue=pvalue_from_replicates(observed, replicates),
        reject=bool(observed > critical),
    )

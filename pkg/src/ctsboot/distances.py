"""Dissimilarities between two categorical series.

All three are squared Euclidean distances between per-series vectors:
dependence features plus marginals for ``cc`` and ``b``, fitted model
coefficients for ``mle``.  :func:`embed_batch` produces those vectors for
many series at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import DependenceFeatures, b_signature, cc_signature, normalize_lags
from .models import ModelFamily, ThetaVector
from .rng import RandomStream, as_stream
from .series import CategoricalSeries

METRICS = ("cc", "b", "mle")


class ShapeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceKind:
    metric: str = "cc"
    lags: tuple[int, ...] = (1,)
    family: ModelFamily = field(default_factory=ModelFamily)

    def __post_init__(self):
        metric = self.metric.lower()
        if metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "lags", normalize_lags(self.lags))


def _sq(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum((np.asarray(a) - np.asarray(b)) ** 2))


def _check_features(f1: DependenceFeatures, f2: DependenceFeatures) -> None:
    if f1.lags != f2.lags or f1.r != f2.r:
        raise ShapeMismatchError(f"features differ in lags/r: {f1.lags}/{f1.r} vs {f2.lags}/{f2.r}")


def dist_cc(f1: DependenceFeatures, f2: DependenceFeatures) -> float:
    _check_features(f1, f2)
    total = 0.0
    for k in range(len(f1.lags)):
        total += _sq(f1.v_matrices[k], f2.v_matrices[k])
        total += _sq(f1.kappa_vectors[k], f2.kappa_vectors[k])
    return total + _sq(f1.marginal.pi, f2.marginal.pi)


def dist_b(f1: DependenceFeatures, f2: DependenceFeatures) -> float:
    _check_features(f1, f2)
    total = sum(_sq(a, b) for a, b in zip(f1.phi_matrices, f2.phi_matrices))
    return total + _sq(f1.marginal.pi, f2.marginal.pi)


def dist_mle(t1: ThetaVector, t2: ThetaVector) -> float:
    if not t1.compatible(t2):
        raise ShapeMismatchError(
            f"theta vectors differ: {t1.family}/{t1.dimension} vs {t2.family}/{t2.dimension}"
        )
    return _sq(t1.values, t2.values)


def embed_batch(X: np.ndarray, r: int, kind: DistanceKind, rng: np.random.Generator | None = None) -> np.ndarray:
    """Vectors whose pairwise squared Euclidean distances are the chosen dissimilarity."""
    if kind.metric == "cc":
        return cc_signature(X, r, kind.lags)
    if kind.metric == "b":
        return b_signature(X, r, kind.lags)
    return kind.family.fit_batch(X, r, rng)


def distance(
    x1: CategoricalSeries,
    x2: CategoricalSeries,
    kind: DistanceKind,
    stream: RandomStream | int | None = None,
) -> float:
    """Dissimilarity between two series (which may differ in length)."""
    if x1.alphabet != x2.alphabet:
        raise ShapeMismatchError("series must share an alphabet")
    # both fits start from the same random initialisation, so d(x, x) = 0
    stream = as_stream(stream)
    e1 = embed_batch(x1.values[None], x1.r, kind, stream.generator())
    e2 = embed_batch(x2.values[None], x2.r, kind, stream.generator())
    return _sq(e1, e2)

"""Clustering a corpus of series from pairwise test p-values, plus classical scaling.

Series are grouped by agglomerative merging on the p-value matrix: the
similarity of two clusters is the smallest p-value between their members,
and merging stops once no pair of clusters exceeds the threshold ``alpha``.
Every pair of series sharing a cluster therefore has a p-value above ``alpha``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bootstrap import TestConfig, run_test
from .rng import RandomStream
from .series import CategoricalSeries


@dataclass(frozen=True, eq=False)
class PValueMatrix:
    pvalues: np.ndarray  # (n, n), symmetric, unit diagonal
    distances: np.ndarray  # observed dissimilarities, zero diagonal
    seed: int

    @property
    def n(self) -> int:
        return self.pvalues.shape[0]


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray  # cluster index per series, numbered by first appearance

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def clusters(self) -> list[list[int]]:
        return [np.flatnonzero(self.labels == k).tolist() for k in range(self.n_clusters)]


def pvalue_matrix(corpus: Sequence[CategoricalSeries], cfg: TestConfig, workers: int = 1) -> PValueMatrix:
    """Run the test once per unordered pair ``i < j`` on stream ``(cfg.seed, i, j)`` and mirror."""
    n = len(corpus)
    if n and any(x.alphabet != corpus[0].alphabet for x in corpus):
        raise ValueError("all series in a corpus must share an alphabet")
    P = np.eye(n)
    D = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    root = RandomStream(cfg.seed)

    def one(pair):
        i, j = pair
        return run_test(corpus[i], corpus[j], cfg, root.child(i, j))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]
    for (i, j), res in zip(pairs, results):
        P[i, j] = P[j, i] = res.pvalue
        D[i, j] = D[j, i] = res.observed
    return PValueMatrix(P, D, cfg.seed)


def pvalue_clustering(m: PValueMatrix | np.ndarray, alpha: float = 0.05) -> Partition:
    P = np.asarray(m.pvalues if isinstance(m, PValueMatrix) else m, dtype=float)
    n = P.shape[0]
    clusters = [[i] for i in range(n)]
    while len(clusters) > 1:
        best, pair = -np.inf, None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                sim = P[np.ix_(clusters[a], clusters[b])].min()
                if sim > best:
                    best, pair = sim, (a, b)
        if best <= alpha:
            break
        a, b = pair
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
    labels = np.empty(n, dtype=np.int64)
    for k, members in enumerate(sorted(clusters, key=min)):
        labels[members] = k
    return Partition(labels)


def classical_mds(d: np.ndarray, dim: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Classical (Torgerson) scaling of a dissimilarity matrix.

    Returns ``(coords, eigenvalues)`` with eigenvalues sorted descending.
    Negative eigenvalues are truncated to zero; when fewer than ``dim`` are
    positive the remaining coordinate columns are zero and a warning is issued.
    Each axis is signed so its largest-magnitude coordinate is positive.
    """
    D = np.asarray(d, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n) or not np.allclose(D, D.T):
        raise ValueError("dissimilarity matrix must be square and symmetric")
    if n and np.any(np.abs(np.diag(D)) > 0):
        raise ValueError("dissimilarity matrix must have a zero diagonal")
    J = np.eye(n) - 1.0 / n
    G = -0.5 * J @ (D**2) @ J
    evals, evecs = np.linalg.eigh((G + G.T) / 2)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = 1e-10 * max(1.0, np.abs(evals).max(initial=0.0))
    coords = np.zeros((n, dim))
    k = min(dim, int(np.sum(evals > tol)))
    if k < dim:
        warnings.warn(f"only {k} positive eigenvalues; padding to {dim} dimensions with zeros", RuntimeWarning, stacklevel=2)
    for c in range(k):
        v = evecs[:, c] * np.sqrt(evals[c])
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        coords[:, c] = v
    return coords, np.where(evals > tol, evals, 0.0)

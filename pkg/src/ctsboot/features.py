"""Model-free serial dependence features of categorical series.

Everything is derived from two count tables: the marginal frequencies
``pi_i = N_i / T`` and the lagged joint frequencies
``p_ij(l) = N_ij(l) / (T - l)`` where ``N_ij(l)`` counts the times ``t`` with
``(x_t, x_{t-l}) = (i, j)``.

The private ``_*`` helpers work on arrays with arbitrary leading batch
dimensions so the bootstrap can evaluate hundreds of pseudo-series at once;
the public functions wrap them for single series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .series import CategoricalSeries


class InvalidLagError(ValueError):
    pass


class DegenerateMarginalError(ValueError):
    """Raised when all mass sits on one category, so kappa is undefined."""


@dataclass(frozen=True, eq=False)
class MarginalDistribution:
    pi: np.ndarray

    @property
    def r(self) -> int:
        return self.pi.shape[0]


@dataclass(frozen=True, eq=False)
class LaggedJointMatrix:
    lag: int
    p: np.ndarray

    def conditional(self, marginal: MarginalDistribution) -> np.ndarray:
        """Column-normalised ``p_{i|j}(l) = p_ij(l) / pi_j``; unobserved columns are zero."""
        pi = marginal.pi
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(pi[None, :] > 0, self.p / pi[None, :], 0.0)
        return out


def _check_lag(T: int, lag: int) -> None:
    if int(lag) != lag or lag < 1:
        raise InvalidLagError(f"lags must be positive integers, got {lag}")
    if lag >= T:
        raise InvalidLagError(f"lag {lag} needs a series longer than {T}")


# ---------------------------------------------------------------------------
# batched counting

def marginal_frequencies(X: np.ndarray, r: int) -> np.ndarray:
    """Row-wise category frequencies of an ``(n, T)`` code array, shape ``(n, r)``."""
    X = np.atleast_2d(X)
    n, T = X.shape
    offsets = (np.arange(n) * r)[:, None]
    counts = np.bincount((X + offsets).ravel(), minlength=n * r).reshape(n, r)
    return counts / T


def joint_frequencies(X: np.ndarray, r: int, lag: int) -> np.ndarray:
    """Row-wise lagged joint frequencies, shape ``(n, r, r)``; entry ``[i, j]`` is ``(x_t, x_{t-lag})``."""
    X = np.atleast_2d(X)
    n, T = X.shape
    _check_lag(T, lag)
    codes = X[:, lag:] * r + X[:, :-lag]
    offsets = (np.arange(n) * r * r)[:, None]
    counts = np.bincount((codes + offsets).ravel(), minlength=n * r * r)
    return counts.reshape(n, r, r) / (T - lag)


# ---------------------------------------------------------------------------
# feature formulas on (..., r) marginals and (..., r, r) joints

def _v(pi: np.ndarray, p: np.ndarray) -> np.ndarray:
    indep = pi[..., :, None] * pi[..., None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(indep > 0, (p - indep) ** 2 / indep, 0.0)
    return v


def _kappa_denominator(pi: np.ndarray) -> np.ndarray:
    return 1.0 - np.sum(pi**2, axis=-1)


def _kappa(pi: np.ndarray, p: np.ndarray) -> np.ndarray:
    # single-category rows (denominator 0) get a zero vector
    denom = _kappa_denominator(pi)
    num = np.diagonal(p, axis1=-2, axis2=-1) - pi**2
    safe = np.where(denom > 0, denom, 1.0)
    return np.where((denom > 0)[..., None], num / safe[..., None], 0.0)


def _phi(pi: np.ndarray, p: np.ndarray) -> np.ndarray:
    s = pi * (1.0 - pi)
    scale = s[..., :, None] * s[..., None, :]
    indep = pi[..., :, None] * pi[..., None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(scale > 0, (p - indep) / np.sqrt(scale), 0.0)
    return np.clip(phi, -1.0, 1.0)


def cc_signature(X: np.ndarray, r: int, lags: Sequence[int]) -> np.ndarray:
    """Per-row vector ``(vec V(l_1), K(l_1), ..., pi)``; squared Euclidean distances between rows are d_CC."""
    pi = marginal_frequencies(X, r)
    parts = []
    for lag in lags:
        p = joint_frequencies(X, r, lag)
        parts.append(_v(pi, p).reshape(pi.shape[0], -1))
        parts.append(_kappa(pi, p))
    parts.append(pi)
    return np.concatenate(parts, axis=1)


def b_signature(X: np.ndarray, r: int, lags: Sequence[int]) -> np.ndarray:
    """Per-row vector ``(vec Phi(l_1), ..., pi)``; squared Euclidean distances between rows are d_B."""
    pi = marginal_frequencies(X, r)
    parts = [_phi(pi, joint_frequencies(X, r, lag)).reshape(pi.shape[0], -1) for lag in lags]
    parts.append(pi)
    return np.concatenate(parts, axis=1)


# ---------------------------------------------------------------------------
# single-series API

def count_marginals(series: CategoricalSeries) -> MarginalDistribution:
    return MarginalDistribution(marginal_frequencies(series.values, series.r)[0])


def count_lagged_joint(series: CategoricalSeries, lag: int) -> LaggedJointMatrix:
    _check_lag(series.T, lag)
    return LaggedJointMatrix(int(lag), joint_frequencies(series.values, series.r, lag)[0])


def v_matrix(marginal: MarginalDistribution, joint: LaggedJointMatrix) -> np.ndarray:
    """``V_ij = (p_ij - pi_i pi_j)^2 / (pi_i pi_j)``, zero where ``pi_i pi_j = 0``."""
    return _v(marginal.pi, joint.p)


def cramers_v(marginal: MarginalDistribution, joint: LaggedJointMatrix) -> float:
    r = marginal.r
    total = float(np.sum(v_matrix(marginal, joint)))
    return float(np.clip(np.sqrt(total / (r - 1)), 0.0, 1.0))


def kappa_vector(marginal: MarginalDistribution, joint: LaggedJointMatrix) -> np.ndarray:
    """Per-category signed dependence ``(p_ii - pi_i^2) / (1 - sum_j pi_j^2)``."""
    if _kappa_denominator(marginal.pi) <= 0:
        raise DegenerateMarginalError("kappa is undefined when a single category has all the mass")
    return _kappa(marginal.pi, joint.p)


def cohens_kappa(marginal: MarginalDistribution, joint: LaggedJointMatrix) -> float:
    return float(np.sum(kappa_vector(marginal, joint)))


def phi_matrix(marginal: MarginalDistribution, joint: LaggedJointMatrix) -> np.ndarray:
    """Correlations of the category indicators at the joint's lag, clipped to [-1, 1]."""
    return _phi(marginal.pi, joint.p)


@dataclass(frozen=True, eq=False)
class DependenceFeatures:
    lags: tuple[int, ...]
    marginal: MarginalDistribution
    v_matrices: tuple[np.ndarray, ...]
    kappa_vectors: tuple[np.ndarray, ...]
    phi_matrices: tuple[np.ndarray, ...]
    cramers_v: tuple[float, ...]
    cohens_kappa: tuple[float, ...]

    @property
    def r(self) -> int:
        return self.marginal.r

    def __eq__(self, other):
        if not isinstance(other, DependenceFeatures):
            return NotImplemented
        arrays = ("v_matrices", "kappa_vectors", "phi_matrices")
        return (
            self.lags == other.lags
            and np.array_equal(self.marginal.pi, other.marginal.pi)
            and all(
                len(getattr(self, a)) == len(getattr(other, a))
                and all(np.array_equal(x, y) for x, y in zip(getattr(self, a), getattr(other, a)))
                for a in arrays
            )
            and self.cramers_v == other.cramers_v
            and self.cohens_kappa == other.cohens_kappa
        )


def normalize_lags(lags: Sequence[int] | int) -> tuple[int, ...]:
    if isinstance(lags, (int, np.integer)):
        lags = (int(lags),)
    out = tuple(int(l) for l in lags)
    if not out:
        raise InvalidLagError("the lag set must be nonempty")
    if any(l < 1 for l in out) or any(b <= a for a, b in zip(out, out[1:])):
        raise InvalidLagError(f"lags must be positive and strictly increasing, got {out}")
    return out


def features_from_joint(marginal: MarginalDistribution, joints: Sequence[LaggedJointMatrix]) -> DependenceFeatures:
    """Bundle the features of given (estimated or exact) marginal and lagged joint laws.

    Unlike :func:`kappa_vector`, a single-category marginal does not raise here:
    its kappa features are reported as zero so that distances stay computable.
    """
    pi = marginal.pi
    r = pi.shape[0]
    vs, ks, phis, cv, ck = [], [], [], [], []
    for joint in joints:
        v = _v(pi, joint.p)
        k = _kappa(pi, joint.p)
        vs.append(v)
        ks.append(k)
        phis.append(_phi(pi, joint.p))
        cv.append(float(np.clip(np.sqrt(v.sum() / (r - 1)), 0.0, 1.0)))
        ck.append(float(k.sum()))
    lags = normalize_lags([j.lag for j in joints])
    return DependenceFeatures(lags, marginal, tuple(vs), tuple(ks), tuple(phis), tuple(cv), tuple(ck))


def extract_features(series: CategoricalSeries, lags: Sequence[int] | int) -> DependenceFeatures:
    """Compute every feature family over ``lags`` from one set of counts."""
    lags = normalize_lags(lags)
    _check_lag(series.T, lags[-1])
    return features_from_joint(count_marginals(series), [count_lagged_joint(series, lag) for lag in lags])

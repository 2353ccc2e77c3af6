"""Parametric categorical models: Markov chains, hidden Markov models and NDARMA.

Each family can be simulated, fitted, and flattened into a coefficient
vector (:class:`ThetaVector`).  Vectorisation order is fixed: transition
matrices row-major, then emission matrices row-major for HMMs; marginal
probabilities then mixing weights for NDARMA.

The ``_batch`` helpers simulate or fit many series at once and back the
bootstrap loops; the public functions handle a single series.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .features import _kappa, joint_frequencies, marginal_frequencies
from .rng import RandomStream, as_stream
from .series import Alphabet, CategoricalSeries

STOCHASTIC_ATOL = 1e-12


class ModelSpecError(ValueError):
    pass


class NonErgodicWarning(RuntimeWarning):
    """The chain has no unique stationary law; simulation starts from the uniform distribution."""


def _check_stochastic(name: str, M: np.ndarray, ndim: int = 2) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.ndim != ndim:
        raise ModelSpecError(f"{name} must be {ndim}-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)) or np.any(M < 0):
        raise ModelSpecError(f"{name} must have finite non-negative entries")
    sums = M.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise ModelSpecError(f"{name} rows must sum to 1, got {sums}")
    # absorb representation error so invariants hold to 1e-12
    M = M / M.sum(axis=-1, keepdims=True)
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """First-order chain; ``transition[i, j] = P(X_t = j | X_{t-1} = i)``."""

    transition: np.ndarray
    family = "mc"

    def __post_init__(self):
        P = _check_stochastic("transition", self.transition)
        if P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise ModelSpecError(f"transition must be square with r >= 2, got {P.shape}")
        object.__setattr__(self, "transition", P)

    @property
    def r(self) -> int:
        return self.transition.shape[0]


@dataclass(frozen=True, eq=False)
class HiddenMarkov:
    transition: np.ndarray  # (m, m) over hidden states
    emission: np.ndarray  # (m, r)
    family = "hmm"

    def __post_init__(self):
        A = _check_stochastic("transition", self.transition)
        E = _check_stochastic("emission", self.emission)
        if A.shape[0] != A.shape[1]:
            raise ModelSpecError(f"hidden transition must be square, got {A.shape}")
        if E.shape[0] != A.shape[0] or E.shape[1] < 2:
            raise ModelSpecError(f"emission shape {E.shape} incompatible with {A.shape[0]} hidden states")
        object.__setattr__(self, "transition", A)
        object.__setattr__(self, "emission", E)

    @property
    def m(self) -> int:
        return self.transition.shape[0]

    @property
    def r(self) -> int:
        return self.emission.shape[1]


@dataclass(frozen=True, eq=False)
class Ndarma:
    """NDARMA(p, q): at each step copy one of ``X_{t-1..t-p}`` or ``eps_{t..t-q}``.

    ``mixing`` is ``(phi_1, ..., phi_p, varphi_0, ..., varphi_q)``.
    """

    pi: np.ndarray
    mixing: np.ndarray
    p: int
    q: int = 0
    family = "ndarma"

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ModelSpecError("NDARMA orders must be non-negative")
        pi = _check_stochastic("pi", self.pi, ndim=1)
        if pi.shape[0] < 2:
            raise ModelSpecError("NDARMA needs at least two categories")
        mix = _check_stochastic("mixing", self.mixing, ndim=1)
        if mix.shape[0] != self.p + self.q + 1:
            raise ModelSpecError(
                f"mixing has {mix.shape[0]} weights, expected p + q + 1 = {self.p + self.q + 1}"
            )
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "mixing", mix)

    @property
    def r(self) -> int:
        return self.pi.shape[0]


ModelSpec = Union[MarkovChain, HiddenMarkov, Ndarma]


@dataclass(frozen=True, eq=False)
class ThetaVector:
    """Flat coefficient vector of a fitted or specified model.

    ``order`` is 1 for Markov chains, the hidden state count for HMMs and the
    autoregressive order for NDARMA.  ``converged`` is False when a fit hit its
    iteration cap or fell back to a default solution.
    """

    values: np.ndarray
    family: str
    r: int
    order: int = 1
    q: int = 0
    converged: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        expected = theta_dimension(self.family, self.r, self.order, self.q)
        if v.shape != (expected,):
            raise ModelSpecError(
                f"{self.family} theta with r={self.r}, order={self.order} needs {expected} values, got {v.shape}"
            )

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    def compatible(self, other: ThetaVector) -> bool:
        return (self.family, self.r, self.order, self.q) == (other.family, other.r, other.order, other.q)


def theta_dimension(family: str, r: int, order: int = 1, q: int = 0) -> int:
    if family == "mc":
        return r * r
    if family == "hmm":
        return order * order + order * r
    if family == "ndarma":
        return r + order + q + 1
    raise ModelSpecError(f"unknown model family {family!r}")


def theta_of(spec: ModelSpec) -> ThetaVector:
    if isinstance(spec, MarkovChain):
        return ThetaVector(spec.transition.ravel(), "mc", spec.r)
    if isinstance(spec, HiddenMarkov):
        vals = np.concatenate([spec.transition.ravel(), spec.emission.ravel()])
        return ThetaVector(vals, "hmm", spec.r, spec.m)
    if isinstance(spec, Ndarma):
        return ThetaVector(np.concatenate([spec.pi, spec.mixing]), "ndarma", spec.r, spec.p, spec.q)
    raise TypeError(f"not a model spec: {spec!r}")


def spec_from_theta(theta: ThetaVector) -> ModelSpec:
    v, r = theta.values, theta.r
    if theta.family == "mc":
        return MarkovChain(v.reshape(r, r))
    if theta.family == "hmm":
        m = theta.order
        return HiddenMarkov(v[: m * m].reshape(m, m), v[m * m :].reshape(m, r))
    return Ndarma(v[:r], v[r:], theta.order, theta.q)


def average_theta(a: ThetaVector, b: ThetaVector) -> ThetaVector:
    if not a.compatible(b):
        raise ModelSpecError(
            f"cannot average {a.family}(r={a.r}, order={a.order}) with {b.family}(r={b.r}, order={b.order})"
        )
    return ThetaVector((a.values + b.values) / 2, a.family, a.r, a.order, a.q, a.converged and b.converged)


# ---------------------------------------------------------------------------
# stationary laws and simulation

def stationary_distribution(P: np.ndarray) -> tuple[np.ndarray, bool]:
    """Return ``(pi, unique)``; ``pi`` is uniform when the stationary law is not unique."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    eig = np.linalg.eigvals(P)
    if np.sum(np.abs(eig - 1.0) < 1e-9) > 1:
        return np.full(n, 1.0 / n), False
    system = np.vstack([P.T - np.eye(n), np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum(), True


def _initial_law(P: np.ndarray) -> np.ndarray:
    pi, unique = stationary_distribution(P)
    if not unique:
        warnings.warn(
            "transition matrix has no unique stationary distribution; starting from uniform",
            NonErgodicWarning,
            stacklevel=3,
        )
    return pi


def _draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw: ``cum`` is ``(..., k)`` cumulative rows matching ``u``'s shape."""
    k = cum.shape[-1]
    return np.minimum((u[..., None] >= cum).sum(axis=-1), k - 1)


def _mc_batch(P: np.ndarray, init: np.ndarray, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(P, axis=1)
    u = rng.random((n, T))
    X = np.empty((n, T), dtype=np.int64)
    X[:, 0] = _draw(np.cumsum(init), u[:, 0])
    for t in range(1, T):
        X[:, t] = _draw(cum[X[:, t - 1]], u[:, t])
    return X


def _hmm_batch(spec: HiddenMarkov, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    hidden = _mc_batch(spec.transition, _initial_law(spec.transition), T, n, rng)
    cumE = np.cumsum(spec.emission, axis=1)
    return _draw(cumE[hidden], rng.random((n, T)))


NDARMA_WARMUP = 200


def _ndarma_batch(spec: Ndarma, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    p, q = spec.p, spec.q
    H = max(p, q)
    L = T + H + NDARMA_WARMUP
    eps = _draw(np.cumsum(spec.pi), rng.random((n, L)))
    choice = _draw(np.cumsum(spec.mixing), rng.random((n, L)))
    X = np.empty((n, L), dtype=np.int64)
    X[:, :H] = eps[:, :H]
    rows = np.arange(n)
    for t in range(H, L):
        cand = np.concatenate([X[:, t - p : t][:, ::-1], eps[:, t - q : t + 1][:, ::-1]], axis=1)
        X[:, t] = cand[rows, choice[:, t]]
    return X[:, L - T :]


def simulate_batch(spec: ModelSpec, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent length-``T`` realizations as an ``(n, T)`` code array."""
    if T < 1:
        raise ValueError(f"series length must be positive, got {T}")
    if isinstance(spec, MarkovChain):
        return _mc_batch(spec.transition, _initial_law(spec.transition), T, n, rng)
    if isinstance(spec, HiddenMarkov):
        return _hmm_batch(spec, T, n, rng)
    if isinstance(spec, Ndarma):
        return _ndarma_batch(spec, T, n, rng)
    raise TypeError(f"not a model spec: {spec!r}")


def simulate(spec: ModelSpec, T: int, stream: RandomStream | int | None = None) -> CategoricalSeries:
    X = simulate_batch(spec, T, 1, as_stream(stream).generator())
    return CategoricalSeries(X[0], Alphabet.of_size(spec.r))


def simulate_mc(spec: MarkovChain, T: int, stream=None) -> CategoricalSeries:
    return simulate(spec, T, stream)


def simulate_hmm(spec: HiddenMarkov, T: int, stream=None) -> CategoricalSeries:
    return simulate(spec, T, stream)


def simulate_ndarma(spec: Ndarma, T: int, stream=None) -> CategoricalSeries:
    return simulate(spec, T, stream)


# ---------------------------------------------------------------------------
# fitting

def _fit_mc_batch(X: np.ndarray, r: int) -> np.ndarray:
    # joint_frequencies gives [next, prev]; transpose to [from, to]
    counts = np.swapaxes(joint_frequencies(X, r, 1), 1, 2)
    rows = counts.sum(axis=2, keepdims=True)
    P = np.where(rows > 0, counts / np.where(rows > 0, rows, 1.0), 1.0 / r)
    return P.reshape(P.shape[0], r * r)


def fit_mc(series: CategoricalSeries, r: int | None = None) -> ThetaVector:
    """Maximum likelihood transition matrix; unvisited states get a uniform row."""
    r = series.r if r is None else r
    if series.T < 2:
        raise ValueError("fitting a Markov chain needs at least two observations")
    return ThetaVector(_fit_mc_batch(series.values, r)[0], "mc", r)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n, k = v.shape
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, k + 1)
    cond = u - css / idx > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(n), rho] / (rho + 1)
    return np.maximum(v - tau[:, None], 0.0)


def _fit_ndarma_batch(X: np.ndarray, r: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Moment fit of NDARMA(p, 0) for each row; returns ``(theta rows, ok flags)``."""
    n = X.shape[0]
    pi = marginal_frequencies(X, r)
    if p == 0:
        return np.concatenate([pi, np.ones((n, 1))], axis=1), np.ones(n, dtype=bool)
    degenerate = (1.0 - np.sum(pi**2, axis=1)) <= 0
    kap = np.ones((n, p + 1))
    for lag in range(1, p + 1):
        kap[:, lag] = _kappa(pi, joint_frequencies(X, r, lag)).sum(axis=1)
    lagdiff = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    R = kap[:, lagdiff]
    rhs = kap[:, 1:]
    singular = degenerate | (np.abs(np.linalg.det(R)) < 1e-12)
    phi = np.zeros((n, p))
    good = ~singular
    if good.any():
        phi[good] = np.linalg.solve(R[good], rhs[good][..., None])[..., 0]
    mixing = np.concatenate([phi, 1.0 - phi.sum(axis=1, keepdims=True)], axis=1)
    mixing = project_to_simplex(mixing)
    mixing[singular] = 0.0
    mixing[singular, -1] = 1.0
    return np.concatenate([pi, mixing], axis=1), good


def fit_ndarma(series: CategoricalSeries, p: int, q: int = 0) -> ThetaVector:
    """Fit NDARMA(p, 0) by matching lagged Cohen's kappa (Yule-Walker type equations).

    A singular moment system falls back to pure noise (``varphi_0 = 1``) and
    sets ``converged=False``.
    """
    if q != 0:
        raise NotImplementedError("only NDARMA(p, 0) can be fitted")
    if series.T <= p:
        raise ValueError(f"need more than {p} observations to fit NDARMA({p}, 0)")
    theta, ok = _fit_ndarma_batch(np.atleast_2d(series.values), series.r, p)
    return ThetaVector(theta[0], "ndarma", series.r, p, 0, bool(ok[0]))


@dataclass
class BaumWelchResult:
    transition: np.ndarray  # (n, m, m)
    emission: np.ndarray  # (n, m, r)
    loglik: list[np.ndarray] = field(default_factory=list)  # per-series traces
    converged: np.ndarray = None


def _forward_backward(X, A, E, init):
    n, T = X.shape
    m = A.shape[1]
    Bobs = E[np.arange(n)[:, None], :, X]  # (n, T, m)
    alpha = np.empty((n, T, m))
    c = np.empty((n, T))
    a = init * Bobs[:, 0]
    c[:, 0] = a.sum(axis=1)
    alpha[:, 0] = a / c[:, 0, None]
    for t in range(1, T):
        a = np.matmul(alpha[:, t - 1, None, :], A)[:, 0] * Bobs[:, t]
        c[:, t] = a.sum(axis=1)
        alpha[:, t] = a / c[:, t, None]
    beta = np.empty((n, T, m))
    beta[:, -1] = 1.0
    for t in range(T - 2, -1, -1):
        w = Bobs[:, t + 1] * beta[:, t + 1] / c[:, t + 1, None]
        beta[:, t] = np.matmul(A, w[..., None])[..., 0]
    return Bobs, alpha, beta, c


def baum_welch(
    X: np.ndarray,
    r: int,
    A0: np.ndarray,
    E0: np.ndarray,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> BaumWelchResult:
    """Run EM independently on each row of ``X`` (all rows share length).

    ``A0``/``E0`` are ``(n, m, m)``/``(n, m, r)`` starting points.  The initial
    hidden-state distribution is re-estimated freely (it is not part of theta).
    Rows stop updating once their log-likelihood gain drops below ``tol``, so
    each row's result does not depend on the rest of the batch.
    """
    X = np.atleast_2d(X)
    n, T = X.shape
    A, E = np.array(A0, dtype=float), np.array(E0, dtype=float)
    m = A.shape[1]
    init = np.full((n, m), 1.0 / m)
    onehot = np.eye(r)[X]  # (n, T, r)
    traces = [[] for _ in range(n)]
    active = np.ones(n, dtype=bool)
    converged = np.zeros(n, dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Bobs, alpha, beta, c = _forward_backward(X[idx], A[idx], E[idx], init[idx])
        ll = np.log(c).sum(axis=1)
        for j, i in enumerate(idx):
            prev = traces[i][-1] if traces[i] else None
            traces[i].append(ll[j])
            if prev is not None and ll[j] - prev < tol:
                active[i] = False
                converged[i] = True
        if len(traces[idx[0]]) > max_iter:
            break
        upd = active[idx]
        if not upd.any():
            break
        idx, Bobs, alpha, beta, c = idx[upd], Bobs[upd], alpha[upd], beta[upd], c[upd]
        gamma = alpha * beta
        gamma /= gamma.sum(axis=2, keepdims=True)
        w = Bobs[:, 1:] * beta[:, 1:] / c[:, 1:, None]
        xi = np.einsum("ntm,ntk->nmk", alpha[:, :-1], w) * A[idx]
        emis = np.einsum("ntm,ntk->nmk", gamma, onehot[idx])
        xs, es = xi.sum(axis=2, keepdims=True), emis.sum(axis=2, keepdims=True)
        A[idx] = np.where(xs > 0, xi / np.where(xs > 0, xs, 1.0), A[idx])
        E[idx] = np.where(es > 0, emis / np.where(es > 0, es, 1.0), E[idx])
        init[idx] = gamma[:, 0]
    return BaumWelchResult(A, E, [np.array(t) for t in traces], converged)


def canonical_order(A: np.ndarray, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Relabel hidden states by descending probability of emitting the first category."""
    order = np.argsort(-E[..., :, 0], axis=-1, kind="stable")
    A = np.stack([a[o][:, o] for a, o in zip(A, order)])
    E = np.stack([e[o] for e, o in zip(E, order)])
    return A, E


def hmm_initial_guess(n: int, m: int, r: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    A = np.full((n, m, m), 1.0 / m) + 0.1 * np.eye(m) + 0.05 * rng.random((n, m, m))
    E = np.full((n, m, r), 1.0 / r) + 0.1 * rng.random((n, m, r))
    return A / A.sum(axis=2, keepdims=True), E / E.sum(axis=2, keepdims=True)


HMM_MAX_ITER = 200
HMM_TOL = 1e-8


def _fit_hmm_batch(X: np.ndarray, r: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(X)
    A0, E0 = hmm_initial_guess(X.shape[0], m, r, rng)
    res = baum_welch(X, r, A0, E0, HMM_MAX_ITER, HMM_TOL)
    A, E = canonical_order(res.transition, res.emission)
    n = X.shape[0]
    return np.concatenate([A.reshape(n, -1), E.reshape(n, -1)], axis=1), res.converged


def fit_hmm(
    series: CategoricalSeries,
    m: int,
    stream: RandomStream | int | None = None,
    init: HiddenMarkov | None = None,
    max_iter: int = HMM_MAX_ITER,
    tol: float = HMM_TOL,
) -> ThetaVector:
    """Baum-Welch maximum likelihood fit with ``m`` hidden states.

    Starts from ``init`` when given, otherwise from a perturbed uniform guess
    drawn from ``stream``.  Returns the last iterate with ``converged=False``
    if the iteration cap is reached.
    """
    if series.T < 10 * m:
        raise ValueError(f"fitting {m} hidden states needs at least {10 * m} observations")
    r = series.r
    if init is not None:
        if init.m != m or init.r != r:
            raise ModelSpecError("initial HMM does not match the requested dimensions")
        A0, E0 = init.transition[None].copy(), init.emission[None].copy()
    else:
        A0, E0 = hmm_initial_guess(1, m, r, as_stream(stream).generator())
    res = baum_welch(series.values[None], r, A0, E0, max_iter, tol)
    A, E = canonical_order(res.transition, res.emission)
    vals = np.concatenate([A[0].ravel(), E[0].ravel()])
    return ThetaVector(vals, "hmm", r, m, 0, bool(res.converged[0]))


# ---------------------------------------------------------------------------
# family-level dispatch used by the distances and the bootstrap

@dataclass(frozen=True)
class ModelFamily:
    """Which parametric class to fit: ``mc``, ``hmm`` (with ``order`` hidden states) or ``ndarma`` (order p)."""

    name: str = "mc"
    order: int = 1

    def __post_init__(self):
        if self.name not in ("mc", "hmm", "ndarma"):
            raise ModelSpecError(f"unknown model family {self.name!r}")
        if self.order < (0 if self.name == "ndarma" else 1):
            raise ModelSpecError(f"invalid order {self.order} for {self.name}")

    @classmethod
    def of(cls, spec: ModelSpec) -> ModelFamily:
        if isinstance(spec, MarkovChain):
            return cls("mc", 1)
        if isinstance(spec, HiddenMarkov):
            return cls("hmm", spec.m)
        return cls("ndarma", spec.p)

    def fit_batch(self, X: np.ndarray, r: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Fitted theta rows for each row of ``X``."""
        if self.name == "mc":
            return _fit_mc_batch(X, r)
        if self.name == "ndarma":
            return _fit_ndarma_batch(X, r, self.order)[0]
        if rng is None:
            raise ValueError("HMM fitting needs a random generator for initialisation")
        return _fit_hmm_batch(X, r, self.order, rng)[0]

    def fit(self, series: CategoricalSeries, stream: RandomStream | int | None = None) -> ThetaVector:
        if self.name == "mc":
            return fit_mc(series)
        if self.name == "ndarma":
            return fit_ndarma(series, self.order)
        return fit_hmm(series, self.order, stream)

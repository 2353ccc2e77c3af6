"""Acceptance suite: every criterion at its stated tolerance.

Monte Carlo cells use N=200 replications and B=250 bootstrap replicates under
one fixed master seed. Each test records a PASS/FAIL line that is repeated in
the pytest terminal summary.
"""

import numpy as np
import pytest
from scipy.stats import fisher_exact

from ctsboot.bootstrap import TestConfig, mbb_resample_pair, run_test, sb_resample_pair
from ctsboot.cluster import classical_mds, pvalue_clustering
from ctsboot.distances import DistanceKind, distance
from ctsboot.experiments import GridConfig, run_grid
from ctsboot.features import count_lagged_joint, extract_features
from ctsboot.models import ModelFamily, Ndarma, simulate
from ctsboot.rng import RandomStream
from ctsboot.series import CategoricalSeries

from conftest import all_series, naive_features

SEED = 2026
N, B = 200, 250
METRICS = ("cc", "b", "mle")
METHODS = ("ba", "mbb", "sb")

pytestmark = pytest.mark.slow


def grid(**kw):
    return run_grid(GridConfig(N=N, B=B, seed=SEED, **kw))


def fmt(rates):
    return " ".join(f"{k}={v:.3f}" for k, v in rates.items())


def test_size_calibration_scenario1(acceptance_report):
    table = grid(scenarios=(1,), deltas=(0.0,), lengths=(500,))
    rates = {f"{m}/{b}": table.rate(1, 0.0, 500, m, b) for m in METRICS for b in METHODS}
    ok = all(0.02 <= r <= 0.09 for r in rates.values())
    acceptance_report("1 size, Scenario 1, delta=0, T=500, in [0.02, 0.09]", ok, fmt(rates))
    assert ok


def test_power_ceiling_scenario1(acceptance_report):
    table = grid(scenarios=(1,), deltas=(0.1,), lengths=(500,), metrics=("cc",))
    rates = {b: table.rate(1, 0.1, 500, "cc", b) for b in METHODS}
    ok = all(r >= 0.99 for r in rates.values())
    acceptance_report("2 power, Scenario 1, delta=0.1, T=500, CC >= 0.99", ok, fmt(rates))
    assert ok


def test_mid_power_cell(acceptance_report):
    table = grid(scenarios=(1,), deltas=(0.075,), lengths=(200,), metrics=("cc", "b"), methods=("mbb",))
    cc, b = table.rate(1, 0.075, 200, "cc", "mbb"), table.rate(1, 0.075, 200, "b", "mbb")
    k_cc, k_b = round(cc * N), round(b * N)
    _, p = fisher_exact([[k_cc, N - k_cc], [k_b, N - k_b]], alternative="greater")
    ok = abs(cc - 0.799) <= 0.06 and abs(b - 0.127) <= 0.05 and p < 0.01
    acceptance_report(
        "3 mid power, Scenario 1, delta=0.075, T=200, MBB",
        ok,
        f"CC={cc:.3f} (0.799+-0.06) B={b:.3f} (0.127+-0.05) one-sided p(CC>B)={p:.2g}",
    )
    assert ok


def test_scenario3(acceptance_report):
    power = grid(scenarios=(3,), deltas=(0.2,), lengths=(200,), metrics=("cc",))
    size = grid(scenarios=(3,), deltas=(0.0,), lengths=(500,))
    p_rates = {b: power.rate(3, 0.2, 200, "cc", b) for b in METHODS}
    s_rates = {f"{m}/{b}": size.rate(3, 0.0, 500, m, b) for m in METRICS for b in METHODS}
    ok = all(r >= 0.95 for r in p_rates.values()) and all(0.02 <= r <= 0.09 for r in s_rates.values())
    acceptance_report(
        "4 Scenario 3, delta=0.2 T=200 CC >= 0.95; delta=0 T=500 in [0.02, 0.09]",
        ok,
        f"power {fmt(p_rates)}; size {fmt(s_rates)}",
    )
    assert ok


def test_tuning_flatness(acceptance_report):
    sizes = (4, 8, 12, 16, 20)
    table = grid(scenarios=(1,), deltas=(0.0,), lengths=(200,), metrics=("cc",), methods=("mbb",), block_sizes=sizes)
    base = table.rate(1, 0.0, 200, "cc", "mbb")  # default b = 6 at T = 200
    rates = {f"b={b}": table.rate(1, 0.0, 200, "cc", "mbb", block_size=b) for b in sizes}
    ok = all(0.02 <= r <= 0.09 and abs(r - base) <= 0.05 for r in rates.values())
    acceptance_report("5 tuning flatness, Scenario 1, T=200, delta=0, CC/MBB", ok, f"b=6={base:.3f} {fmt(rates)}")
    assert ok


# ---------------------------------------------------------------------------
# criterion 6: property suite


def _features_brute_force():
    for r, values in all_series(8, 3):
        x = CategoricalSeries.from_codes(values, r)
        lags = [1, 2] if len(values) > 2 else [1]
        f = extract_features(x, lags)
        for k, lag in enumerate(lags):
            pi, p, V, K, Phi = naive_features(values, r, lag)
            if not (
                np.array_equal(f.marginal.pi, pi)
                and np.array_equal(count_lagged_joint(x, lag).p, p)
                and np.array_equal(f.v_matrices[k], V)
                and np.array_equal(f.kappa_vectors[k], K)
                and np.array_equal(f.phi_matrices[k], Phi)
            ):
                return False
    return True


def _dar1_kappa():
    phi = 0.6
    x = simulate(Ndarma([0.2, 0.3, 0.5], [phi, 1 - phi], p=1), 50000, RandomStream(SEED).child("dar1"))
    return abs(extract_features(x, [1]).cohens_kappa[0] - phi) <= 0.02


def _distance_axioms():
    root = RandomStream(SEED).child("axioms")
    kinds = [
        DistanceKind("cc", (1, 2)),
        DistanceKind("b", (1, 2)),
        DistanceKind("mle", family=ModelFamily("mc")),
        DistanceKind("mle", family=ModelFamily("ndarma", 1)),
        DistanceKind("mle", family=ModelFamily("hmm", 2)),
    ]
    for i in range(30):
        g = root.child(i).generator()
        T1, T2 = g.integers(10, 80, size=2)
        x1 = CategoricalSeries.from_codes(g.integers(0, 3, T1), 3)
        x2 = CategoricalSeries.from_codes(g.integers(0, 3, T2), 3)
        for kind in kinds:
            s = root.child(i, "fit")
            if distance(x1, x1, kind, s) != 0.0 or distance(x1, x2, kind, s) != distance(x2, x1, kind, s):
                return False
    return True


def _resample_invariants():
    root = RandomStream(SEED).child("resample")
    for i in range(10_000):
        g = root.child(i).generator()
        T1, T2 = (int(t) for t in g.integers(4, 60, size=2))
        r = int(g.integers(2, 6))
        x1 = CategoricalSeries.from_codes(g.integers(0, r, T1), r)
        x2 = CategoricalSeries.from_codes(g.integers(0, r, T2), r)
        allowed = set(x1.values.tolist()) | set(x2.values.tolist())
        if i % 2:
            y1, y2 = mbb_resample_pair(x1, x2, int(g.integers(1, min(T1, T2) + 1)), root.child(i, "b"))
        else:
            y1, y2 = sb_resample_pair(x1, x2, float(g.uniform()), root.child(i, "b"))
        if (y1.T, y2.T) != (T1, T2) or not set(np.concatenate([y1.values, y2.values]).tolist()) <= allowed:
            return False
    return True


def _thread_invariance():
    x1 = simulate(Ndarma([0.3, 0.3, 0.4], [0.5, 0.5], p=1), 200, RandomStream(SEED).child("t", 1))
    x2 = simulate(Ndarma([0.3, 0.3, 0.4], [0.3, 0.7], p=1), 200, RandomStream(SEED).child("t", 2))
    for metric in METRICS:
        for method in METHODS:
            cfg = TestConfig(metric=metric, method=method, B=B, seed=SEED, family=ModelFamily("ndarma", 1))
            a = run_test(x1, x2, cfg)
            b = run_test(x1, x2, TestConfig(**{**cfg.__dict__, "n_jobs": 4}))
            same = (a.observed, a.critical, a.pvalue, a.reject) == (b.observed, b.critical, b.pvalue, b.reject)
            if not (same and np.array_equal(a.replicates, b.replicates)):
                return False
    return True


def _mds_round_trip():
    g = RandomStream(SEED).child("mds").generator()
    for _ in range(50):
        X = g.normal(size=(int(g.integers(3, 12)), 2)) * 5
        D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
        Y, _ = classical_mds(D, 2)
        if not np.allclose(np.sqrt(((Y[:, None] - Y[None]) ** 2).sum(-1)), D, rtol=0, atol=1e-8):
            return False
    return True


def _partition_invariant():
    g = RandomStream(SEED).child("partition").generator()
    alpha = 0.05
    for _ in range(100):
        n = int(g.integers(2, 15))
        U = g.uniform(size=(n, n)) ** 3
        P = np.triu(U, 1) + np.triu(U, 1).T
        np.fill_diagonal(P, 1.0)
        for c in pvalue_clustering(P, alpha).clusters():
            if len(c) > 1 and P[np.ix_(c, c)][~np.eye(len(c), dtype=bool)].min() <= alpha:
                return False
    return True


PROPERTIES = {
    "feature brute force (T<=8, r<=3)": _features_brute_force,
    "DAR(1) kappa = phi1 within 0.02 (T=50000)": _dar1_kappa,
    "d(x,x)=0 and symmetry, all distances": _distance_axioms,
    "MBB/SB length and closure (10^4 resamples)": _resample_invariants,
    "bit-identical results across thread counts": _thread_invariance,
    "MDS round trip at 1e-8": _mds_round_trip,
    "partition invariant (100 random matrices)": _partition_invariant,
}


def test_property_suite(acceptance_report):
    results = {name: check() for name, check in PROPERTIES.items()}
    ok = all(results.values())
    acceptance_report("6 property suite", ok, "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in results.items()))
    assert ok, results

import itertools
import math

import numpy as np
import pytest

from ctsboot.series import CategoricalSeries


def naive_features(values, r, lag):
    """Loop-based recount of pi, p(lag), V, K, Phi straight from the definitions."""
    T = len(values)
    pi = [sum(1 for x in values if x == i) / T for i in range(r)]
    p = [[0.0] * r for _ in range(r)]
    for t in range(lag, T):
        p[values[t]][values[t - lag]] += 1
    p = [[c / (T - lag) for c in row] for row in p]
    V = [[0.0] * r for _ in range(r)]
    Phi = [[0.0] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            if pi[i] * pi[j] > 0:
                V[i][j] = (p[i][j] - pi[i] * pi[j]) ** 2 / (pi[i] * pi[j])
            s = (pi[i] * (1 - pi[i])) * (pi[j] * (1 - pi[j]))
            if s > 0:
                Phi[i][j] = min(1.0, max(-1.0, (p[i][j] - pi[i] * pi[j]) / math.sqrt(s)))
    denom = 1 - sum(x * x for x in pi)
    K = [(p[i][i] - pi[i] ** 2) / denom if denom > 0 else 0.0 for i in range(r)]
    return pi, p, V, K, Phi


def dar1_joint(phi, pi):
    """Exact lag-1 joint law of a DAR(1): p_ij = phi 1{i=j} pi_j + (1 - phi) pi_i pi_j."""
    pi = np.asarray(pi, dtype=float)
    return phi * np.diag(pi) + (1 - phi) * np.outer(pi, pi)


def all_series(max_T=8, max_r=3):
    for r in range(2, max_r + 1):
        for T in range(2, max_T + 1):
            for values in itertools.product(range(r), repeat=T):
                yield r, values


@pytest.fixture
def series_of():
    def make(values, r):
        return CategoricalSeries.from_codes(values, r)

    return make


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion; shown in the terminal summary."""

    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

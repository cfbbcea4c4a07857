import numpy as np
import pytest

from biofilm1d.model import FAST, TABLE1, ModelParams, hyperbolic_bound


@pytest.fixture
def table1():
    return TABLE1


@pytest.fixture
def fast():
    return FAST


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def random_domain_states(rng, n, p: ModelParams, lo=0.05, hi=0.4, vfrac=0.9):
    """n states with B, E, D in [lo, hi], 0 < L < 1 and |v| below vfrac * W bound."""
    out = []
    while len(out) < n:
        B, E, D = rng.uniform(lo, hi, 3)
        L = 1 - (B + E + D)
        if not 0 < L < 1:
            continue
        v = rng.uniform(-vfrac, vfrac) * hyperbolic_bound(L, p.gamma)
        out.append(np.array([B, E, D, v]))
    return out


def random_params(rng, gamma=1.0, M=1e-6):
    """Log-uniform rates with kB > kD, alpha in (0, 1]."""
    while True:
        kB, kE, kD, kN, eps = 10 ** rng.uniform(-8, -5, 5)
        if kB > 1.01 * kD:
            return ModelParams(kB, kE, kD, kN, eps, rng.uniform(0.05, 1.0), gamma, M)


# acceptance results, echoed in the terminal summary so they show without -s
ACCEPTANCE = {}


def report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

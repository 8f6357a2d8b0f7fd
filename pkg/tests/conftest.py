import numpy as np
import pytest

from hdtorus.torus import Family, TorusSpec


def nn(r, n):
    return TorusSpec(Family.NEAREST_NEIGHBOR, r, n)


def ham(r, n):
    return TorusSpec(Family.HAMMING, r, n)


def so(r, n, L):
    return TorusSpec(Family.SPREAD_OUT, r, n, L)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def symmetric_field(spec, rng, scale=1.0):
    f = rng.random(spec.V) * scale
    return 0.5 * (f + f[spec.negation])


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

# acceptance criteria report one line each; collected here and printed at the end
_ACCEPTANCE = []


def record_acceptance(number, name, passed, detail=""):
    line = f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f": {detail}"
    _ACCEPTANCE.append((number, line))
    print(line)


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_symmetric_graph(rng, n, density=0.4, connected=True):
    """Dense random weight matrix; a ring keeps it connected when asked."""
    w = np.triu(rng.uniform(0.1, 2.0, (n, n)) * (rng.random((n, n)) < density), 1)
    if connected:
        for i in range(n - 1):
            w[i, i + 1] = max(w[i, i + 1], 0.5)
    return w + w.T


def cliques(sizes, weight=1.0):
    n = sum(sizes)
    w = np.zeros((n, n))
    start = 0
    for s in sizes:
        w[start:start + s, start:start + s] = weight
        start += s
    np.fill_diagonal(w, 0.0)
    return w, np.repeat(np.arange(len(sizes)), sizes)

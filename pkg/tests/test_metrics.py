import itertools
import math

import numpy as np
import pytest

from mixclust.graph import SimilarityMatrix
from mixclust.matrices import TWO_BLOCK_LABELS, TWO_BLOCK_W, two_block_graph
from mixclust.metrics import (contingency, entropy, exact_recovery, mutual_information, ncut,
                              nmi)
from mixclust.rard import ClusterAssignment

from conftest import cliques, random_symmetric_graph


def slow_nmi(a, b):
    """Textbook NMI with explicit loops over cluster pairs."""
    n = len(a)
    ca, cb = sorted(set(a)), sorted(set(b))
    pa = {u: sum(1 for v in a if v == u) / n for u in ca}
    pb = {u: sum(1 for v in b if v == u) / n for u in cb}
    mi = 0.0
    for u in ca:
        for v in cb:
            pj = sum(1 for i in range(n) if a[i] == u and b[i] == v) / n
            if pj > 0:
                mi += pj * math.log(pj / (pa[u] * pb[v]))
    ha = -sum(p * math.log(p) for p in pa.values())
    hb = -sum(p * math.log(p) for p in pb.values())
    return mi, ha, hb


def slow_ncut(w, labels):
    total = 0.0
    for c in set(labels):
        inside = [i for i in range(len(labels)) if labels[i] == c]
        outside = [i for i in range(len(labels)) if labels[i] != c]
        cut = sum(w[i][j] for i in inside for j in outside)
        vol = sum(w[i][j] for i in inside for j in range(len(labels)))
        total += cut / vol
    return total


def test_nmi_identical():
    a = [0, 0, 1, 1, 2]
    assert nmi(a, a) == 1.0


def test_nmi_independent_product_partition():
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)


def test_nmi_permutation():
    assert nmi([0, 0, 1, 1, 2], [5, 5, 3, 3, 9]) == pytest.approx(1.0, abs=1e-15)


def test_nmi_zero_entropy_convention():
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert nmi([0, 0, 0], [0, 1, 1]) == 0.0
    assert nmi([0, 1, 2], [0, 0, 0]) == 0.0


def test_nmi_matches_textbook(rng):
    for _ in range(20):
        a = rng.integers(0, 4, 40).tolist()
        b = rng.integers(0, 3, 40).tolist()
        mi, ha, hb = slow_nmi(a, b)
        assert mutual_information(a, b) == pytest.approx(mi, abs=1e-12)
        assert entropy(a) == pytest.approx(ha, abs=1e-12)
        assert nmi(a, b) == pytest.approx(mi / math.sqrt(ha * hb), abs=1e-12)


def test_nmi_accepts_assignment():
    a = ClusterAssignment(np.array([0, 1, 1]))
    assert nmi(a, [3, 4, 4]) == 1.0


def test_contingency():
    tab = contingency([0, 0, 1], [1, 0, 0])
    np.testing.assert_array_equal(tab.counts, [[1, 1], [1, 0]])
    assert tab.n == 3
    with pytest.raises(ValueError):
        contingency([0], [0, 1])


def test_exact_recovery():
    t = [0, 0, 1, 1, 2]
    assert exact_recovery(t, t)
    assert exact_recovery([2, 2, 0, 0, 1], t)
    assert not exact_recovery([0, 0, 1, 1, 1], t)
    assert not exact_recovery([0, 1, 2, 3, 4], t)


def test_ncut_block_diagonal_zero():
    w, lab = cliques([3, 4])
    assert ncut(SimilarityMatrix.from_dense(w), lab) == 0.0


def test_ncut_single_cluster_zero(rng):
    g = SimilarityMatrix.from_dense(random_symmetric_graph(rng, 10))
    assert ncut(g, np.zeros(10, dtype=int)) == 0.0


def test_ncut_two_block_example():
    # cross weight is 8; volumes are 74 + 52 + 82 and 67 + 58 + 73
    got = ncut(two_block_graph(), TWO_BLOCK_LABELS)
    assert got == pytest.approx(8 / 208 + 8 / 198, rel=1e-14)
    assert got == pytest.approx(slow_ncut(TWO_BLOCK_W.tolist(), TWO_BLOCK_LABELS.tolist()))


def test_ncut_matches_brute_force(rng):
    for _ in range(10):
        w = random_symmetric_graph(rng, 15)
        lab = rng.integers(0, 3, 15)
        lab[:3] = [0, 1, 2]
        assert ncut(SimilarityMatrix.from_dense(w), lab) == pytest.approx(
            slow_ncut(w.tolist(), lab.tolist()), rel=1e-12)


def test_ncut_zero_volume_rejected():
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1.0
    with pytest.raises(ValueError):
        ncut(w, [0, 0, 1])


def test_entropy_nats():
    assert entropy([0, 1]) == pytest.approx(math.log(2))
    assert entropy([7, 7, 7]) == 0.0


def test_nmi_brute_small_exhaustive():
    # every pair of labelings of 4 points with at most 2 labels
    labs = list(itertools.product([0, 1], repeat=4))
    for a in labs:
        for b in labs:
            v = nmi(a, b)
            assert 0.0 <= v <= 1.0 + 1e-12
            assert v == pytest.approx(nmi(b, a), abs=1e-12)

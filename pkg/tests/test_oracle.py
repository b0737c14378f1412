import numpy as np
import pytest

from mixclust.graph import SimilarityMatrix
from mixclust.matrices import (TOY_BLOCKS, TWO_BLOCK_E, TWO_BLOCK_LABELS, TWO_BLOCK_W,
                               TWO_BLOCK_W_STAR, toy_ideal_graph, toy_symmetrized_graph,
                               two_block_graph)
from mixclust.metrics import exact_recovery
from mixclust.mixing import MixingOperator, apply_operator
from mixclust.oracle import (ORACLE_MAX_N, ConvergenceError, HypothesisError, OracleSizeError,
                             corollary1_rhs, eigen_decompose, ideal_eigenvectors, ideal_split,
                             jacobi_eigh, lemma1_check, ncut_reference_cluster,
                             normalized_laplacian, spectral_power, stopping_time_estimate,
                             theorem1_bound_check, theorem2_bound_check)
from mixclust.synth import SbmParams, generate_sbm, generate_weakly_coupled

from conftest import cliques, random_symmetric_graph


def simplex_point(rng, n):
    x = rng.random(n) + 0.01
    return x / x.sum()


# ---------------------------------------------------------------- Jacobi

@pytest.mark.parametrize("n", [1, 2, 3, 10, 41])
def test_jacobi_matches_numpy(rng, n):
    a = rng.normal(size=(n, n))
    a = (a + a.T) / 2
    w, v, _ = jacobi_eigh(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-12)
    np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(a @ v, v * w, atol=1e-11)


def test_jacobi_degenerate_and_diagonal():
    w, v, sweeps = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(w, [1.0, 2.0, 3.0])
    assert sweeps == 0
    w, v, _ = jacobi_eigh(np.ones((4, 4)))
    np.testing.assert_allclose(w, [0, 0, 0, 4], atol=1e-13)


def test_jacobi_wide_dynamic_range():
    # entries spanning many orders of magnitude stress the rotation formula
    a = np.diag([1e12, 1.0, -1e-8]) + 1e-30 * (np.ones((3, 3)) - np.eye(3))
    w, _, _ = jacobi_eigh(a)
    assert np.all(np.isfinite(w))


def test_jacobi_rejects():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))
    a = np.random.default_rng(0).normal(size=(30, 30))
    with pytest.raises(ConvergenceError):
        jacobi_eigh(a + a.T, max_sweeps=1)


def test_jacobi_sign_convention(rng):
    a = rng.normal(size=(8, 8))
    _, v, _ = jacobi_eigh(a + a.T)
    big = np.abs(v).argmax(axis=0)
    assert np.all(v[big, np.arange(8)] > 0)


# ---------------------------------------------------------------- spectra

def test_k2_spectrum():
    r = eigen_decompose(SimilarityMatrix.from_dense([[0, 1], [1, 0]]))
    np.testing.assert_allclose(r.lambdas, [0, 2], atol=1e-15)


def test_triangle_spectrum():
    r = eigen_decompose(SimilarityMatrix.from_dense(cliques([3])[0]))
    np.testing.assert_allclose(r.lambdas, [0, 1.5, 1.5], atol=1e-14)


def test_cliques_zero_multiplicity():
    r = eigen_decompose(SimilarityMatrix.from_dense(cliques([3, 4, 5])[0]))
    assert np.sum(r.lambdas < 1e-12) == 3
    assert r.lambdas[3] > 0.5


def test_eigen_report_invariants(rng):
    g = SimilarityMatrix.from_dense(random_symmetric_graph(rng, 30))
    r = eigen_decompose(g)
    assert r.residual <= 1e-9
    assert r.lambdas.min() >= -1e-9 and r.lambdas.max() <= 2 + 1e-9
    np.testing.assert_allclose(r.phis.T @ r.phis, np.eye(30), atol=1e-9)
    lap = normalized_laplacian(g)
    np.testing.assert_allclose(r.lambdas, np.linalg.eigvalsh(lap), atol=1e-12)


def test_size_guard():
    n = ORACLE_MAX_N + 1
    g = SimilarityMatrix.from_dense(np.ones((n, n)), zero_diagonal=True)
    with pytest.raises(OracleSizeError):
        eigen_decompose(g)


def test_laplacian_needs_symmetric():
    from mixclust.matrices import toy_graph
    with pytest.raises(ValueError):
        normalized_laplacian(toy_graph())


def test_spectral_power_matches_iteration(rng):
    w = random_symmetric_graph(rng, 25)
    g = SimilarityMatrix.from_dense(w)
    m = MixingOperator(g, 0.8).dense()
    report = eigen_decompose(g)
    for t in (0, 1, 7, 30):
        np.testing.assert_allclose(spectral_power(g, 0.8, t, report),
                                   np.linalg.matrix_power(m, t), atol=1e-10)


def test_ideal_eigenvectors_in_null_space():
    w, lab = cliques([3, 5])
    g = SimilarityMatrix.from_dense(w)
    phi = ideal_eigenvectors(g, lab)
    np.testing.assert_allclose(normalized_laplacian(g) @ phi, 0, atol=1e-14)
    np.testing.assert_allclose(phi.T @ phi, np.eye(2), atol=1e-14)


def test_stopping_time_estimate():
    assert stopping_time_estimate(0.5, 1.0, np.e, 1.0) == pytest.approx(2.0)
    assert stopping_time_estimate(0.0, 1.0, 2.0, 0.1) == np.inf
    assert stopping_time_estimate(1.0, 1.0, 1.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        stopping_time_estimate(1.0, 1.0, 1.0, 0.0)


# ---------------------------------------------------------------- W = W* + E

def test_two_block_split_matches_printed():
    dec = ideal_split(two_block_graph(), TWO_BLOCK_LABELS)
    np.testing.assert_array_equal(dec.W_star.toarray(), TWO_BLOCK_W_STAR)
    np.testing.assert_array_equal(dec.E, TWO_BLOCK_E)
    np.testing.assert_array_equal(dec.W_star.degrees, dec.W.degrees)
    assert dec.k == 2


def test_block_diagonal_split_is_trivial():
    w, lab = cliques([3, 3])
    dec = ideal_split(SimilarityMatrix.from_dense(w), lab)
    np.testing.assert_array_equal(dec.W_star.toarray(), w)
    assert not dec.E.any()
    assert lemma1_check(dec) == 0.0


def test_random_split_sums(rng):
    w = random_symmetric_graph(rng, 20)
    lab = rng.integers(0, 3, 20)
    dec = ideal_split(SimilarityMatrix.from_dense(w), lab)
    np.testing.assert_allclose(dec.W_star.toarray() + dec.E, w, atol=1e-12)
    np.testing.assert_allclose(dec.E.sum(axis=1), 0, atol=1e-12)


def test_lemma1_examples(rng):
    assert lemma1_check(ideal_split(two_block_graph(), TWO_BLOCK_LABELS)) <= 1e-12
    w = random_symmetric_graph(rng, 20)
    assert lemma1_check(ideal_split(SimilarityMatrix.from_dense(w), np.arange(20) % 2)) <= 1e-12


# ---------------------------------------------------------------- bounds

def test_theorem1_two_cliques(rng):
    w, lab = cliques([5, 5])
    g = SimilarityMatrix.from_dense(w)
    for _ in range(20):
        s = theorem1_bound_check(g, lab, simplex_point(rng, 10))
        assert s.holds and len(s) == 51
        assert s.decay_slope() == pytest.approx(np.log(0.25), rel=0.05)


def test_theorem1_connected_block_limit(rng):
    w = random_symmetric_graph(rng, 8)
    g = SimilarityMatrix.from_dense(w)
    x0 = simplex_point(rng, 8)
    s = theorem1_bound_check(g, np.zeros(8, int), x0, alpha=0.5, t_range=[0, 400])
    assert s[1].lhs < 1e-12
    np.testing.assert_allclose(s[1].c, [g.degrees @ x0 / g.degrees.sum()])


def test_theorem1_lhs_matches_direct_power(rng):
    g = toy_ideal_graph()
    x0 = simplex_point(rng, 10)
    s = theorem1_bound_check(g, TOY_BLOCKS, x0, t_range=range(0, 12, 3))
    m = MixingOperator(g).dense()
    for chk in s:
        direct = np.linalg.matrix_power(m, chk.t) @ x0
        chi = np.eye(3)[TOY_BLOCKS]
        assert chk.lhs == pytest.approx(np.linalg.norm(direct - chi @ chk.c), abs=1e-12)


def test_theorem1_hypotheses(rng):
    w, lab = cliques([3, 3])
    g = SimilarityMatrix.from_dense(w)
    with pytest.raises(HypothesisError):
        theorem1_bound_check(g, lab, np.full(6, 0.2))
    with pytest.raises(HypothesisError):
        theorem1_bound_check(g, lab, np.array([0, 0.2, 0.2, 0.2, 0.2, 0.2]))
    with pytest.raises(HypothesisError):
        theorem1_bound_check(two_block_graph(), TWO_BLOCK_LABELS, np.full(6, 1 / 6))


def test_theorem2_two_block_example(rng):
    for _ in range(5):
        s = theorem2_bound_check(two_block_graph(), TWO_BLOCK_LABELS, simplex_point(rng, 6))
        assert s.holds and len(s) == 31
        assert np.all(s.phi_tilde_norms > 0)


def test_theorem2_zero_perturbation_is_theorem1(rng):
    w, lab = cliques([4, 6])
    g = SimilarityMatrix.from_dense(w)
    x0 = simplex_point(rng, 10)
    a = theorem2_bound_check(g, lab, x0, t_range=range(31))
    b = theorem1_bound_check(g, lab, x0, t_range=range(31))
    assert [(c.t, c.lhs, c.rhs) for c in a] == [(c.t, c.lhs, c.rhs) for c in b]
    # the general path agrees to rounding
    gen = theorem2_bound_check(g, lab, x0, t_range=range(31), _general=True)
    for u, v in zip(gen, b):
        assert abs(u.lhs - v.lhs) < 1e-12 and abs(u.rhs - v.rhs) < 1e-12


def test_corollary1_equals_theorem2(rng):
    for seed in range(10):
        g, lab = generate_weakly_coupled(20, seed=seed)
        s = theorem2_bound_check(g, lab, simplex_point(rng, 20))
        assert s.holds
        for chk in s:
            assert corollary1_rhs(s.phi_tilde_norms, s.lambdas, 1.0, chk.t, s.ratio) == \
                pytest.approx(chk.rhs, rel=1e-12)


def test_theorem2_no_gap_reported(rng):
    # three disjoint cliques, two blocks cutting through one: lambda_2 = lambda_3 = 0
    w, _ = cliques([3, 3, 3])
    lab = np.array([0, 0, 0, 0, 1, 1, 1, 1, 1])
    s = theorem2_bound_check(SimilarityMatrix.from_dense(w), lab, np.full(9, 1 / 9))
    assert not s.hypothesis_ok and not s.holds and len(s) == 0


# ---------------------------------------------------------------- NCut reference

def test_ncut_reference_cliques():
    w, lab = cliques([4, 6])
    a = ncut_reference_cluster(SimilarityMatrix.from_dense(w), 2)
    assert exact_recovery(a, lab)


def test_ncut_reference_toy():
    a = ncut_reference_cluster(toy_symmetrized_graph(), 3)
    assert exact_recovery(a, TOY_BLOCKS)


def test_ncut_reference_sbm():
    ok = 0
    for seed in range(50):
        g, lab = generate_sbm(SbmParams(60, 2, 0.5, 0.02, seed))
        ok += exact_recovery(ncut_reference_cluster(g, 2), lab)
    assert ok >= 49


def test_ncut_reference_k1_and_bad_k():
    g = two_block_graph()
    assert ncut_reference_cluster(g, 1).k == 1
    with pytest.raises(ValueError):
        ncut_reference_cluster(g, 0)


def test_oracle_vs_sparse_operator(rng):
    for n in (5, 20, 50):
        g = SimilarityMatrix.from_dense(random_symmetric_graph(rng, n))
        x = rng.random(n)
        m1 = spectral_power(g, 1.0, 1)
        np.testing.assert_allclose(apply_operator(MixingOperator(g), x), m1 @ x, rtol=1e-10)


def test_two_block_weights_are_printed_matrix():
    np.testing.assert_array_equal(two_block_graph().toarray(), TWO_BLOCK_W)

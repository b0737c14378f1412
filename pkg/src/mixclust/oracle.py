"""Dense eigen-oracle for small graphs.

Everything here forms ``n x n`` matrices and is guarded to
``n <= ORACLE_MAX_N``. It exists to check the mixing operator against its
spectral description, to evaluate the ideal/perturbed convergence bounds,
and to provide a recursive Fiedler normalized-cut reference clustering.
None of it is used by the production clustering path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import SimilarityMatrix
from .mixing import MixingOperator

__all__ = [
    "BoundCheck",
    "BoundSeries",
    "ConvergenceError",
    "EigenReport",
    "HypothesisError",
    "IdealDecomposition",
    "ORACLE_MAX_N",
    "OracleSizeError",
    "corollary1_rhs",
    "eigen_decompose",
    "ideal_eigenvectors",
    "ideal_split",
    "jacobi_eigh",
    "lemma1_check",
    "ncut_reference_cluster",
    "normalized_laplacian",
    "spectral_power",
    "stopping_time_estimate",
    "theorem1_bound_check",
    "theorem2_bound_check",
]

ORACLE_MAX_N = 512
RESIDUAL_TOL = 1e-9


class OracleSizeError(ValueError):
    def __init__(self, n: int):
        super().__init__(f"graph has {n} vertices; the dense oracle is limited to {ORACLE_MAX_N}")
        self.n = n


class ConvergenceError(RuntimeError):
    pass


class HypothesisError(ValueError):
    """Inputs violate the assumptions a bound is stated under."""


def _guard(n: int):
    if n > ORACLE_MAX_N:
        raise OracleSizeError(n)


def _labels(partition) -> np.ndarray:
    lab = np.asarray(getattr(partition, "labels", partition)).ravel()
    _, inv = np.unique(lab, return_inverse=True)
    return inv


def _indicators(partition, n: int) -> np.ndarray:
    """Characteristic vectors of the blocks, one column per block."""
    lab = _labels(partition)
    if lab.size != n:
        raise ValueError("partition does not cover every vertex")
    chi = np.zeros((n, lab.max() + 1))
    chi[np.arange(n), lab] = 1.0
    return chi


# ---------------------------------------------------------------- Jacobi

def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every (p, q) once per sweep, n/2 disjoint pairs a round."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        a = np.array(players[: m // 2])
        b = np.array(players[m // 2:][::-1])
        keep = (a < n) & (b < n)
        p, q = np.minimum(a, b)[keep], np.maximum(a, b)[keep]
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, max_sweeps: int = 100, tol: float | None = None):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Rotations are applied in parallel (round-robin) order: every round
    annihilates ``n // 2`` disjoint off-diagonal pairs at once, which
    commute, so a round is a handful of vectorised row/column updates.

    Returns ``(w, v, sweeps)`` with ascending eigenvalues ``w`` and
    eigenvectors in the columns of ``v``. Each eigenvector's largest
    entry (by magnitude, first on ties) is made positive.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix must be exactly symmetric")
    v = np.eye(n)
    fro = np.linalg.norm(a)
    if tol is None:
        tol = n * np.finfo(float).eps
    schedule = _round_robin(n)
    sweeps = 0
    while True:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * fro or n < 2:
            break
        if sweeps == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p, q in schedule:
            apq = a[p, q]
            live = apq != 0.0
            if not live.any():
                continue
            p, q, apq = p[live], q[live], apq[live]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            # hypot keeps huge theta (tiny a_pq) from overflowing
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = a[p].copy(), a[q].copy()
            a[p] = c[:, None] * rp - s[:, None] * rq
            a[q] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
        sweeps += 1
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    big = np.argmax(np.abs(v), axis=0)
    v *= np.where(v[big, np.arange(n)] < 0, -1.0, 1.0)
    return w, v, sweeps


# ---------------------------------------------------------------- spectra

@dataclass(frozen=True)
class EigenReport:
    lambdas: np.ndarray
    phis: np.ndarray
    residual: float
    sweeps: int = 0

    @property
    def n(self) -> int:
        return self.lambdas.size


def normalized_laplacian(graph: SimilarityMatrix) -> np.ndarray:
    """Dense ``I - D^-1/2 W D^-1/2``, exactly symmetric."""
    _guard(graph.n)
    if not graph.symmetric:
        raise ValueError("normalized Laplacian needs a symmetric weight matrix")
    graph.check_positive_degrees()
    s = 1.0 / np.sqrt(graph.degrees)
    lap = np.eye(graph.n) - s[:, None] * graph.toarray() * s[None, :]
    return (lap + lap.T) / 2


def eigen_decompose(graph: SimilarityMatrix, max_sweeps: int = 100) -> EigenReport:
    """Eigenpairs of the normalized Laplacian of ``graph``, ascending."""
    lap = normalized_laplacian(graph)
    w, v, sweeps = jacobi_eigh(lap, max_sweeps=max_sweeps)
    resid = float(np.max(np.linalg.norm(lap @ v - v * w, axis=0))) if w.size else 0.0
    if resid > RESIDUAL_TOL:
        raise ConvergenceError(f"eigen residual {resid:.3g} above {RESIDUAL_TOL}")
    return EigenReport(w, v, resid, sweeps)


def spectral_power(graph: SimilarityMatrix, alpha: float, t: int,
                   report: EigenReport | None = None) -> np.ndarray:
    """``M^t`` rebuilt from the Laplacian spectrum.

    ``M^t = D^-1/2 (sum_i (1 - alpha lambda_i)^t phi_i phi_i^T) D^1/2``.
    """
    report = report or eigen_decompose(graph)
    sq = np.sqrt(graph.degrees)
    mu = (1.0 - alpha * report.lambdas) ** t
    core = (report.phis * mu) @ report.phis.T
    return core / sq[:, None] * sq[None, :]


def ideal_eigenvectors(graph: SimilarityMatrix, partition) -> np.ndarray:
    """Orthonormal ``D^1/2 chi_j / ||D^1/2 chi_j||``, one column per block."""
    chi = _indicators(partition, graph.n)
    phi = np.sqrt(graph.degrees)[:, None] * chi
    return phi / np.linalg.norm(phi, axis=0)


def stopping_time_estimate(lambda_next: float, alpha: float, ratio: float, xi: float) -> float:
    """Smallest ``t`` with ``exp(-alpha t lambda_{k+1}) * ratio <= xi``.

    ``ratio`` is ``max sqrt(d) / min sqrt(d)``. Returns ``inf`` when the
    spectral gap or the step size is zero.
    """
    if not xi > 0:
        raise ValueError("xi must be positive")
    if alpha * lambda_next <= 0:
        return math.inf
    return max(0.0, math.log(ratio / xi) / (alpha * lambda_next))


# ---------------------------------------------------------------- W = W* + E

@dataclass(frozen=True)
class IdealDecomposition:
    W: SimilarityMatrix
    W_star: SimilarityMatrix
    E: np.ndarray
    labels: np.ndarray

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1


def ideal_split(graph: SimilarityMatrix, partition) -> IdealDecomposition:
    """Move every cross-block weight onto the diagonal of its row.

    ``W*`` keeps the in-block entries and gains the row's cross-block sum on
    its diagonal, so it shares ``W``'s degrees; ``E = W - W*`` then has
    zero row sums.
    """
    _guard(graph.n)
    lab = _labels(partition)
    if lab.size != graph.n:
        raise ValueError("partition does not cover every vertex")
    w = graph.toarray()
    same = lab[:, None] == lab[None, :]
    star = np.where(same, w, 0.0)
    cross = np.where(same, 0.0, w)
    star[np.diag_indices_from(star)] += cross.sum(axis=1)
    e = cross.copy()
    e[np.diag_indices_from(e)] = -cross.sum(axis=1)
    w_star = SimilarityMatrix.from_dense(star, symmetric=graph.symmetric, loops=True)
    return IdealDecomposition(graph, w_star, e, lab)


def lemma1_check(decomp: IdealDecomposition) -> float:
    """Max entrywise ``|L - (L* - D^-1/2 E D^-1/2)|`` with the shared ``D``."""
    d = decomp.W.degrees
    s = 1.0 / np.sqrt(d)
    n = d.size
    lap = np.eye(n) - s[:, None] * decomp.W.toarray() * s[None, :]
    lap_star = np.eye(n) - s[:, None] * decomp.W_star.toarray() * s[None, :]
    pert = s[:, None] * decomp.E * s[None, :]
    return float(np.max(np.abs(lap - (lap_star - pert)))) if n else 0.0


# ---------------------------------------------------------------- bounds

@dataclass(frozen=True)
class BoundCheck:
    t: int
    lhs: float
    rhs: float
    c: np.ndarray

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


@dataclass
class BoundSeries:
    """Per-``t`` bound evaluations plus the quantities the bound is built from."""

    checks: list[BoundCheck]
    k: int
    rate: float
    ratio: float
    lambdas: np.ndarray
    phi_tilde_norms: np.ndarray | None = None
    hypothesis_ok: bool = True
    note: str = ""
    extra: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self):
        return len(self.checks)

    def __getitem__(self, i):
        return self.checks[i]

    @property
    def holds(self) -> bool:
        return self.hypothesis_ok and all(c.holds for c in self.checks)

    def decay_slope(self, t_lo: int = 20, t_hi: int = 50) -> float:
        """Least-squares slope of ``log lhs`` against ``t`` on ``[t_lo, t_hi]``."""
        pts = [(c.t, c.lhs) for c in self.checks if t_lo <= c.t <= t_hi and c.lhs > 0]
        if len(pts) < 2:
            raise ValueError("not enough positive lhs values to fit a slope")
        t, v = np.array(pts).T
        return float(np.polyfit(t, np.log(v), 1)[0])


def _check_x0(x0, n: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have length {n}")
    if np.any(x0 <= 0) or abs(x0.sum() - 1.0) > 1e-12:
        raise HypothesisError("x0 must be entrywise positive and sum to 1")
    return x0


def _t_values(t_range) -> list[int]:
    ts = sorted(int(t) for t in t_range)
    if not ts or ts[0] < 0:
        raise ValueError("t_range must be non-empty and non-negative")
    return ts


def theorem1_bound_check(W_star: SimilarityMatrix, partition, x0, alpha: float = 1.0,
                         t_range=range(51)) -> BoundSeries:
    """Ideal-case bound ``||M*^t x0 - sum c_i chi_i|| <= max_{i>k}|1 - alpha lambda_i|^t * r``.

    ``r = max sqrt(d) / min sqrt(d)`` and ``c_i = chi_i^T D x0 / 1^T D chi_i``.

    The left side is carried as its own iterate ``r_{t+1} = M* r_t`` and
    re-projected onto the ``D``-orthogonal complement of the block
    indicators after every step. In exact arithmetic the projection is a
    no-op (that complement is invariant under ``M*``); in floating point
    it stops rounding from seeding the non-decaying modes, so the measured
    decay stays accurate far below machine epsilon.
    """
    _guard(W_star.n)
    n = W_star.n
    x0 = _check_x0(x0, n)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    chi = _indicators(partition, n)
    w = W_star.toarray()
    lab = _labels(partition)
    if np.any(w[lab[:, None] != lab[None, :]] != 0):
        raise HypothesisError("W_star is not block-diagonal for this partition")
    report = eigen_decompose(W_star)
    return _ideal_series(W_star, chi, x0, alpha, _t_values(t_range), report)


def _ideal_series(graph, chi, x0, alpha, ts, report) -> BoundSeries:
    d = graph.degrees
    k = chi.shape[1]
    lam = report.lambdas
    rate = float(np.max(np.abs(1.0 - alpha * lam[k:]))) if lam.size > k else 0.0
    ratio = float(np.sqrt(d.max()) / np.sqrt(d.min()))
    vol = chi.T @ d
    c = (chi.T @ (d * x0)) / vol
    m = MixingOperator(graph, alpha).dense()
    r = x0 - chi @ c
    checks = []
    t = 0
    for target in ts:
        while t < target:
            r = m @ r
            r -= chi @ ((chi.T @ (d * r)) / vol)
            t += 1
        checks.append(BoundCheck(t, float(np.linalg.norm(r)), rate**t * ratio, c))
    return BoundSeries(checks, k, rate, ratio, lam)


def _procrustes_gauge(phi: np.ndarray, phi_star: np.ndarray) -> np.ndarray:
    """Orthogonal ``R`` minimising ``||phi - phi_star R||_F``."""
    u, _, vt = np.linalg.svd(phi_star.T @ phi)
    return u @ vt


def theorem2_bound_check(W: SimilarityMatrix, partition, x0, alpha: float = 1.0,
                         t_range=range(31), *, gap_tol: float = 1e-8,
                         _general: bool = False) -> BoundSeries:
    """Perturbed-case bound for ``W = W* + E``.

    ``lhs = ||M^t x0 - sum_i (1 - alpha lambda_i)^t c_i chi_i||`` and
    ``rhs = (sum_{i<=k} 2||phi~_i|| + ||phi~_i||^2 + max_{l>k}|1 - alpha lambda_l|^t) * r``
    with ``phi~_i = phi_i - phi*_i``. The ideal eigenvectors span a
    degenerate eigenspace, so the ideal basis is first rotated onto the
    computed one (orthogonal Procrustes, ``Phi* -> Phi* R``); that gauge
    minimises the ``phi~`` terms.

    The ideal part of ``M^t x0`` is ``D^-1/2 sum_i mu_i^t phi*_i phi*_i^T D^1/2 x0``
    in whichever basis ``phi*`` is written, which is a combination of the
    block indicators with coefficients
    ``c(t) = V^-1/2 R diag(mu^t) R^T V^1/2 c0`` (``V`` the block volumes,
    ``c0_i = chi_i^T D x0 / 1^T D chi_i``). For a pure sign gauge this is
    ``c_i = mu_i^t c0_i``; a genuine rotation mixes the blocks.

    When ``E`` is exactly zero the perturbed and ideal problems coincide
    and the ideal-case check is returned as is. If the first ``k``
    eigenvalues are not separated from the rest by ``gap_tol`` the series
    comes back empty with ``hypothesis_ok=False``.
    """
    _guard(W.n)
    n = W.n
    x0 = _check_x0(x0, n)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    ts = _t_values(t_range)
    decomp = ideal_split(W, partition)
    chi = _indicators(partition, n)
    k = chi.shape[1]
    report = eigen_decompose(W)
    lam = report.lambdas
    if not _general and not decomp.E.any():
        series = _ideal_series(W, chi, x0, alpha, ts, report)
        series.phi_tilde_norms = np.zeros(k)
        return series
    if lam.size > k and lam[k] - lam[k - 1] <= gap_tol:
        return BoundSeries([], k, np.nan, np.nan, lam, hypothesis_ok=False,
                           note=f"lambda_{k + 1} - lambda_{k} = {lam[k] - lam[k - 1]:.3g} "
                                "is not a spectral gap")
    d = W.degrees
    phi = report.phis[:, :k]
    basis = ideal_eigenvectors(W, partition)
    rot = _procrustes_gauge(phi, basis)
    f = np.linalg.norm(phi - basis @ rot, axis=0)
    pert = float(np.sum(2 * f + f**2))
    rate = float(np.max(np.abs(1.0 - alpha * lam[k:]))) if lam.size > k else 0.0
    ratio = float(np.sqrt(d.max()) / np.sqrt(d.min()))
    vol = chi.T @ d
    c0 = (chi.T @ (d * x0)) / vol
    mu = 1.0 - alpha * lam[:k]
    sv = np.sqrt(vol)
    m = MixingOperator(W, alpha).dense()
    x = x0.copy()
    checks = []
    t = 0
    for target in ts:
        while t < target:
            x = m @ x
            t += 1
        c = (rot * mu**t) @ (rot.T @ (sv * c0)) / sv
        checks.append(BoundCheck(t, float(np.linalg.norm(x - chi @ c)),
                                 (pert + rate**t) * ratio, c))
    return BoundSeries(checks, k, rate, ratio, lam, phi_tilde_norms=f,
                       extra={"perturbation_term": pert, "gauge": rot})


def corollary1_rhs(phi_tilde_norms, lambdas, alpha: float, t: int, ratio: float) -> float:
    """The two-cluster bound written out term by term."""
    f1, f2 = phi_tilde_norms
    lam = np.asarray(lambdas)
    tail = np.max(np.abs(1.0 - alpha * lam[2:]))
    return float(((2 * f1 + f1 * f1) + (2 * f2 + f2 * f2) + tail**t) * ratio)


# ---------------------------------------------------------------- NCut reference

def _best_fiedler_cut(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Boolean mask of one side of the best sweep cut, and its 2-way NCut."""
    n = w.shape[0]
    ncomp, comp = connected_components(w != 0, directed=False)
    if ncomp > 1:
        # already disconnected: peel off the component of vertex 0
        return comp == comp[0], 0.0
    g = SimilarityMatrix.from_dense(w, loops=True)
    report = eigen_decompose(g)
    y = report.phis[:, 1] / np.sqrt(g.degrees)
    order = np.argsort(y, kind="stable")
    wp = w[order][:, order]
    d = g.degrees[order]
    vol_s = np.cumsum(d)[:-1]
    vol = d.sum()
    inner = np.cumsum(np.tril(wp, -1).sum(axis=1))[:-1]
    # cut(S, rest) = vol(S) - 2 * (weight of pairs inside S) - diagonal of S
    diag = np.cumsum(np.diag(wp))[:-1]
    cut = vol_s - 2 * inner - diag
    score = cut / vol_s + cut / (vol - vol_s)
    m = int(np.argmin(score))
    mask = np.zeros(n, dtype=bool)
    mask[order[: m + 1]] = True
    return mask, float(score[m])


def ncut_reference_cluster(graph: SimilarityMatrix, k: int):
    """Recursive Fiedler bi-partitioning into ``k`` clusters.

    Each cluster's best split is found by sweeping thresholds along the
    second eigenvector of its normalized Laplacian (mapped back through
    ``D^-1/2``) and keeping the threshold with the smallest 2-way NCut.
    The cluster whose best split is cheapest is split next, until there
    are ``k``. Disconnected clusters are split along components first.
    """
    from .rard import ClusterAssignment

    _guard(graph.n)
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    w = graph.toarray()

    def entry(idx):
        cut = _best_fiedler_cut(w[np.ix_(idx, idx)]) if idx.size > 1 else (None, np.inf)
        return idx, cut

    clusters = [entry(np.arange(n))]
    while len(clusters) < k:
        ci = min(range(len(clusters)), key=lambda i: clusters[i][1][1])
        idx, (mask, _) = clusters.pop(ci)
        clusters += [entry(idx[mask]), entry(idx[~mask])]
    clusters = [idx for idx, _ in clusters]
    clusters.sort(key=lambda c: c[0])
    labels = np.empty(n, dtype=np.int64)
    for c, idx in enumerate(clusters):
        labels[idx] = c
    return ClusterAssignment(labels)

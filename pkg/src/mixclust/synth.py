"""Synthetic inputs: stochastic block models and 2-D point datasets.

Every generator is a pure function of its arguments and seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import DegenerateGraphError, PointSet, SimilarityMatrix

__all__ = [
    "GaussianMixtureSpec",
    "SbmParams",
    "block_sizes",
    "generate_concentric_rings",
    "generate_gaussian_mixture",
    "generate_half_ellipses",
    "generate_sbm",
    "generate_two_crescents",
    "generate_weakly_coupled",
    "DEFAULT_SIGMA",
]

# RBF widths used with each dataset in the original experiments
DEFAULT_SIGMA = {"gauss5": 0.5, "aggregation": 1.0, "crescents": 1.5, "ellipses": 2.5}


@dataclass(frozen=True)
class SbmParams:
    n: int
    k: int
    p: float
    q: float
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ValueError("need 1 <= k <= n")
        if not 0.0 <= self.q < self.p <= 1.0:
            raise ValueError("need 0 <= q < p <= 1")


def block_sizes(n: int, k: int) -> np.ndarray:
    """Equal blocks; the first ``n mod k`` get one extra vertex."""
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    return sizes


def _sample_pairs(rng, total: int, prob: float) -> np.ndarray:
    m = rng.binomial(total, prob)
    if m == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(total, size=m, replace=False)


def _sbm_edges(sizes, p, q, rng):
    starts = np.concatenate([[0], np.cumsum(sizes)])
    rows, cols = [], []
    k = len(sizes)
    for a in range(k):
        na = int(sizes[a])
        # within block: linear index over the strict upper triangle
        lin = _sample_pairs(rng, na * (na - 1) // 2, p)
        if lin.size:
            i, j = _triu_unrank(lin, na)
            rows.append(i + starts[a])
            cols.append(j + starts[a])
        for b in range(a + 1, k):
            nb = int(sizes[b])
            lin = _sample_pairs(rng, na * nb, q)
            if lin.size:
                rows.append(lin // nb + starts[a])
                cols.append(lin % nb + starts[b])
    if not rows:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(rows), np.concatenate(cols)


def _triu_unrank(lin: np.ndarray, n: int):
    """Map row-major linear indices over pairs i < j back to (i, j)."""
    r = np.arange(n, dtype=np.int64)
    row_start = r * n - r * (r + 1) // 2
    i = np.searchsorted(row_start, lin, side="right") - 1
    j = lin - row_start[i] + i + 1
    return i, j


def generate_sbm(params: SbmParams) -> tuple[SimilarityMatrix, np.ndarray]:
    """Unweighted SBM graph and its planted block labels.

    A draw with an isolated vertex is thrown away and redrawn once.
    """
    sizes = block_sizes(params.n, params.k)
    labels = np.repeat(np.arange(params.k), sizes)
    rng = np.random.default_rng(params.seed)
    for attempt in range(2):
        r, c = _sbm_edges(sizes, params.p, params.q, rng)
        w = sp.coo_array((np.ones(2 * r.size), (np.concatenate([r, c]), np.concatenate([c, r]))),
                         shape=(params.n, params.n)).tocsr()
        g = SimilarityMatrix(w)
        iso = g.isolated()
        if not iso.size:
            return g, labels
    raise DegenerateGraphError(iso)


_GAUSS5_MEANS = np.array([[-5.0, -5.0], [0.0, 0.0], [6.0, -6.0], [-6.0, 6.0], [5.0, 5.0]])
_GAUSS5_COVS = np.array([
    [[0.5, 0.0], [0.0, 0.5]],
    [[3.5, 0.0], [0.0, 3.5]],
    [[2.0, 0.0], [0.0, 2.0]],
    [[1.0, 0.0], [0.0, 1.0]],
    [[1.0, -0.5], [-0.5, 1.5]],
])
_GAUSS5_COUNTS = (100, 1000, 300, 200, 400)


@dataclass(frozen=True)
class GaussianMixtureSpec:
    means: np.ndarray = field(default_factory=lambda: _GAUSS5_MEANS.copy())
    covariances: np.ndarray = field(default_factory=lambda: _GAUSS5_COVS.copy())
    counts: tuple = _GAUSS5_COUNTS
    seed: int = 0


def generate_gaussian_mixture(spec: GaussianMixtureSpec = GaussianMixtureSpec()) -> PointSet:
    means = np.asarray(spec.means, dtype=float)
    covs = np.asarray(spec.covariances, dtype=float)
    counts = np.asarray(spec.counts, dtype=np.int64)
    if not (len(means) == len(covs) == len(counts)):
        raise ValueError("means, covariances and counts must have equal length")
    if np.any(counts <= 0):
        raise ValueError("counts must be positive")
    rng = np.random.default_rng(spec.seed)
    pts = []
    for mu, cov, m in zip(means, covs, counts):
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None
        pts.append(mu + rng.standard_normal((m, len(mu))) @ chol.T)
    labels = np.repeat(np.arange(len(counts)), counts)
    return PointSet(np.vstack(pts), labels)


def _halves(n_total: int) -> int:
    if n_total < 4 or n_total % 2:
        raise ValueError("n_total must be an even integer >= 4")
    return n_total // 2


def generate_two_crescents(n_total: int = 384, seed: int = 0, jitter: float = 0.1) -> PointSet:
    """Two interlocking half-annuli.

    The upper crescent is the unit upper half circle; the lower one is its
    point reflection shifted by (1, 0.5). Radii are jittered uniformly by
    up to ``jitter``.
    """
    m = _halves(n_total)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, np.pi, size=(2, m))
    r = 1.0 + rng.uniform(-jitter, jitter, size=(2, m))
    upper = np.column_stack([r[0] * np.cos(theta[0]), r[0] * np.sin(theta[0])])
    lower = np.column_stack([1.0 - r[1] * np.cos(theta[1]), 0.5 - r[1] * np.sin(theta[1])])
    return PointSet(np.vstack([upper, lower]), np.repeat([0, 1], m))


def generate_half_ellipses(n_total: int = 2000, seed: int = 0, axes=(4.0, 2.0),
                           separation: float = 1.0, jitter: float = 0.1) -> PointSet:
    """An upper half ellipse and its mirror image ``separation`` below it.

    Points are jittered radially by up to ``jitter`` (relative), so the
    horizontal line ``y = -separation / 2`` separates the two labels.
    """
    m = _halves(n_total)
    if not separation > 0:
        raise ValueError("separation must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, np.pi, size=(2, m))
    s = 1.0 + rng.uniform(-jitter, jitter, size=(2, m))
    a, b = axes
    upper = np.column_stack([a * s[0] * np.cos(theta[0]), b * s[0] * np.sin(theta[0])])
    lower = np.column_stack([a * s[1] * np.cos(theta[1]), -b * s[1] * np.sin(theta[1]) - separation])
    return PointSet(np.vstack([upper, lower]), np.repeat([0, 1], m))


def generate_concentric_rings(n_per_ring: int = 200, radii=(1.0, 2.0), seed: int = 0,
                              jitter: float = 0.05) -> PointSet:
    """Concentric noisy circles with evenly spaced (randomly rotated) angles."""
    rng = np.random.default_rng(seed)
    pts = []
    for r in radii:
        theta = rng.uniform(0, 2 * np.pi) + np.linspace(0, 2 * np.pi, n_per_ring, endpoint=False)
        rad = r + rng.uniform(-jitter, jitter, n_per_ring)
        pts.append(np.column_stack([rad * np.cos(theta), rad * np.sin(theta)]))
    return PointSet(np.vstack(pts), np.repeat(np.arange(len(radii)), n_per_ring))


def generate_weakly_coupled(n: int, coupling: float = 0.05, seed: int = 0,
                            density: float = 0.2) -> tuple[SimilarityMatrix, np.ndarray]:
    """Two dense weighted blocks joined by a few weak edges.

    Block sizes are drawn from ``[2, n - 2]``, in-block weights are
    uniform on ``[0.5, 1.5)`` (complete blocks), and each possible cross
    pair is present with probability ``density``. Cross weights are scaled
    so that every vertex's cross-block degree is at most ``coupling``
    times its in-block degree.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    if not 0 < coupling:
        raise ValueError("coupling must be positive")
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, n - 1))
    labels = np.repeat([0, 1], [m, n - m])
    same = labels[:, None] == labels[None, :]
    w = np.triu(rng.uniform(0.5, 1.5, (n, n)), 1)
    w = w + w.T
    inner = np.where(same, w, 0.0)
    np.fill_diagonal(inner, 0.0)
    cross = np.triu(np.where(~same & (rng.random((n, n)) < density), w, 0.0), 1)
    if not cross.any():
        cross[0, n - 1] = 1.0
    cross = cross + cross.T
    d_in, d_out = inner.sum(axis=1), cross.sum(axis=1)
    has = d_out > 0
    scale = coupling * np.min(d_in[has] / d_out[has]) * rng.uniform(0.2, 1.0)
    return SimilarityMatrix.from_dense(inner + scale * cross), labels

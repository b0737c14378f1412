"""Recursive gap-based bi-partitioning driven by the mixing process.

:func:`rard_cluster` is the production routine: every recursive call draws
fresh agents, mixes them until the step length stops changing by more than
a tolerance, and splits the vertex set at the widest gap of the sorted
agents. When no gap shows up the tolerance is halved and mixing carries on
along the same trajectory; the vertex set becomes a cluster once the
tolerance floor or the iteration cap is reached.

:func:`rard_cluster_theoretical` swaps the stopping rule for the spectral
one (needs the dense eigen-oracle) and :func:`prd_cluster` mixes the point
coordinates themselves before running k-means.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .graph import PointSet, SimilarityMatrix, extract_subgraph
from .mixing import (DEFAULT_T_MAX, InitSpec, MixingOperator, MixingState,
                     init_agents, run_until_tolerance)

__all__ = [
    "ClusterAssignment",
    "ClusterNode",
    "ClusterTree",
    "GapReport",
    "RardConfig",
    "find_gap",
    "kmeans",
    "prd_cluster",
    "rard_cluster",
    "rard_cluster_theoretical",
]

# init(global_indices, path) -> starting agents for that call
AgentInit = Callable[[np.ndarray, tuple], np.ndarray]


@dataclass(frozen=True)
class RardConfig:
    eps0: float = 1e-3
    eps_min: float | None = None
    t_max: int = DEFAULT_T_MAX
    b: float = 1.0
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if self.eps_min is None:
            object.__setattr__(self, "eps_min", self.eps0 / 2**10)
        if not 0 < self.eps_min <= self.eps0:
            raise ValueError("need 0 < eps_min <= eps0")
        if self.t_max < 2:
            raise ValueError("t_max must be at least 2")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class GapReport:
    sorted_x: np.ndarray
    order: np.ndarray
    gaps: np.ndarray
    threshold: float
    argmax: int | None

    @property
    def found(self) -> bool:
        return self.argmax is not None

    @property
    def width(self) -> float:
        return float(self.gaps[self.argmax]) if self.found else 0.0


def find_gap(x, b: float) -> GapReport:
    """Widest gap between consecutive sorted agents, if it clears ``b / 2n``.

    ``n`` is ``len(x)``. Gaps under the threshold count as zero; ties for
    the widest gap go to the smallest sorted position.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    order = np.argsort(x, kind="stable")
    sx = x[order]
    if n < 2:
        return GapReport(sx, order, np.zeros(0), np.inf, None)
    threshold = b / (2.0 * n)
    diffs = np.diff(sx)
    gaps = np.where(diffs >= threshold, diffs, 0.0)
    argmax = int(np.argmax(gaps)) if gaps.max() > 0 else None
    return GapReport(sx, order, gaps, threshold, argmax)


@dataclass
class ClusterNode:
    """One recursive call. Leaves have no children.

    ``kind`` is ``"split"`` for a gap split, ``"isolated"`` when vertices
    with no edge inside the call were peeled off as singletons, and
    ``"leaf"`` otherwise. ``t`` counts the mixing steps taken in the call.
    """

    indices: np.ndarray
    kind: str = "leaf"
    children: list["ClusterNode"] = field(default_factory=list)
    gap: float | None = None
    eps: float | None = None
    t: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> dict:
        d = {"gap": self.gap, "eps": self.eps, "t": self.t}
        if self.is_leaf:
            d["indices"] = [int(i) for i in self.indices]
        else:
            d["kind"] = self.kind
            d["children"] = [c.to_dict() for c in self.children]
        return d


@dataclass
class ClusterTree:
    root: ClusterNode
    n: int

    def nodes(self) -> Iterator[ClusterNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list[ClusterNode]:
        return [nd for nd in self.nodes() if nd.is_leaf]

    @property
    def total_iterations(self) -> int:
        return sum(nd.t for nd in self.nodes())

    def splits(self) -> list[tuple[np.ndarray, ...]]:
        """Child index sets of every internal node, in depth-first order."""
        return [tuple(c.indices for c in nd.children) for nd in self.nodes() if not nd.is_leaf]

    def to_json(self, **kw) -> str:
        return json.dumps(self.root.to_dict(), **kw)

    def validate(self) -> None:
        """Raise if leaves do not partition ``range(n)`` or a split loses vertices."""
        for nd in self.nodes():
            if nd.children:
                kids = np.sort(np.concatenate([c.indices for c in nd.children]))
                if not np.array_equal(kids, np.sort(nd.indices)):
                    raise AssertionError("children do not partition their parent")
        allv = np.sort(np.concatenate([lf.indices for lf in self.leaves()]))
        if not np.array_equal(allv, np.arange(self.n)):
            raise AssertionError("leaves do not partition the vertex set")


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", lab)
        if lab.size and (lab.min() < 0 or np.unique(lab).size != lab.max() + 1):
            raise ValueError("labels must cover 0..k-1 with no empty cluster")

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def n(self) -> int:
        return self.labels.size

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == c) for c in range(self.k)]

    @classmethod
    def from_leaves(cls, leaves, n: int) -> "ClusterAssignment":
        labels = np.full(n, -1, dtype=np.int64)
        for c, leaf in enumerate(leaves):
            idx = getattr(leaf, "indices", leaf)
            labels[np.asarray(idx, dtype=np.int64)] = c
        if np.any(labels < 0):
            raise ValueError("leaves do not cover every vertex")
        return cls(labels)


def _default_init(cfg: RardConfig) -> AgentInit:
    def init(idx: np.ndarray, path: tuple) -> np.ndarray:
        seq = np.random.SeedSequence(cfg.seed, spawn_key=path)
        return init_agents(idx.size, InitSpec(cfg.b, seq)).x
    return init


def _recurse(graph: SimilarityMatrix, cfg: RardConfig, call) -> ClusterTree:
    """Shared driver for both RARD variants.

    ``call(subgraph, idx, path)`` mixes one subproblem and returns
    ``(GapReport | None, eps, t)``. The recursion is unrolled onto an
    explicit stack; children get paths ``path + (0,)`` / ``path + (1,)`` and
    the lower side of the gap is explored first.
    """
    root = ClusterNode(np.arange(graph.n))
    stack = [(root, ())]
    while stack:
        node, path = stack.pop()
        idx = node.indices
        if idx.size == 1:
            continue
        sub, iso = (graph, graph.isolated()) if idx.size == graph.n else extract_subgraph(graph, idx)
        if iso.size:
            node.kind = "isolated"
            node.children = [ClusterNode(idx[[i]]) for i in iso]
            rest = np.delete(idx, iso)
            if rest.size:
                child = ClusterNode(rest)
                node.children.append(child)
                stack.append((child, path + (len(iso),)))
            continue
        report, eps, t = call(sub, idx, path)
        node.eps, node.t = eps, t
        if report is None or not report.found:
            continue
        cut = report.argmax + 1
        lo = np.sort(idx[report.order[:cut]])
        hi = np.sort(idx[report.order[cut:]])
        node.kind, node.gap = "split", report.width
        node.children = [ClusterNode(lo), ClusterNode(hi)]
        stack.append((node.children[1], path + (1,)))
        stack.append((node.children[0], path + (0,)))
    tree = ClusterTree(root, graph.n)
    return tree


def rard_cluster(graph: SimilarityMatrix, cfg: RardConfig = RardConfig(),
                 init: AgentInit | None = None,
                 trace: list | None = None) -> tuple[ClusterTree, ClusterAssignment]:
    """Cluster a graph by recursive mixing and gap splitting.

    Parameters
    ----------
    graph : SimilarityMatrix
        Weights with positive degrees. Vertices that lose all their edges
        inside a recursive call become singleton clusters.
    cfg : RardConfig
        Tolerances, iteration cap, agent interval ``[0, b)``, step size and
        seed. The step-change tolerance is applied as ``eps * b`` so that
        rescaling ``b`` leaves the split sequence unchanged.
    init : callable, optional
        ``init(global_indices, path)`` returning the starting agents of a
        call. Defaults to uniform draws seeded by ``(cfg.seed, path)``, so
        the result does not depend on the order calls are evaluated in.

    trace : list, optional
        Receives ``(path, t, y_t, |y_t - y_{t-1}|)`` for every mixing step
        of every call; ``path`` is the call's position in the tree as a
        tuple of child indices.

    Returns
    -------
    tree : ClusterTree
    assignment : ClusterAssignment
        Labels numbered in depth-first leaf order.
    """
    init = init or _default_init(cfg)

    def call(sub, idx, path):
        op = MixingOperator(sub, cfg.alpha)
        state = MixingState(np.array(init(idx, path), dtype=float))
        steps = [] if trace is not None else None
        eps = cfg.eps0
        while True:
            # the tolerance is relative to b, like the gap threshold
            state, _ = run_until_tolerance(op, state, eps * cfg.b, cfg.t_max, steps)
            report = find_gap(state.x, cfg.b)
            if report.found or eps <= cfg.eps_min or state.t >= cfg.t_max:
                if steps is not None:
                    trace.extend((path,) + s for s in steps)
                return report, eps, state.t
            eps /= 2.0

    tree = _recurse(graph, cfg, call)
    return tree, ClusterAssignment.from_leaves(tree.leaves(), graph.n)


def rard_cluster_theoretical(graph: SimilarityMatrix, eps: float, k_hint: int,
                             cfg: RardConfig = RardConfig(),
                             init: AgentInit | None = None) -> ClusterAssignment:
    """RARD with the spectral stopping rule ``|1 - alpha lambda_{k+1}|^t <= eps``.

    Eigenvalues come from the dense oracle for every subproblem, so this is
    limited to small graphs and only meant for comparing stopping rules.
    """
    from .oracle import ORACLE_MAX_N, OracleSizeError, eigen_decompose

    if graph.n > ORACLE_MAX_N:
        raise OracleSizeError(graph.n)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if k_hint < 1:
        raise ValueError("k_hint must be positive")
    init = init or _default_init(cfg)

    def call(sub, idx, path):
        lam = eigen_decompose(sub).lambdas
        k = min(k_hint, sub.n - 1)
        rate = abs(1.0 - cfg.alpha * lam[k])
        op = MixingOperator(sub, cfg.alpha)
        x = np.array(init(idx, path), dtype=float)
        buf = np.empty_like(x)
        t = 0
        while True:
            op.step_into(x, buf)
            x, buf = buf, x
            t += 1
            if rate**t <= eps or t >= cfg.t_max:
                break
        return find_gap(x, cfg.b), eps, t

    tree = _recurse(graph, cfg, call)
    return ClusterAssignment.from_leaves(tree.leaves(), graph.n)


def kmeans(data, k: int, seed=0, restarts: int = 10, max_iter: int = 100):
    """Lloyd's algorithm with k-means++ seeding; best of ``restarts`` runs.

    A cluster that empties out is re-seeded at the point farthest from its
    current centre. Returns ``(labels, centres, inertia)``.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        centres = _kmeanspp(x, k, rng)
        labels = np.zeros(n, dtype=np.int64)
        for _ in range(max_iter):
            d2 = ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
            new = d2.argmin(axis=1)
            counts = np.bincount(new, minlength=k)
            while np.any(counts == 0):
                c = int(np.flatnonzero(counts == 0)[0])
                far = int(d2[np.arange(n), new].argmax())
                new[far] = c
                d2[far] = 0.0
                counts = np.bincount(new, minlength=k)
            moved = not np.array_equal(new, labels)
            labels = new
            for c in range(k):
                centres[c] = x[labels == c].mean(axis=0)
            if not moved:
                break
        inertia = float(((x - centres[labels]) ** 2).sum())
        if best is None or inertia < best[2]:
            best = (labels.copy(), centres.copy(), inertia)
    return best


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centres = np.empty((k, x.shape[1]))
    centres[0] = x[rng.integers(n)]
    d2 = ((x - centres[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        # all points coincide with chosen centres: fall back to the farthest
        i = int(rng.choice(n, p=d2 / total)) if total > 0 else int(d2.argmax())
        centres[c] = x[i]
        d2 = np.minimum(d2, ((x - centres[c]) ** 2).sum(axis=1))
    return centres


def prd_cluster(points, graph: SimilarityMatrix, k: int,
                cfg: RardConfig = RardConfig()) -> ClusterAssignment:
    """Mix the point coordinates through the graph, then k-means the rows."""
    v = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != graph.n:
        raise ValueError("points and graph disagree on n")
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return ClusterAssignment(np.zeros(graph.n, dtype=np.int64))
    op = MixingOperator(graph, cfg.alpha)
    cols = [np.ascontiguousarray(v[:, j], dtype=float) for j in range(v.shape[1])]
    bufs = [np.empty_like(c) for c in cols]
    y_prev = None
    for _ in range(cfg.t_max):
        sq = 0.0
        for j in range(len(cols)):
            sq += op.step_into(cols[j], bufs[j]) ** 2
        cols, bufs = bufs, cols
        y = float(np.sqrt(sq))
        if y_prev is not None and abs(y - y_prev) <= cfg.eps0:
            break
        y_prev = y
    labels, _, _ = kmeans(np.stack(cols, axis=1), k, seed=cfg.seed)
    # relabel by first appearance so the output is canonical
    _, first = np.unique(labels, return_index=True)
    remap = np.empty(k, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(k)
    return ClusterAssignment(remap[labels])

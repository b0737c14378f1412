"""Similarity graph construction and ingestion.

All graphs are held as :class:`SimilarityMatrix`, a thin wrapper around a
``scipy.sparse.csr_array`` with the degree vector cached.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DegenerateGraphError",
    "GraphConfig",
    "PointSet",
    "SimilarityMatrix",
    "build_epsilon_graph",
    "build_gaussian_graph",
    "build_graph",
    "build_pnn_graph",
    "extract_subgraph",
    "load_edge_list",
    "load_points_csv",
    "pairwise_sq_distances",
    "write_edge_list",
]

# rows per block in the brute-force distance sweep
_BLOCK = 512
# up to this dimension distances are summed coordinate-wise (exact ties)
_DIRECT_DIM = 16


class DegenerateGraphError(ValueError):
    """A vertex ended up with zero degree."""

    def __init__(self, vertices):
        self.vertices = [int(v) for v in np.atleast_1d(vertices)]
        head = ", ".join(str(v) for v in self.vertices[:10])
        more = "" if len(self.vertices) <= 10 else f" (+{len(self.vertices) - 10} more)"
        super().__init__(f"zero-degree vertex: {head}{more}")


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must have one entry per point")
            if not np.issubdtype(lab.dtype, np.integer):
                if not np.all(lab == np.round(lab)):
                    raise ValueError("labels must be integers")
                lab = lab.astype(np.int64)
            if lab.min() < 0:
                raise ValueError("labels must be non-negative")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GraphConfig:
    kind: str = "pnn"
    sigma: float | None = None
    delta: float = np.inf
    p: int | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "pnn", "epsilon"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.kind == "gaussian" and not (self.sigma and self.sigma > 0):
            raise ValueError("gaussian graph needs sigma > 0")
        if self.kind == "gaussian" and not self.delta >= 0:
            raise ValueError("delta must be non-negative")
        if self.kind == "pnn" and not (self.p and self.p >= 1):
            raise ValueError("p-nearest-neighbour graph needs p >= 1")
        if self.kind == "epsilon" and not (self.epsilon and self.epsilon > 0):
            raise ValueError("epsilon graph needs epsilon > 0")


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Sparse non-negative weight matrix with cached degrees.

    ``symmetric=False`` is reserved for matrices that are already row
    normalised (e.g. the printed toy transition matrix); everything built
    from points or edge lists is symmetric. ``loops=True`` admits diagonal
    weight, which only the ideal part of a block decomposition carries.
    """

    weights: sp.csr_array
    degrees: np.ndarray = field(init=False)
    symmetric: bool = True
    loops: bool = False

    def __post_init__(self):
        w = sp.csr_array(self.weights, dtype=float)
        w.sum_duplicates()
        w.eliminate_zeros()
        w.sort_indices()
        if w.shape[0] != w.shape[1]:
            raise ValueError("similarity matrix must be square")
        if w.nnz and w.data.min() < 0:
            raise ValueError("negative weight")
        if not self.loops and w.diagonal().any():
            raise ValueError("similarity matrix must have a zero diagonal")
        if self.symmetric and (w != w.T).nnz:
            raise ValueError("similarity matrix is not symmetric")
        object.__setattr__(self, "weights", w)
        deg = np.asarray(w.sum(axis=1)).ravel()
        deg.flags.writeable = False
        object.__setattr__(self, "degrees", deg)

    @classmethod
    def _trusted(cls, w: sp.csr_array, symmetric: bool, loops: bool) -> "SimilarityMatrix":
        """Wrap a canonical CSR array already known to satisfy the invariants."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "weights", w)
        object.__setattr__(obj, "symmetric", symmetric)
        object.__setattr__(obj, "loops", loops)
        deg = np.asarray(w.sum(axis=1)).ravel()
        deg.flags.writeable = False
        object.__setattr__(obj, "degrees", deg)
        return obj

    @classmethod
    def from_dense(cls, a, symmetric: bool = True, zero_diagonal: bool = False,
                   loops: bool = False):
        a = np.array(a, dtype=float)
        if zero_diagonal:
            np.fill_diagonal(a, 0.0)
        return cls(sp.csr_array(a), symmetric=symmetric, loops=loops)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def nnz(self) -> int:
        return self.weights.nnz

    def toarray(self) -> np.ndarray:
        return self.weights.toarray()

    def isolated(self) -> np.ndarray:
        """Indices of zero-degree vertices."""
        return np.flatnonzero(self.degrees <= 0)

    def check_positive_degrees(self):
        iso = self.isolated()
        if iso.size:
            raise DegenerateGraphError(iso)
        return self

    def __eq__(self, other):
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return (self.weights.shape == other.weights.shape
                and (self.weights != other.weights).nnz == 0)


def pairwise_sq_distances(x: np.ndarray, rows: slice | None = None) -> np.ndarray:
    """Squared Euclidean distances from ``x[rows]`` to every row of ``x``."""
    rows = slice(None) if rows is None else rows
    a = x[rows]
    if x.shape[1] <= _DIRECT_DIM:
        d2 = np.zeros((a.shape[0], x.shape[0]))
        for k in range(x.shape[1]):
            diff = a[:, k, None] - x[None, :, k]
            d2 += diff * diff
        return d2
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[rows][:, None] - 2.0 * (a @ x.T) + sq[None, :]
    np.maximum(d2, 0.0, out=d2)
    # the Gram expansion loses small distances; redo those exactly
    r, c = np.nonzero(d2 <= 1e-8 * (sq[rows][:, None] + sq[None, :]))
    d2[r, c] = np.sum((a[r] - x[c]) ** 2, axis=1)
    return d2


def _blocks(n: int):
    for s in range(0, n, _BLOCK):
        yield slice(s, min(s + _BLOCK, n))


def _points(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    return PointSet(points).points


def _assemble(rows, cols, vals, n: int) -> SimilarityMatrix:
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0)
    # mirror the upper triangle so w_ij == w_ji bit for bit
    up = rows < cols
    rows, cols, vals = rows[up], cols[up], vals[up]
    w = sp.coo_array((np.concatenate([vals, vals]),
                      (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                     shape=(n, n)).tocsr()
    return SimilarityMatrix(w)


def build_gaussian_graph(points, sigma: float, delta: float = np.inf) -> SimilarityMatrix:
    """Gaussian (RBF) similarity graph.

    Keeps ``exp(-|vi - vj|^2 / 2 sigma^2)`` for pairs no farther apart than
    ``delta`` and drops the rest. Distinct vertices sitting on the same
    coordinates get weight 0, not 1.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not delta >= 0:
        raise ValueError("delta must be non-negative")
    x = _points(points)
    n = x.shape[0]
    rows, cols, vals = [], [], []
    for blk in _blocks(n):
        d2 = pairwise_sq_distances(x, blk)
        keep = (d2 > 0.0) & (d2 <= delta * delta)
        r, c = np.nonzero(keep)
        rows.append(r + blk.start)
        cols.append(c)
        vals.append(np.exp(-d2[r, c] / (2.0 * sigma * sigma)))
    g = _assemble(rows, cols, vals, n)
    # exp underflow can zero a kept weight; mirror pairs underflow together
    return g.check_positive_degrees()


def build_pnn_graph(points, p: int) -> SimilarityMatrix:
    """Unweighted p-nearest-neighbour graph, symmetrised by union.

    Equal distances are broken towards the lower vertex index.
    """
    x = _points(points)
    n = x.shape[0]
    p = int(p)
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    rows, cols = [], []
    for blk in _blocks(n):
        d2 = pairwise_sq_distances(x, blk)
        idx = np.arange(blk.start, blk.stop)
        d2[np.arange(len(idx)), idx] = np.inf
        # stable sort keeps column order on ties: lower index wins
        order = np.argsort(d2, axis=1, kind="stable")[:, :p]
        rows.append(np.repeat(idx, p))
        cols.append(order.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    a = sp.coo_array((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
    a = a + a.T
    a.data[:] = 1.0
    return SimilarityMatrix(a).check_positive_degrees()


def build_epsilon_graph(points, epsilon: float) -> SimilarityMatrix:
    """Unweighted graph linking every pair within distance ``epsilon`` (inclusive)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    x = _points(points)
    n = x.shape[0]
    rows, cols, vals = [], [], []
    for blk in _blocks(n):
        d2 = pairwise_sq_distances(x, blk)
        idx = np.arange(blk.start, blk.stop)
        d2[np.arange(len(idx)), idx] = np.inf
        r, c = np.nonzero(np.sqrt(d2) <= epsilon)
        rows.append(r + blk.start)
        cols.append(c)
        vals.append(np.ones(r.size))
    return _assemble(rows, cols, vals, n).check_positive_degrees()


def build_graph(points, config: GraphConfig) -> SimilarityMatrix:
    if config.kind == "gaussian":
        return build_gaussian_graph(points, config.sigma, config.delta)
    if config.kind == "pnn":
        return build_pnn_graph(points, config.p)
    return build_epsilon_graph(points, config.epsilon)


def _text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


_N_HEADER = re.compile(r"^\s*#\s*n\s*=\s*(\d+)\s*$")


def load_edge_list(source, n: int | None = None) -> SimilarityMatrix:
    """Read ``i j w`` triples (0-based, one per line, ``#`` comments).

    A leading ``# n=<count>`` comment fixes the vertex count (as written by
    :func:`write_edge_list`); otherwise it is the largest index plus one.

    ``source`` may be a path, raw bytes or an open (binary or text) stream.
    Each edge is mirrored; listing both ``i j`` and ``j i`` is a duplicate.
    """
    rows, cols, vals = [], [], []
    seen = set()
    header_n = None
    for lineno, line in enumerate(_text(source).splitlines(), 1):
        m = _N_HEADER.match(line)
        if m and header_n is None and not rows:
            header_n = int(m.group(1))
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'i j w', got {line!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if i < 0 or j < 0:
            raise ValueError(f"line {lineno}: negative vertex index")
        if i == j:
            raise ValueError(f"line {lineno}: self-loop on vertex {i}")
        if not (np.isfinite(w) and w > 0):
            raise ValueError(f"line {lineno}: weight must be positive, got {w}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    size = (max(max(rows), max(cols)) + 1) if rows else 0
    n = header_n if n is None else n
    if n is not None:
        if n < size:
            raise ValueError(f"edge list references vertex {size - 1} >= n={n}")
        size = n
    if size == 0:
        raise ValueError("empty edge list")
    w = sp.coo_array((vals, (rows, cols)), shape=(size, size)).tocsr()
    return SimilarityMatrix(w).check_positive_degrees()


def write_edge_list(graph: SimilarityMatrix, dest) -> None:
    """Write the upper triangle as ``i j w`` lines (``repr`` floats round-trip)."""
    up = sp.triu(graph.weights, k=1, format="coo")
    order = np.lexsort((up.col, up.row))
    lines = [f"# n={graph.n}\n"]
    lines += [f"{up.row[k]} {up.col[k]} {float(up.data[k])!r}\n" for k in order]
    text = "".join(lines)
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def load_points_csv(source, label_col: str | None = None) -> PointSet:
    """Headerless CSV of coordinates; ``label_col='last'`` peels off labels."""
    text = _text(source)
    arr = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
    if label_col is None:
        return PointSet(arr)
    if label_col != "last":
        raise ValueError("label_col must be None or 'last'")
    if arr.shape[1] < 2:
        raise ValueError("need at least one coordinate column besides the label")
    return PointSet(arr[:, :-1], arr[:, -1])


def extract_subgraph(graph: SimilarityMatrix, index_set) -> tuple[SimilarityMatrix, np.ndarray]:
    """Induced subgraph on ``index_set`` with degrees recomputed.

    Returns the subgraph and the local indices of vertices left without
    any edge inside it.
    """
    idx = np.asarray(index_set, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("index_set must be a non-empty 1-D sequence")
    if np.any(np.diff(idx) <= 0):
        raise ValueError("index_set must be strictly increasing")
    if idx[0] < 0 or idx[-1] >= graph.n:
        raise ValueError("index_set out of range")
    w = graph.weights
    lookup = np.full(graph.n, -1, dtype=np.int64)
    lookup[idx] = np.arange(idx.size)
    start, stop = w.indptr[idx], w.indptr[idx + 1]
    lens = stop - start
    # positions of every stored entry in the selected rows, row by row
    pos = np.repeat(start - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
    cols = lookup[w.indices[pos]]
    keep = cols >= 0
    row_of = np.repeat(np.arange(idx.size), lens)[keep]
    indptr = np.zeros(idx.size + 1, dtype=np.int64)
    np.cumsum(np.bincount(row_of, minlength=idx.size), out=indptr[1:])
    # columns stay sorted within a row because idx is increasing
    sub = sp.csr_array((w.data[pos][keep], cols[keep], indptr), shape=(idx.size, idx.size))
    # a principal submatrix inherits symmetry, sign and diagonal from its parent
    g = SimilarityMatrix._trusted(sub, graph.symmetric, graph.loops)
    return g, g.isolated()

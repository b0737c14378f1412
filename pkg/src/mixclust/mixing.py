"""The mixing process: repeated application of the lazy random walk.

``M = (1 - alpha) I + alpha D^-1 W`` is never formed. Each step is one
pass over the CSR arrays of ``W`` done by a compiled kernel that writes
into a preallocated buffer and returns ``||x_new - x||^2`` as a by-product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .graph import SimilarityMatrix

__all__ = [
    "InitSpec",
    "MixingOperator",
    "MixingState",
    "apply_operator",
    "d_weighted_mean",
    "init_agents",
    "run_until_tolerance",
]

DEFAULT_T_MAX = 2000


@numba.njit(cache=True, nogil=True)
def _mix_step(indptr, indices, data, inv_deg, alpha, x, out):
    n = x.shape[0]
    lo = x[0]
    hi = x[0]
    for i in range(1, n):
        if x[i] < lo:
            lo = x[i]
        elif x[i] > hi:
            hi = x[i]
    stay = 1.0 - alpha
    sq = 0.0
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        v = stay * x[i] + alpha * (acc * inv_deg[i])
        # a convex combination cannot leave [lo, hi]; rounding can, by an ulp
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        out[i] = v
        diff = v - x[i]
        sq += diff * diff
    return sq


@dataclass(frozen=True, eq=False)
class MixingOperator:
    graph: SimilarityMatrix
    alpha: float = 1.0
    inverse_degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        self.graph.check_positive_degrees()
        inv = 1.0 / self.graph.degrees
        inv.flags.writeable = False
        object.__setattr__(self, "inverse_degrees", inv)
        w = self.graph.weights
        object.__setattr__(self, "_indptr", w.indptr.astype(np.int64))
        object.__setattr__(self, "_indices", w.indices.astype(np.int64))
        object.__setattr__(self, "_data", np.ascontiguousarray(w.data, dtype=float))

    @property
    def n(self) -> int:
        return self.graph.n

    def step_into(self, x: np.ndarray, out: np.ndarray) -> float:
        """Write ``M x`` into ``out``; return ``||out - x||_2``."""
        sq = _mix_step(self._indptr, self._indices, self._data,
                       self.inverse_degrees, float(self.alpha), x, out)
        return float(np.sqrt(sq))

    def dense(self) -> np.ndarray:
        """Explicit ``M``; for tests and tiny graphs only."""
        w = self.graph.toarray()
        return (1.0 - self.alpha) * np.eye(self.n) + self.alpha * w * self.inverse_degrees[:, None]


@dataclass
class MixingState:
    x: np.ndarray
    t: int = 0
    y: float | None = None
    _buf: np.ndarray | None = field(default=None, repr=False)

    def copy(self) -> "MixingState":
        return MixingState(self.x.copy(), self.t, self.y)


@dataclass(frozen=True)
class InitSpec:
    b: float = 1.0
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("b must be positive")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def init_agents(n: int, spec: InitSpec) -> MixingState:
    """Agents drawn i.i.d. uniform on ``[0, b)``."""
    if n < 1:
        raise ValueError("n must be positive")
    x = spec.b * spec.rng().random(n)
    np.minimum(x, np.nextafter(spec.b, 0.0), out=x)
    return MixingState(x)


def apply_operator(op: MixingOperator, x) -> np.ndarray:
    """One mixing step. Accepts a vector or an (n, m) block of columns."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape[0] != op.n:
        raise ValueError(f"expected length {op.n}, got {x.shape[0]}")
    if x.ndim == 1:
        out = np.empty_like(x)
        op.step_into(x, out)
        return out
    cols = [apply_operator(op, x[:, j]) for j in range(x.shape[1])]
    return np.stack(cols, axis=1) if cols else np.empty_like(x)


def run_until_tolerance(op: MixingOperator, state: MixingState, eps: float,
                        t_max: int = DEFAULT_T_MAX, trace: list | None = None
                        ) -> tuple[MixingState, bool]:
    """Iterate until ``|y_{t+1} - y_t| <= eps`` or ``t == t_max``.

    ``y_t`` is the Euclidean length of the last step. The state is advanced
    in place (double-buffered) and returned with ``True`` when the tolerance
    fired, ``False`` when ``t_max`` did. A state that already carries a
    ``y`` (e.g. after an earlier call with a looser tolerance) continues
    its trajectory, so one further step is enough for a comparison.

    If ``trace`` is a list, ``(t, y_t, |y_t - y_{t-1}|)`` is appended per
    step (the difference is ``nan`` on the very first step).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if state.x.shape[0] != op.n:
        raise ValueError("state length does not match operator")
    if state._buf is None or state._buf.shape != state.x.shape:
        state._buf = np.empty_like(state.x)
    x, buf = state.x, state._buf
    y_prev = state.y
    converged = False
    while state.t < t_max:
        y = op.step_into(x, buf)
        x, buf = buf, x
        state.t += 1
        if trace is not None:
            trace.append((state.t, y, np.nan if y_prev is None else abs(y - y_prev)))
        if y_prev is not None and abs(y - y_prev) <= eps:
            y_prev = y
            converged = True
            break
        y_prev = y
    state.x, state._buf, state.y = x, buf, y_prev
    return state, converged


def d_weighted_mean(op: MixingOperator, x) -> float:
    """Degree-weighted mean; conserved by every mixing step."""
    d = op.graph.degrees
    return float(np.dot(d, x) / d.sum())


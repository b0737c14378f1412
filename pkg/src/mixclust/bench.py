"""Recovery and scaling experiments on stochastic block models.

Each grid cell and repetition is an independent job keyed by an integer
seed, used both to draw the graph and to seed the clustering, so every
emitted row can be rerun on its own.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from itertools import product

import numpy as np

from .metrics import exact_recovery, nmi
from .rard import RardConfig, rard_cluster
from .synth import SbmParams, generate_sbm

__all__ = [
    "ExperimentGrid",
    "RecoveryRow",
    "ScalingResult",
    "ScalingRow",
    "recovery_counts",
    "run_recovery_sweep",
    "run_scaling_bench",
    "write_rows",
]


@dataclass(frozen=True)
class ExperimentGrid:
    n: tuple = (1500,)
    k: tuple = (5,)
    q: tuple = (0.01,)
    p: float = 0.5
    reps: int = 50
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "k", "q"):
            val = getattr(self, name)
            val = tuple(val) if np.iterable(val) else (val,)
            if not val:
                raise ValueError(f"axis {name!r} is empty")
            object.__setattr__(self, name, val)
        if self.reps < 1:
            raise ValueError("reps must be at least 1")

    def jobs(self):
        """``(n, k, q, seed)`` in grid order; seeds run ``seed .. seed + reps - 1`` per cell."""
        for n, k, q in product(self.n, self.k, self.q):
            for r in range(self.reps):
                yield n, k, q, self.seed + r


@dataclass(frozen=True)
class RecoveryRow:
    n: int
    k: int
    q: float
    seed: int
    recovered: bool
    nmi: float
    seconds: float
    total_iterations: int


def _recovery_job(args):
    n, k, q, p, seed, cfg = args
    graph, truth = generate_sbm(SbmParams(n, k, p, q, seed))
    t0 = time.perf_counter()
    tree, labels = rard_cluster(graph, replace(cfg, seed=seed))
    secs = time.perf_counter() - t0
    return RecoveryRow(n, k, q, seed, exact_recovery(labels, truth), nmi(labels, truth),
                       secs, tree.total_iterations)


def _run(jobs, fn, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(workers) as pool:
        # map keeps submission order, so output order is the grid order
        return list(pool.map(fn, jobs))


def run_recovery_sweep(grid: ExperimentGrid, cfg: RardConfig = RardConfig(),
                       workers: int = 1) -> list[RecoveryRow]:
    """Generate, cluster and score one SBM per grid job.

    Timing covers operator construction and clustering, not generation.
    """
    jobs = [(n, k, q, grid.p, s, cfg) for n, k, q, s in grid.jobs()]
    return _run(jobs, _recovery_job, workers)


def recovery_counts(rows) -> dict:
    """Exact recoveries per ``(n, k, q)`` cell."""
    out: dict = {}
    for r in rows:
        key = (r.n, r.k, r.q)
        out[key] = out.get(key, 0) + int(r.recovered)
    return out


@dataclass(frozen=True)
class ScalingRow:
    n: int
    k: int
    p: float
    q: float
    seed: int
    seconds: float
    total_iterations: int


@dataclass
class ScalingResult:
    rows: list[ScalingRow]
    medians: dict
    slope: float

    def ratio(self, n_hi: int, n_lo: int) -> float:
        return self.medians[n_hi] / self.medians[n_lo]


def run_scaling_bench(n_list, k: int = 10, p: float = 0.5, q: float = 0.01,
                      cfg: RardConfig = RardConfig(), reps: int = 5, seed: int = 0,
                      fixed_degree: bool = True, workers: int = 1) -> ScalingResult:
    """Median clustering time per ``n`` and the log-log slope of time vs ``n``.

    With ``fixed_degree`` the probabilities given for the first ``n`` are
    scaled by ``n_list[0] / n`` so every graph has the same expected
    degree and the edge count grows linearly in ``n``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or reps < 1:
        raise ValueError("need at least one n and one rep")
    # compile the kernel outside the timed region
    warm, _ = generate_sbm(SbmParams(2 * k, k, 1.0, 0.0, 0))
    rard_cluster(warm, cfg)
    jobs = []
    for n in n_list:
        scale = n_list[0] / n if fixed_degree else 1.0
        jobs += [(n, k, q * scale, p * scale, seed + r, cfg) for r in range(reps)]
    rows = [ScalingRow(row.n, k, p_, row.q, row.seed, row.seconds, row.total_iterations)
            for (_, _, _, p_, _, _), row in zip(jobs, _run(jobs, _recovery_job, workers))]
    medians = {n: float(np.median([r.seconds for r in rows if r.n == n])) for n in n_list}
    if len(n_list) > 1:
        slope = float(np.polyfit(np.log(n_list), np.log([medians[n] for n in n_list]), 1)[0])
    else:
        slope = float("nan")
    return ScalingResult(rows, medians, slope)


def write_rows(rows, dest=None, row_type=None) -> str | None:
    """Write dataclass rows as CSV with a header row.

    ``dest`` may be a path or a text stream; with ``None`` the CSV text is
    returned. ``row_type`` supplies the header when ``rows`` is empty.
    """
    rows = list(rows)
    row_type = row_type or (type(rows[0]) if rows else None)
    if row_type is None:
        raise ValueError("row_type is needed to write an empty table")
    names = [f.name for f in fields(row_type)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for r in rows:
        d = asdict(r)
        writer.writerow([_fmt(d[k]) for k in names])
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return None


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v

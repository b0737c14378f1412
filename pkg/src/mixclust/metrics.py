"""Clustering quality: k-way normalized cut, NMI and exact recovery."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ContingencyTable",
    "contingency",
    "entropy",
    "exact_recovery",
    "mutual_information",
    "ncut",
    "nmi",
]


def _labels(a) -> np.ndarray:
    lab = getattr(a, "labels", a)
    return np.asarray(lab).ravel()


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def contingency(a, b) -> ContingencyTable:
    a, b = _labels(a), _labels(b)
    if a.shape != b.shape:
        raise ValueError(f"label vectors differ in length: {a.size} vs {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    counts = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts, counts.sum(axis=1), counts.sum(axis=0))


def entropy(a) -> float:
    """Shannon entropy of a labelling, in nats."""
    _, counts = np.unique(_labels(a), return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log(p)))


def mutual_information(a, b) -> float:
    """Mutual information between two labellings, in nats."""
    tab = contingency(a, b)
    n = tab.n
    i, j = np.nonzero(tab.counts)
    nij = tab.counts[i, j].astype(float)
    # 0 log 0 cells are skipped by construction
    mi = np.sum(nij / n * np.log(n * nij / (tab.rows[i] * tab.cols[j])))
    return float(max(mi, 0.0))


def nmi(a, b) -> float:
    """Normalized mutual information, ``MI / sqrt(H(a) H(b))``, in [0, 1].

    Identical partitions give exactly 1. When either labelling has zero
    entropy the ratio is undefined and anything but identity gives 0.
    """
    # identical partitions score exactly 1, free of rounding in the logs
    if exact_recovery(a, b):
        return 1.0
    ha, hb = entropy(a), entropy(b)
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return float(min(mutual_information(a, b) / np.sqrt(ha * hb), 1.0))


def exact_recovery(a, truth) -> bool:
    """True iff both labellings induce the same set partition."""
    tab = contingency(a, truth)
    c = tab.counts
    return bool(c.shape[0] == c.shape[1] and np.all((c > 0).sum(axis=1) == 1)
                and np.all((c > 0).sum(axis=0) == 1))


def ncut(graph, assignment) -> float:
    """k-way normalized cut: sum over clusters of cut(V_i, rest) / vol(V_i)."""
    w = sp.csr_array(getattr(graph, "weights", graph))
    lab = _labels(assignment)
    if lab.size != w.shape[0]:
        raise ValueError("assignment does not cover every vertex")
    _, idx = np.unique(lab, return_inverse=True)
    k = idx.max() + 1
    deg = np.asarray(w.sum(axis=1)).ravel()
    vol = np.bincount(idx, weights=deg, minlength=k)
    if np.any(vol <= 0):
        raise ValueError("a cluster has zero volume")
    coo = w.tocoo()
    cross = idx[coo.row] != idx[coo.col]
    cut = np.bincount(idx[coo.row[cross]], weights=coo.data[cross], minlength=k)
    return float(np.sum(cut / vol))

"""Small hand-written matrices used in tests, demos and the verify command."""
from __future__ import annotations

import numpy as np

from .graph import SimilarityMatrix

# 10-vertex row-stochastic matrix with planted blocks {0,1,2}, {3..6}, {7,8,9}
TOY_TRANSITION = np.array([
    [0, .5, .45, .025, .025, 0, 0, 0, 0, 0],
    [.4, 0, .55, 0, 0, 0, .05, 0, 0, 0],
    [.3, .7, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, .01, 0, 0, .3, .4, .28, 0, .01, 0],
    [0, 0, 0, .4, 0, .3, .3, 0, 0, 0],
    [0, 0, .1, .25, .25, 0, .4, 0, 0, 0],
    [.01, 0, 0, .4, .3, .27, 0, .02, 0, 0],
    [0, .01, 0, 0, 0, 0, 0, 0, .5, .49],
    [0, 0, 0, .02, 0, 0, 0, .49, 0, .49],
    [0, 0, 0, 0, 0, 0, 0, .7, .3, 0],
])
TOY_BLOCKS = np.array([0, 0, 0, 1, 1, 1, 1, 2, 2, 2])

# 6-vertex weighted graph with two planted blocks {0,1,2}, {3,4,5}
TWO_BLOCK_W = np.array([
    [0, 20, 50, 1, 2, 1],
    [20, 0, 30, 0, 1, 1],
    [50, 30, 0, 1, 0, 1],
    [1, 0, 1, 0, 25, 40],
    [2, 1, 0, 25, 0, 30],
    [1, 1, 1, 40, 30, 0],
], dtype=float)
TWO_BLOCK_LABELS = np.array([0, 0, 0, 1, 1, 1])
# its ideal part (off-block weight moved onto the diagonal) and remainder
TWO_BLOCK_W_STAR = np.array([
    [4, 20, 50, 0, 0, 0],
    [20, 2, 30, 0, 0, 0],
    [50, 30, 2, 0, 0, 0],
    [0, 0, 0, 2, 25, 40],
    [0, 0, 0, 25, 3, 30],
    [0, 0, 0, 40, 30, 3],
], dtype=float)
TWO_BLOCK_E = np.array([
    [-4, 0, 0, 1, 2, 1],
    [0, -2, 0, 0, 1, 1],
    [0, 0, -2, 1, 0, 1],
    [1, 0, 1, -2, 0, 0],
    [2, 1, 0, 0, -3, 0],
    [1, 1, 1, 0, 0, -3],
], dtype=float)


def toy_graph() -> SimilarityMatrix:
    """The toy transition matrix as a (non-symmetric) weight matrix."""
    return SimilarityMatrix.from_dense(TOY_TRANSITION, symmetric=False)


def toy_ideal_graph() -> SimilarityMatrix:
    """Toy in-block weights, symmetrised, with all cross-block entries dropped."""
    same = TOY_BLOCKS[:, None] == TOY_BLOCKS[None, :]
    w = np.where(same, TOY_TRANSITION, 0.0)
    return SimilarityMatrix.from_dense((w + w.T) / 2)


def two_block_graph() -> SimilarityMatrix:
    return SimilarityMatrix.from_dense(TWO_BLOCK_W)


def toy_symmetrized_graph() -> SimilarityMatrix:
    """``(P + P^T) / 2`` of the toy matrix, for tools that need symmetry."""
    return SimilarityMatrix.from_dense((TOY_TRANSITION + TOY_TRANSITION.T) / 2)

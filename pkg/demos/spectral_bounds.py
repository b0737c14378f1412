"""
Convergence bounds, checked numerically
=======================================

The dense eigen-oracle verifies the ideal-case and perturbed-case bounds
and the Laplacian decomposition on the printed two-block example.
"""
# %%
import numpy as np

from mixclust.matrices import TWO_BLOCK_LABELS, two_block_graph
from mixclust.oracle import (eigen_decompose, ideal_split, lemma1_check, theorem1_bound_check,
                             theorem2_bound_check)

np.set_printoptions(precision=4, suppress=True)
g = two_block_graph()
dec = ideal_split(g, TWO_BLOCK_LABELS)
print("W* =\n", dec.W_star.toarray())
print("E =\n", dec.E)
print("degrees shared:", np.array_equal(g.degrees, dec.W_star.degrees))
print("L vs L* - D^-1/2 E D^-1/2, max deviation:", lemma1_check(dec))

# %%
# Spectrum of the normalized Laplacian: two eigenvalues near zero, then
# a gap. That gap is what lets the block structure survive the mixing.
print("lambda =", eigen_decompose(g).lambdas)

# %%
# Perturbed bound on W itself, and the ideal bound on W*.
x0 = np.random.default_rng(0).random(6) + 0.01
x0 /= x0.sum()
s2 = theorem2_bound_check(g, TWO_BLOCK_LABELS, x0, t_range=range(0, 31, 5))
s1 = theorem1_bound_check(dec.W_star, TWO_BLOCK_LABELS, x0, t_range=range(0, 31, 5))
print("||phi~_i|| =", s2.phi_tilde_norms)
print(" t   lhs(W)    rhs(W)    lhs(W*)   rhs(W*)")
for a, b in zip(s2, s1):
    print(f"{a.t:2d}  {a.lhs:.2e}  {a.rhs:.2e}  {b.lhs:.2e}  {b.rhs:.2e}")
print("both hold:", s2.holds and s1.holds)

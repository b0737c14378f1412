"""
Choosing the initial tolerance
==============================

A ladder of decreasing tolerances, one clustering per rung. The first
rung at which the cluster count repeats on the next rung is reported as
the recommended tolerance.
"""
# %%
from mixclust.cli import default_ladder, sweep_eps0
from mixclust.rard import RardConfig
from mixclust.synth import SbmParams, generate_sbm

g, _ = generate_sbm(SbmParams(n=600, k=3, p=0.5, q=0.01, seed=2))
res = sweep_eps0(g, default_ladder(1e-1, 8), RardConfig(seed=0))
for row in res.rows:
    mark = "  <- recommended" if row.recommended else ""
    print(f"eps0={row.eps0:.2e}  k={row.clusters}  ncut={row.ncut:.4f}{mark}")
print("recommended:", res.recommended)

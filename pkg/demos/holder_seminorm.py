"""Hölder seminorms of sampled functions.

Samples sqrt on [0, 1], measures its 1/2-seminorm, compares the pruned
kernel with the brute-force oracle on a 100x100 grid, and shows how the
seminorm reacts to restriction and to lowering the exponent.
"""
import time

import numpy as np

from mfmaps.holder import (CornerGrid, SampledFunction, exponent_embedding_check, holder_norm,
                           holder_seminorm, restrict)
from mfmaps.numerics import oracle_holder
from mfmaps.sampling import random_function, stream

grid = CornerGrid([0.0], [1.0], [129])
f = SampledFunction.from_callable(grid, np.sqrt)
print(f"sqrt on {grid.size} nodes: |f|_1/2 = {holder_seminorm(f, 0.5)!r}, "
      f"|f|_F = {holder_norm(f, 0.5)!r}")
for lam in (0.25, 0.5, 0.75, 1.0):
    print(f"  lambda = {lam:4}: seminorm {holder_seminorm(f, lam):.6f}")

big = CornerGrid([0.0, 0.0], [1.0, 1.0], [100, 100])
g = random_function(big, stream(7, "demo"), codim=3)
holder_seminorm(g, 0.5)  # compile once before timing
t0 = time.perf_counter()
fast = holder_seminorm(g, 0.5)
t1 = time.perf_counter()
slow = oracle_holder(g, 0.5)
t2 = time.perf_counter()
print(f"\n{big.size} nodes: kernel {fast!r} in {t1 - t0:.2f}s, "
      f"oracle {slow!r} in {t2 - t1:.2f}s, identical: {fast == slow}")

corner = CornerGrid([0.0, 0.0], [49 / 99, 49 / 99], [50, 50])
print(f"restricted to a quarter: {holder_seminorm(restrict(g, corner), 0.5):.6f} "
      f"(never larger than {fast:.6f})")

rep = exponent_embedding_check(g, 0.9, 0.3)
m = dict(rep.measured)
print(f"|g|_0.3 = {m['seminorm_beta']:.4f} <= {m['constant']:.4f} * |g|_0.9 = {rep.target:.4f}")

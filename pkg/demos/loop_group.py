"""The loop group F([0,1]^2, SO(3)) and its tangent functor.

Multiplies random loops pointwise, checks the group laws, passes through the
identity chart, and compares the tangent map of q -> q^2 with finite
differences along the chart curve s -> Sigma o (s sigma).
"""
import numpy as np

from mfmaps import mapping as F
from mfmaps.holder import CornerGrid
from mfmaps.manifolds import get_manifold, quaternion_square
from mfmaps.sampling import random_map, random_section, stream

G = get_manifold("so3")
grid = CornerGrid([0.0, 0.0], [1.0, 1.0], [12, 12])
rng = stream(5, "loop-demo")


def gap(a, b):
    # q and -q are the same rotation
    d = np.minimum(np.linalg.norm(a.points - b.points, axis=1),
                   np.linalg.norm(a.points + b.points, axis=1))
    return float(np.max(d))


a, b, c = (random_map(G, grid, rng) for _ in range(3))
e = F.loop_identity(grid, G)
print(f"(ab)c vs a(bc):  {gap(F.loop_mul(F.loop_mul(a, b), c), F.loop_mul(a, F.loop_mul(b, c))):.2e}")
print(f"a e vs a:        {gap(F.loop_mul(a, e), a):.2e}")
print(f"a a^-1 vs e:     {gap(F.loop_mul(a, F.loop_inv(a)), e):.2e}")

near = random_map(G, grid, rng, amp=0.3, base=G.group.identity)
u = F.identity_chart(near)
print(f"identity chart round trip: {np.max(np.abs(F.identity_chart_inverse(u, G).points - near.points)):.2e}")

sigma = random_section(a, rng)
rep = F.tangent_functor_check(quaternion_square(G), a, sigma)
print(f"tangent functor for q -> q^2: errors {[f'{v:.1e}' for _, v in rep.measured]}, "
      f"order {rep.order:.3f}")

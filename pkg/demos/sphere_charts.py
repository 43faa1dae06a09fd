"""Charts of the manifold of sphere-valued maps.

Builds a map gamma from a 2-d grid into S^2, moves it along a section with
the chart at gamma, changes chart to a nearby map, and checks that the
antipodal map leaves the chart's codomain. Then splits a section of a map
that sweeps from pole to pole into two stereographic frames and rebuilds it.
"""
import numpy as np

from mfmaps import mapping as F
from mfmaps.errors import IncompatibleFrame, OutsideChart, OutsidePrime
from mfmaps.holder import CornerGrid, SampledFunction, holder_seminorm
from mfmaps.manifolds import antipodal_map, get_manifold
from mfmaps.sampling import nearby_map, random_map, random_section, sphere_sweep, stream

S = get_manifold("sphere2")
grid = CornerGrid([0.0, 0.0], [1.0, 1.0], [9, 9])
rng = stream(3, "sphere-demo")

gamma = random_map(S, grid, rng)
sigma = random_section(gamma, rng, 0.5)
chart = F.chart_at(gamma)
xi = F.chart_apply(chart, sigma)
back = F.chart_inverse(chart, xi)
print(f"Psi^-1(Psi(sigma)) - sigma: {np.max(np.abs(back.vectors - sigma.vectors)):.2e}")
print(f"Hölder 1/2-seminorm of the section: {holder_seminorm(SampledFunction(grid, sigma.vectors), 0.5):.4f}")

other = nearby_map(gamma, rng, 0.3)
tau = F.transition(gamma, other, sigma)
moved = F.chart_apply(F.chart_at(other), tau)
print(f"Psi_xi(Lambda(sigma)) vs Psi_gamma(sigma): {np.max(S.distance_error(moved.points, xi.points)):.2e}")

try:
    F.chart_inverse(chart, F.superpose(antipodal_map(S), gamma))
except OutsidePrime as exc:
    print(f"antipodal map rejected: {exc}")

wide = CornerGrid([0.0, 0.0], [1.0, 1.0], [11, 5])
sweep = sphere_sweep(wide, rng)
try:
    S.chart_containing(sweep.points)
except OutsideChart as exc:
    print(f"\npole-to-pole map: {exc}")
x0 = wide.axes()[0]
north, south = S.atlas
cover = [(CornerGrid(wide.lo, [x0[6], 1.0], [7, 5]), south),
         (CornerGrid([x0[4], 0.0], wide.hi, [7, 5]), north)]
section = random_section(sweep, rng)
frame = F.local_frame(section, cover)
rebuilt = F.frame_reconstruct(frame)
print(f"two-chart frame, overlap defect {F.frame_defect(frame)[0]:.2e}, "
      f"reconstruction error {np.max(np.abs(rebuilt.vectors - section.vectors)):.2e}")
frame.reps[0] = SampledFunction(frame.reps[0].grid, frame.reps[0].values * 1.001)
try:
    F.frame_reconstruct(frame)
except IncompatibleFrame as exc:
    print(f"tampered frame rejected: {exc}")

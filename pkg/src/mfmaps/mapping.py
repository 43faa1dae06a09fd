"""Sampled maps ``M -> N``, their section spaces, charts and operators.

A ``SampledMap`` stores one point of the target per grid node and a
``SampledSection`` over it stores one tangent vector per node. Every operator
acts node by node, and domain predicates are checked eagerly so failures name
the first offending node.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (BadIndex, ChartDomainViolation, CoverageGap, DomainViolation,
                     GridMismatch, IncompatibleFrame, NotProduct, OutsideChart,
                     OutsideOmega, OutsidePrime, ValidationError)
from .holder import CornerGrid, GridMap, SampledFunction
from .manifolds import ManifoldSpec, ProductManifold, SmoothMap, TangentVector
from .numerics import FDConfig, VerificationReport, fd_directional, fd_report

FRAME_TOL = 1e-10


def _first(mask):
    return int(np.flatnonzero(mask)[0])


class SampledMap:
    """Target points at the nodes of ``grid``; shape ``(grid.size, embed_dim)``."""

    def __init__(self, grid: CornerGrid, target: ManifoldSpec, points, validate=True):
        points = np.asarray(points, dtype=float)
        if points.shape != (grid.size, target.embed_dim):
            raise ValidationError(
                f"points must have shape ({grid.size}, {target.embed_dim}), got {points.shape}")
        if validate:
            bad = ~target.contains(points)
            if bad.any():
                raise ValidationError(f"point is not on {target.name}", node=_first(bad))
        self.grid = grid
        self.target = target
        self.points = points

    def __repr__(self):
        return f"SampledMap({self.target.name}, nodes={self.grid.size})"

    def same_space(self, other):
        return self.grid == other.grid and self.target is other.target


class SampledSection:
    """Tangent vectors along ``base``: ``vectors[i]`` lies in the tangent space at ``base.points[i]``."""

    def __init__(self, base: SampledMap, vectors, validate=True):
        vectors = np.asarray(vectors, dtype=float)
        if vectors.shape != base.points.shape:
            raise ValidationError(
                f"vectors must have shape {base.points.shape}, got {vectors.shape}")
        if validate:
            bad = ~np.all(np.isfinite(vectors), axis=1)
            bad |= ~base.target.is_tangent(base.points, vectors)
            if bad.any():
                raise ValidationError("vector is not tangent at its base point", node=_first(bad))
        self.base = base
        self.vectors = vectors

    def __repr__(self):
        return f"SampledSection(over {self.base!r})"

    @classmethod
    def zeros(cls, base):
        return cls(base, np.zeros_like(base.points), validate=False)

    def at(self, i):
        return TangentVector(self.base.points[i], self.vectors[i])

    def _check(self, other):
        if other.base is not self.base and not (
                other.base.same_space(self.base) and np.array_equal(other.base.points, self.base.points)):
            raise GridMismatch("sections live over different maps")

    def __add__(self, other):
        self._check(other)
        return SampledSection(self.base, self.vectors + other.vectors, validate=False)

    def __sub__(self, other):
        self._check(other)
        return SampledSection(self.base, self.vectors - other.vectors, validate=False)

    def __mul__(self, c):
        return SampledSection(self.base, float(c) * self.vectors, validate=False)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledSection(self.base, -self.vectors, validate=False)


@dataclass
class ChartAtSampledMap:
    """The chart ``sigma -> Sigma o sigma`` centred at ``center``."""

    center: SampledMap

    @property
    def local_addition(self):
        return self.center.target.local_addition

    def domain_defect(self, sigma: SampledSection):
        """Mask of nodes where ``sigma`` leaves ``Omega``."""
        return ~self.local_addition.omega_contains(self.center.points, sigma.vectors)

    def codomain_defect(self, xi: SampledMap):
        """Mask of nodes where ``(center, xi)`` leaves ``Omega'``."""
        return ~self.local_addition.prime_contains(self.center.points, xi.points)


def chart_at(gamma: SampledMap) -> ChartAtSampledMap:
    return ChartAtSampledMap(gamma)


def _same_base(sigma, gamma):
    if not sigma.base.same_space(gamma) or not np.array_equal(sigma.base.points, gamma.points):
        raise GridMismatch("section does not lie over the chart centre")


def chart_apply(chart: ChartAtSampledMap, sigma: SampledSection) -> SampledMap:
    gamma = chart.center
    _same_base(sigma, gamma)
    bad = chart.domain_defect(sigma)
    if bad.any():
        raise OutsideOmega("section leaves Omega", node=_first(bad))
    pts = chart.local_addition.sigma(gamma.points, sigma.vectors)
    return SampledMap(gamma.grid, gamma.target, pts)


def chart_inverse(chart: ChartAtSampledMap, xi: SampledMap) -> SampledSection:
    gamma = chart.center
    if not xi.same_space(gamma):
        raise GridMismatch("map and chart centre live in different spaces")
    bad = chart.codomain_defect(xi)
    if bad.any():
        raise OutsidePrime("map leaves the chart codomain", node=_first(bad))
    return SampledSection(gamma, chart.local_addition.theta_inv(gamma.points, xi.points))


def transition(gamma: SampledMap, xi: SampledMap, sigma: SampledSection) -> SampledSection:
    """Change of chart from ``gamma`` to ``xi``: ``theta^-1 o (xi, Sigma o sigma)``."""
    return chart_inverse(chart_at(xi), chart_apply(chart_at(gamma), sigma))


def _apply_map(f: SmoothMap, pts, what):
    with np.errstate(all="ignore"):
        out = np.asarray(f(pts), dtype=float)
    bad = ~np.all(np.isfinite(out), axis=-1)
    if bad.any():
        raise DomainViolation(f"{f.name} undefined at {what}", node=_first(bad))
    return out


def superpose(f: SmoothMap, gamma: SampledMap, domain=None) -> SampledMap:
    """``f o gamma`` node by node; ``domain(points)`` optionally restricts ``f``."""
    if domain is not None:
        bad = ~np.asarray(domain(gamma.points), dtype=bool)
        if bad.any():
            raise DomainViolation(f"point outside the domain of {f.name}", node=_first(bad))
    out = _apply_map(f, gamma.points, "point")
    bad = ~f.target.contains(out)
    if bad.any():
        raise DomainViolation(f"{f.name} leaves {f.target.name}", node=_first(bad))
    return SampledMap(gamma.grid, f.target, out, validate=False)


def section_pushforward(f: SmoothMap, sigma: SampledSection, domain=None) -> SampledSection:
    """``Tf o sigma``, a section over ``f o gamma``."""
    base = superpose(f, sigma.base, domain)
    with np.errstate(all="ignore"):
        vec = np.asarray(f.push(sigma.base.points, sigma.vectors), dtype=float)
    bad = ~np.all(np.isfinite(vec), axis=-1)
    if bad.any():
        raise DomainViolation(f"tangent map of {f.name} undefined", node=_first(bad))
    return SampledSection(base, vec, validate=False)


def precompose(theta: GridMap, gamma: SampledMap, domain: CornerGrid | None = None) -> SampledMap:
    """``gamma o theta`` for a node-aligned grid map ``theta``."""
    domain = domain or gamma.grid
    idx = theta.node_map(domain, gamma.grid)
    return SampledMap(domain, gamma.target, gamma.points[idx], validate=False)


def precompose_section(theta: GridMap, sigma: SampledSection, domain: CornerGrid | None = None) -> SampledSection:
    domain = domain or sigma.base.grid
    idx = theta.node_map(domain, sigma.base.grid)
    base = SampledMap(domain, sigma.base.target, sigma.base.points[idx], validate=False)
    return SampledSection(base, sigma.vectors[idx], validate=False)


def _product(target):
    if not isinstance(target, ProductManifold):
        raise NotProduct(f"{target.name} is not a product manifold")
    return target


def product_split(gamma: SampledMap):
    P = _product(gamma.target)
    a, b = P.split(gamma.points)
    return (SampledMap(gamma.grid, P.factors[0], a, validate=False),
            SampledMap(gamma.grid, P.factors[1], b, validate=False))


def product_join(g1: SampledMap, g2: SampledMap, target: ProductManifold | None = None) -> SampledMap:
    if g1.grid != g2.grid:
        raise GridMismatch("factors live on different grids")
    if target is None:
        target = ProductManifold(g1.target, g2.target)
    elif _product(target).factors != (g1.target, g2.target):
        raise NotProduct("factors do not match the product target")
    return SampledMap(g1.grid, target, np.concatenate([g1.points, g2.points], axis=1), validate=False)


def product_split_section(sigma: SampledSection):
    P = _product(sigma.base.target)
    b1, b2 = product_split(sigma.base)
    v1, v2 = P.split(sigma.vectors)
    return SampledSection(b1, v1, validate=False), SampledSection(b2, v2, validate=False)


def product_join_section(s1: SampledSection, s2: SampledSection, target=None) -> SampledSection:
    base = product_join(s1.base, s2.base, target)
    return SampledSection(base, np.concatenate([s1.vectors, s2.vectors], axis=1), validate=False)


def _node(grid, p):
    if isinstance(p, (bool, np.bool_)) or not isinstance(p, (int, np.integer)):
        raise BadIndex(f"node index must be an integer, got {p!r}")
    if not 0 <= p < grid.size:
        raise BadIndex(f"node index {p} outside 0..{grid.size - 1}")
    return int(p)


def evaluate(gamma: SampledMap, p) -> np.ndarray:
    return gamma.points[_node(gamma.grid, p)].copy()


def evaluate_section(sigma: SampledSection, p) -> TangentVector:
    i = _node(sigma.base.grid, p)
    return TangentVector(sigma.base.points[i].copy(), sigma.vectors[i].copy())


def constant_embed(q, grid: CornerGrid, target: ManifoldSpec) -> SampledMap:
    q = np.asarray(q, dtype=float)
    if not target.contains(q):
        raise ValidationError(f"point is not on {target.name}")
    return SampledMap(grid, target, np.broadcast_to(q, (grid.size, q.size)).copy(), validate=False)


def constant_section(gamma: SampledMap, v) -> SampledSection:
    """The section equal to ``v`` at every node of a constant map ``gamma``."""
    v = np.asarray(v, dtype=float)
    return SampledSection(gamma, np.broadcast_to(v, gamma.points.shape).copy())


@dataclass
class LocalFrame:
    """Chart representatives of a section on a cover of the grid by sub-boxes.

    ``windows[i]`` is a ``(sub_grid, chart)`` pair and ``reps[i]`` holds
    ``dphi_i o sigma`` on that sub-grid.
    """

    base: SampledMap
    windows: list
    reps: list

    def indices(self):
        return [self.base.grid.sub_indices(sub) for sub, _ in self.windows]


def local_frame(sigma: SampledSection, cover) -> LocalFrame:
    """Split ``sigma`` into chart representatives on the windows of ``cover``."""
    gamma = sigma.base
    covered = np.zeros(gamma.grid.size, dtype=bool)
    reps = []
    for sub, chart in cover:
        idx = gamma.grid.sub_indices(sub)
        pts = gamma.points[idx]
        bad = ~np.asarray(chart.contains(pts), dtype=bool)
        if bad.any():
            raise ChartDomainViolation(f"map leaves the domain of {chart.name}", node=int(idx[_first(bad)]))
        reps.append(SampledFunction(sub, chart.push(pts, sigma.vectors[idx])))
        covered[idx] = True
    if not covered.all():
        raise CoverageGap("windows do not cover the grid", node=_first(~covered))
    return LocalFrame(gamma, list(cover), reps)


def frame_defect(frame: LocalFrame):
    """Largest overlap mismatch ``tau_i - dphi_i (Tphi_j)^-1 tau_j`` and its node."""
    gamma = frame.base
    idxs = frame.indices()
    worst, where = 0.0, None
    for i, ((_, ci), ri, ii) in enumerate(zip(frame.windows, frame.reps, idxs)):
        pos_i = {int(k): r for r, k in enumerate(ii)}
        for (_, cj), rj, ij in zip(frame.windows[i + 1:], frame.reps[i + 1:], idxs[i + 1:]):
            rows_j = [r for r, k in enumerate(ij) if int(k) in pos_i]
            if not rows_j:
                continue
            nodes = ij[rows_j]
            rows_i = [pos_i[int(k)] for k in nodes]
            pts = gamma.points[nodes]
            moved = ci.push(pts, cj.pull(cj.apply(pts), rj.values[rows_j]))
            tau = ri.values[rows_i]
            scale = np.maximum(1.0, np.max(np.abs(tau), axis=1))
            err = np.max(np.abs(moved - tau), axis=1) / scale
            k = int(np.argmax(err))
            if err[k] > worst:
                worst, where = float(err[k]), int(nodes[k])
    return worst, where


def frame_reconstruct(frame: LocalFrame, frame_tol=FRAME_TOL) -> SampledSection:
    """Recover the section from a frame, rejecting incompatible overlaps."""
    worst, where = frame_defect(frame)
    if worst > frame_tol:
        raise IncompatibleFrame(f"overlap mismatch {worst:.3g} exceeds {frame_tol:g}", node=where)
    gamma = frame.base
    out = np.zeros_like(gamma.points)
    done = np.zeros(gamma.grid.size, dtype=bool)
    for (_, chart), rep, idx in zip(frame.windows, frame.reps, frame.indices()):
        take = ~done[idx]
        nodes = idx[take]
        pts = gamma.points[nodes]
        out[nodes] = chart.pull(chart.apply(pts), rep.values[take])
        done[nodes] = True
    if not done.all():
        raise CoverageGap("windows do not cover the grid", node=_first(~done))
    return SampledSection(gamma, out)


def _check_steps(gamma, sigma, cfg):
    _same_base(sigma, gamma)
    chart = chart_at(gamma)
    h = cfg.steps[0]
    bad = chart.domain_defect(h * sigma) | chart.domain_defect(-h * sigma)
    if bad.any():
        raise OutsideOmega("largest FD step leaves Omega", node=_first(bad))
    return chart


def tangent_identify(gamma: SampledMap, sigma: SampledSection, cfg: FDConfig | None = None,
                     scenario="") -> VerificationReport:
    """Central differences of ``s -> Sigma o (s sigma)`` at 0 against ``sigma``."""
    cfg = cfg or FDConfig()
    chart = _check_steps(gamma, sigma, cfg)
    la = chart.local_addition
    res = fd_directional(lambda s: la.sigma(gamma.points, s * sigma.vectors), 0.0, 1.0, cfg,
                         exact=sigma.vectors, chord=gamma.target.chord)
    return fd_report("tangent_identify", scenario, res, cfg.min_order)


def tangent_functor_check(f: SmoothMap, gamma: SampledMap, sigma: SampledSection,
                          cfg: FDConfig | None = None, scenario="") -> VerificationReport:
    """Central differences of ``s -> f o Sigma o (s sigma)`` at 0 against ``Tf o sigma``."""
    cfg = cfg or FDConfig()
    chart = _check_steps(gamma, sigma, cfg)
    la = chart.local_addition
    exact = section_pushforward(f, sigma).vectors
    res = fd_directional(lambda s: _apply_map(f, la.sigma(gamma.points, s * sigma.vectors), "curve"),
                         0.0, 1.0, cfg, exact=exact, chord=f.target.chord)
    return fd_report("tangent_functor", scenario, res, cfg.min_order)


def _group(gamma):
    ops = gamma.target.group
    if ops is None:
        raise ValidationError(f"{gamma.target.name} is not a Lie group")
    return ops


def loop_mul(g1: SampledMap, g2: SampledMap) -> SampledMap:
    if not g1.same_space(g2):
        raise GridMismatch("loops live in different spaces")
    ops = _group(g1)
    return SampledMap(g1.grid, g1.target, ops.mul(g1.points, g2.points), validate=False)


def loop_inv(gamma: SampledMap) -> SampledMap:
    ops = _group(gamma)
    return SampledMap(gamma.grid, gamma.target, ops.inv(gamma.points), validate=False)


def loop_identity(grid: CornerGrid, G: ManifoldSpec) -> SampledMap:
    return constant_embed(G.group.identity, grid, G)


def identity_chart(gamma: SampledMap) -> SampledFunction:
    """``phi o gamma`` with values in the ambient copy of the Lie algebra."""
    _group(gamma)
    chart = gamma.target.identity_chart
    bad = ~chart.contains(gamma.points)
    if bad.any():
        raise OutsideChart("loop leaves the identity chart", node=_first(bad))
    return SampledFunction(gamma.grid, chart.apply(gamma.points))


def identity_chart_inverse(u: SampledFunction, G: ManifoldSpec) -> SampledMap:
    chart = G.identity_chart
    bad = ~chart.image_contains(u.values)
    if bad.any():
        raise OutsideChart("coordinates leave the chart image", node=_first(bad))
    return SampledMap(u.grid, G, chart.inverse(u.values))

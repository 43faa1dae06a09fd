"""Verification suites.

A suite is an ordered list of named checks. Each check draws its scenarios
from its own seeded stream (see :mod:`mfmaps.sampling`) and returns
``VerificationReport`` records; most aggregate a batch of scenarios into one
report that names the worst scenario index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import holder as H
from . import mapping as F
from . import quaternion as quat
from .errors import (ChartTooLarge, ConfigError, CoverageGap, IncompatibleFrame, MfmapsError,
                     OutsideChart, OutsidePrime, OverlapConflict, Unsupported)
from .holder import CornerGrid, GridMap, SampledFunction, SmoothFn
from .manifolds import (Euclidean, ProductManifold, antipodal_map, check_normalized, compose,
                        get_manifold, identity_map, lie_local_addition, linear_map,
                        planar_polynomial, quaternion_inverse, quaternion_square,
                        rotation_map, sigma_apply, square_map, tangent_manifold,
                        theta_inverse, torus_double, TangentVector)
from .numerics import (EPS, SMOOTH_GAP_ORDER, FDConfig, QuadratureRule, VerificationReport,
                       convergence_order, fd_directional, oracle_holder, weak_integral_check)
from .sampling import (nearby_map, random_function, random_map, random_section,
                       random_smooth_fn, smooth_field, sphere_sweep, stream)

DEFAULT_TOLERANCES = {
    "point_tol": 1e-9,
    "round_tol": 1e-10,
    "cocycle_tol": 1e-9,
    "frame_tol": 1e-10,
    "group_tol": 1e-12,
    "seminorm_tol": 1e-12,
    "linear_tol": 1e-12,
    "weak_tol": 1e-8,
    "fd_rtol": 1e-5,
    "min_order": 1.8,
    "derivative_order": 0.9,
}
DEFAULT_MANIFOLDS = ("euclidean:2", "sphere2", "so3", "torus:2")
DEFAULT_GRID = {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "shape": [6, 6]}
INJECTIONS = ("broken_antipodal",)


@dataclass
class Context:
    seed: int = 0
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    manifolds: tuple = DEFAULT_MANIFOLDS
    grid: CornerGrid = field(default_factory=lambda: CornerGrid.from_dict(DEFAULT_GRID))
    scenarios: int | None = None
    inject: tuple = ()

    def rng(self, key, index=0):
        return stream(self.seed, key, index)

    def count(self, default):
        return default if self.scenarios is None else max(1, min(default, self.scenarios))


@dataclass(frozen=True)
class Check:
    name: str
    count: int
    run: object


SUITES = {
    "holder": ["‖η‖_λ = sup ‖η(x)−η(y)‖/‖x−y‖^λ", "‖η‖_F = ‖η‖_∞ + ‖η‖_λ",
               "‖F₂(η)‖_λ ≤ L‖η‖_λ", "I_U: F_λ → F_β (β ≤ λ)"],
    "axioms": ["(PF) f_*(γ) = f∘(id,γ)", "(PB) γ ↦ γ∘Θ", "(GL) ‖η̃‖_λ = ‖η‖_λ",
               "(MU) γ ↦ hγ", "dF(U/W,f) = F(U/W,df)", "Δ(t)=I(t)"],
    "charts": ["Σ(0_p) = p", "Ψ_γ(σ) = Σ∘σ", "Ψ_γ⁻¹(ξ) = θ⁻¹∘(γ,ξ)",
               "Λ_{ξ,γ}(σ) = θ⁻¹∘(ξ,Σ∘σ)", "Φ_γ(σ) = (dφ_i∘σ|W_i)_i", "ε_p∘ζ = id_N"],
    "tangent": ["T_{0_p}(Σ|T_pN) = id", "Θ_γ∘TΨ_γ(0,σ) = σ", "TF(M,f) = Θ⁻¹∘F(M,Tf)∘Θ"],
    "liegroup": ["Σ_φ(v) = π(v)·φ⁻¹(π(v)⁻¹.v)", "μ_F = F(M,μ_G)", "λ_F = F(M,λ_G)"],
}
CHECKS = {name: [] for name in SUITES}


def check(suite, name, count=1):
    def register(fn):
        CHECKS[suite].append(Check(name, count, fn))
        return fn
    return register


def suite_names():
    return list(SUITES) + ["all"]


def catalog():
    """One entry per suite: name, seeded scenario count, anchors."""
    out = [{"name": s, "scenarios": sum(c.count for c in CHECKS[s]), "anchors": SUITES[s]}
           for s in SUITES]
    out.append({"name": "all", "scenarios": sum(e["scenarios"] for e in out),
                "anchors": [a for s in SUITES for a in SUITES[s]]})
    return out


def run_suite(name, ctx: Context):
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(suite_names())}")
    reports = []
    for s in names:
        for c in CHECKS[s]:
            try:
                reports.extend(c.run(ctx, ctx.count(c.count)))
            except MfmapsError as exc:
                reports.append(VerificationReport.failure(c.name, s, exc))
    reports.append(_report_determinism(reports))
    return reports


def _report_determinism(reports):
    """Recompute every pass bit from the serialized fields."""
    bad = 0
    for r in reports:
        d = r.to_dict()
        # non-finite numbers are serialized as "inf"/"nan", which float() parses back
        clone = VerificationReport(d["check"], d["scenario"], d["kind"], float(d["value"]),
                                   float(d["target"]), float(d["tol"]),
                                   None if d["order"] is None else float(d["order"]),
                                   error=d["error"])
        bad += clone.passed != d["pass"]
    return VerificationReport("report_determinism", "all-reports", "error", float(bad), tol=0.0,
                              measured=[("reports", len(reports))])


# ---------------------------------------------------------------- helpers

def _worst(check_name, scenario, errors, tol, extra=()):
    errors = np.asarray(errors, dtype=float)
    k = int(np.argmax(errors)) if errors.size else 0
    value = float(errors[k]) if errors.size else 0.0
    return VerificationReport(check_name, scenario, "error", value, tol=tol,
                              measured=[("scenarios", int(errors.size)), ("worst_index", k), *extra])


def _excess(check_name, scenario, excesses, tol, extra=()):
    excesses = np.asarray(excesses, dtype=float)
    k = int(np.argmax(excesses))
    return VerificationReport(check_name, scenario, "bound", float(excesses[k]), target=0.0, tol=tol,
                              measured=[("scenarios", int(excesses.size)), ("worst_index", k), *extra])


def _slowest(check_name, scenario, reports, target):
    """Aggregate order reports: smallest order, largest error."""
    orders = [r.order for r in reports]
    k = int(np.argmin(orders))
    return VerificationReport(check_name, scenario, "order", max(r.value for r in reports),
                              target=target, order=orders[k],
                              measured=[("scenarios", len(reports)), ("worst_index", k),
                                        *reports[k].measured])


def _expect(check_name, scenario, exc_type, fn):
    try:
        fn()
    except exc_type as exc:
        return VerificationReport(check_name, scenario, "error", 0.0, tol=0.0,
                                  measured=[("raised", type(exc).__name__)])
    return VerificationReport(check_name, scenario, "error", 1.0, tol=0.0,
                              error=f"expected {exc_type.__name__}")


def _dist(N, a, b):
    """Largest node-wise chord length between two point arrays."""
    return float(np.max(np.linalg.norm(N.chord(a, b), axis=-1)))


def _vec_dist(a, b):
    return float(np.max(np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)))


def _random_grid(rng, max_nodes=64):
    m = int(rng.integers(1, 3))
    side = max(3, int(round(max_nodes ** (1.0 / m))))
    lo = rng.uniform(0.0, 0.5, m)
    return CornerGrid(lo, lo + rng.uniform(0.5, 2.0, m), [side] * m)


def _omega_scale(N):
    """Radius of tangent samples that stays inside ``Omega``."""
    name = N.name
    if name.startswith("euclidean") or name.startswith("Teuclidean"):
        return 3.0
    if name == "sphere2":
        return 2.9
    return 1.4


# ------------------------------------------------------------------ holder

ORACLE_SMALL, ORACLE_MID, ORACLE_LARGE = 10, 2000, 10_000


def _oracle_grid(i, n, rng):
    if i == 0:
        return CornerGrid([0.0], [1.0], [ORACLE_SMALL])
    if i == n - 1 and n > 1:
        return CornerGrid([0.0, 0.0], [1.0, 1.0], [100, 100])
    nodes = 10 ** rng.uniform(math.log10(ORACLE_SMALL), math.log10(ORACLE_MID))
    m = int(rng.integers(1, 4))
    side = max(2, int(round(nodes ** (1.0 / m))))
    lo = rng.uniform(0.0, 1.0, m)
    return CornerGrid(lo, lo + rng.uniform(0.2, 3.0, m), [side] * m)


@check("holder", "oracle_equivalence", 200)
def _oracle_equivalence(ctx, n):
    mismatches, gap, largest = 0, 0.0, 0
    for i in range(n):
        rng = ctx.rng("oracle_equivalence", i)
        grid = _oracle_grid(i, n, rng)
        f = random_function(grid, rng, int(rng.integers(1, 4)), rough=bool(rng.integers(2)))
        lam = float(rng.uniform(0.05, 1.0))
        a, b = H.holder_seminorm(f, lam), oracle_holder(f, lam)
        mismatches += a != b
        gap = max(gap, abs(a - b))
        largest = max(largest, grid.size)
    return [VerificationReport("oracle_equivalence", f"random-{n}", "error", float(mismatches),
                               tol=0.0, measured=[("functions", n), ("largest_grid", largest),
                                                  ("max_abs_gap", gap)])]


@check("holder", "seminorm_fixtures")
def _seminorm_fixtures(ctx, n):
    tol = ctx.tol["seminorm_tol"]
    g129 = CornerGrid([0.0], [1.0], [129])
    root = SampledFunction.from_callable(g129, np.sqrt)
    g33 = CornerGrid([0.0], [1.0], [33])
    ident = SampledFunction.from_callable(g33, lambda x: x)
    const = SampledFunction(CornerGrid([0.0, 0.0], [1.0, 2.0], [5, 7]), np.full((35, 2), 3.5))
    rows = [
        ("sqrt-129-seminorm", H.holder_seminorm(root, 0.5), 1.0),
        ("sqrt-129-norm", H.holder_norm(root, 0.5), 2.0),
        ("identity-33-seminorm", H.holder_seminorm(ident, 1.0), 1.0),
        ("identity-33-norm", H.holder_norm(ident, 1.0), 2.0),
        ("restricted-identity", H.holder_seminorm(H.restrict(ident, CornerGrid([0.0], [0.5], [17])), 1.0), 1.0),
        ("constant", H.holder_seminorm(const, 0.3), 0.0),
        ("zero-norm", H.holder_norm(SampledFunction.zeros(g33), 0.7), 0.0),
    ]
    return [VerificationReport("seminorm_fixture", name, "error", abs(got - want), tol=tol,
                               measured=[("value", got), ("expected", want)])
            for name, got, want in rows]


@check("holder", "seminorm_homogeneity", 100)
def _homogeneity(ctx, n):
    errs = []
    for i in range(n):
        rng = ctx.rng("seminorm_homogeneity", i)
        f = random_function(_random_grid(rng), rng, int(rng.integers(1, 3)), rough=bool(rng.integers(2)))
        lam, c = float(rng.uniform(0.1, 1.0)), float(rng.normal(scale=3.0))
        s = H.holder_seminorm(f, lam)
        errs.append(abs(H.holder_seminorm(c * f, lam) - abs(c) * s) / max(1.0, abs(c) * s))
    return [_worst("seminorm_homogeneity", f"random-{n}", errs, ctx.tol["seminorm_tol"])]


@check("holder", "seminorm_triangle", 100)
def _triangle(ctx, n):
    exc = []
    for i in range(n):
        rng = ctx.rng("seminorm_triangle", i)
        grid = _random_grid(rng)
        k = int(rng.integers(1, 3))
        f = random_function(grid, rng, k, rough=bool(rng.integers(2)))
        g = random_function(grid, rng, k, rough=bool(rng.integers(2)))
        lam = float(rng.uniform(0.1, 1.0))
        exc.append(H.holder_seminorm(f + g, lam) - H.holder_seminorm(f, lam) - H.holder_seminorm(g, lam))
    return [_excess("seminorm_triangle", f"random-{n}", exc, ctx.tol["seminorm_tol"])]


@check("holder", "restriction_monotone", 100)
def _restriction(ctx, n):
    exc = []
    for i in range(n):
        rng = ctx.rng("restriction_monotone", i)
        m = int(rng.integers(1, 3))
        side = 9 if m == 2 else 33
        grid = CornerGrid([0.0] * m, [1.0] * m, [side] * m)
        f = random_function(grid, rng, 1, rough=bool(rng.integers(2)))
        a = rng.integers(0, side - 2, m)
        b = np.array([rng.integers(lo + 2, side) for lo in a])
        h = 1.0 / (side - 1)
        sub = CornerGrid(a * h, b * h, b - a + 1)
        lam = float(rng.uniform(0.1, 1.0))
        exc.append(H.holder_seminorm(H.restrict(f, sub), lam) - H.holder_seminorm(f, lam))
    return [_excess("restriction_monotone", f"random-{n}", exc, 0.0)]


@check("holder", "mean_value_bounds", 100)
def _mean_value(ctx, n):
    reports = []
    u2 = SmoothFn(1, 1, lambda u: u * u, lambda u, h: 2.0 * u * h, name="square")
    g = CornerGrid([0.0], [1.0], [33])
    eta = SampledFunction.from_callable(g, lambda x: x)
    gam = SampledFunction.from_callable(g, lambda x: x + 0.01)
    r = H.lipschitz_estimate_check(u2, eta, gam, 1.0, np.random.default_rng(0), "square-fixture")
    reports.append(r)
    exc = []
    for i in range(n):
        rng = ctx.rng("mean_value_bounds", i)
        grid = _random_grid(rng, 48)
        k = int(rng.integers(1, 3))
        f = random_smooth_fn(rng, k, 1)
        eta = random_function(grid, rng, k)
        gamma = eta + SampledFunction(grid, 0.2 * smooth_field(grid, rng, k))
        lam = float(rng.uniform(0.2, 1.0))
        exc.append(H.lipschitz_estimate_check(f, eta, gamma, lam, rng).value)
    reports.append(_excess("mean_value_bounds", f"random-{n}", exc, 0.0))
    return reports


@check("holder", "exponent_embedding", 100)
def _embedding(ctx, n):
    g = CornerGrid([0.0], [1.0], [129])
    root = SampledFunction.from_callable(g, np.sqrt)
    reports = [H.exponent_embedding_check(root, 0.5, 0.25, "sqrt-fixture")]
    exc = []
    for i in range(n):
        rng = ctx.rng("exponent_embedding", i)
        f = random_function(_random_grid(rng), rng, int(rng.integers(1, 3)), rough=bool(rng.integers(2)))
        lam = float(rng.uniform(0.1, 1.0))
        beta = float(rng.uniform(0.05, lam))
        r = H.exponent_embedding_check(f, lam, beta)
        exc.append(r.value - r.target - r.tol)
    reports.append(_excess("exponent_embedding", f"random-{n}", exc, 0.0))
    return reports


@check("holder", "quadrature_sanity")
def _quadrature(ctx, n):
    rule = QuadratureRule(32)
    errs = [abs(float(np.dot(rule.weights, rule.nodes ** k)) * (k + 1) - 1.0) for k in range(64)]
    return [_worst("quadrature_sanity", "gauss-legendre-32", errs, 1e-14)]


def _registered_fns(rng):
    fns = [random_smooth_fn(rng, k, j) for k in (1, 2, 3) for j in (1, 2)]
    fns.append(SmoothFn(1, 1, lambda u: u * u, lambda u, h: 2.0 * u * h, name="square"))
    fns.append(H.bump_function(CornerGrid([0.0], [1.0], [5]), ([0.4], [0.6]), ([0.2], [0.8]))[1])
    return fns


@check("holder", "fd_sanity", 8)
def _fd_sanity(ctx, n):
    worst = []
    for i, fn in enumerate(_registered_fns(ctx.rng("fd_sanity"))[:n]):
        rel, _ = fn.validate(ctx.rng("fd_sanity", i + 1), rtol=ctx.tol["fd_rtol"],
                             min_order=ctx.tol["min_order"])
        worst.append(rel)
    return [_worst("fd_sanity", "registered-fns", worst, ctx.tol["fd_rtol"])]


@check("holder", "fd_fixtures")
def _fd_fixtures(ctx, n):
    cube = fd_directional(lambda x: x ** 3, 1.0, 1.0)
    lin = fd_directional(lambda x: 3.0 * x + 1.0, 0.7, 1.0)
    kink = fd_directional(abs, 0.0, 1.0)
    return [
        VerificationReport("fd_fixture", "cube-at-1", "error", abs(float(cube.value) - 3.0), tol=1e-8),
        VerificationReport("fd_fixture", "linear-exact", "order", 0.0, target=ctx.tol["min_order"],
                           order=lin.order),
        VerificationReport("fd_fixture", "abs-kink-flagged", "bound", kink.order,
                           target=SMOOTH_GAP_ORDER, measured=[("smooth", kink.smooth)]),
    ]


# ------------------------------------------------------------------ axioms

@check("axioms", "pushforward_fixtures")
def _pf_fixtures(ctx, n):
    g = CornerGrid([0.0], [1.0], [17])
    gamma = SampledFunction.from_callable(g, lambda x: x)
    W = CornerGrid([0.25], [0.75], [9])
    xy2 = SmoothFn(2, 1, lambda z: z[:, :1] * z[:, 1:] ** 2, None, name="x*y^2")
    proj_y = SmoothFn(2, 1, lambda z: z[:, 1:], None, name="y")
    proj_x = SmoothFn(2, 1, lambda z: z[:, :1], None, name="x")
    xw = W.nodes()
    rows = [
        ("x*y^2", H.pushforward(xy2, gamma, W).values, xw ** 3),
        ("projection-y", H.pushforward(proj_y, gamma, W).values, H.restrict(gamma, W).values),
        ("projection-x", H.pushforward(proj_x, gamma, W).values, xw),
    ]
    return [VerificationReport("pushforward_fixture", name, "error", _vec_dist(a, b), tol=4 * EPS)
            for name, a, b in rows]


@check("axioms", "pullback_fixtures")
def _pb_fixtures(ctx, n):
    g1 = CornerGrid([0.0], [1.0], [21])
    path = SampledFunction.from_callable(g1, lambda x: x)
    rev = H.pullback(GridMap.reflection(g1, 0), path)
    g2 = CornerGrid([0.0, 0.0], [1.0, 1.0], [7, 7])
    first = SampledFunction.from_callable(g2, lambda x: x[:, :1])
    swap = H.pullback(GridMap.permutation([1, 0]), first)
    ident = H.pullback(GridMap.identity(2), first)
    return [
        VerificationReport("pullback_fixture", "reversal", "error",
                           _vec_dist(rev.values, 1.0 - g1.nodes()), tol=4 * EPS),
        VerificationReport("pullback_fixture", "axis-swap", "error",
                           _vec_dist(swap.values, g2.nodes()[:, 1:]), tol=0.0),
        VerificationReport("pullback_fixture", "identity", "error",
                           _vec_dist(ident.values, first.values), tol=0.0),
    ]


@check("axioms", "extension_isometry", 20)
def _extension(ctx, n):
    errs = []
    zero = SampledFunction.zeros(CornerGrid([0.0], [1.0], [21]))
    ext0 = H.extend_by_zero(zero, ([0.25], [0.75]), CornerGrid([0.0], [2.0], [41]))
    errs.append(H.holder_seminorm(ext0, 0.5))
    for i in range(n):
        rng = ctx.rng("extension_isometry", i)
        m = 1 + i % 2
        side = 41 if m == 1 else 13
        grid = CornerGrid([0.0] * m, [1.0] * m, [side] * m)
        big = CornerGrid([0.0] * m, [2.0] * m, [2 * side - 1] * m)
        bump, _ = H.bump_function(grid, ([1 / 3] * m, [2 / 3] * m), ([0.25] * m, [0.75] * m))
        f = H.multiply_cutoff(bump, random_function(grid, rng, int(rng.integers(1, 3))))
        lam = float(rng.uniform(0.1, 1.0))
        ext = H.extend_by_zero(f, ([0.25] * m, [0.75] * m), big)
        errs.append(abs(H.holder_seminorm(ext, lam) - H.holder_seminorm(f, lam)))
    return [_worst("extension_isometry", f"bump-fixtures-{n}", errs, ctx.tol["seminorm_tol"])]


@check("axioms", "cutoff_product_rule", 100)
def _cutoff(ctx, n):
    g = CornerGrid([0.0], [1.0], [11])
    f = SampledFunction.from_callable(g, np.sin)
    ones = SampledFunction(g, np.ones(11))
    fixed = [
        VerificationReport("cutoff_fixture", "h=1", "error",
                           _vec_dist(H.multiply_cutoff(ones, f).values, f.values), tol=0.0),
        VerificationReport("cutoff_fixture", "h=0", "error",
                           _vec_dist(H.multiply_cutoff(0.0 * ones, f).values, 0.0), tol=0.0),
    ]
    exc = []
    for i in range(n):
        rng = ctx.rng("cutoff_product_rule", i)
        grid = _random_grid(rng)
        h = random_function(grid, rng, 1, rough=bool(rng.integers(2)))
        f = random_function(grid, rng, int(rng.integers(1, 3)), rough=bool(rng.integers(2)))
        lam = float(rng.uniform(0.1, 1.0))
        lhs = H.holder_seminorm(H.multiply_cutoff(h, f), lam)
        rhs = H.sup_norm(h) * H.holder_seminorm(f, lam) + H.holder_seminorm(h, lam) * H.sup_norm(f)
        exc.append(lhs - rhs)
    return fixed + [_excess("cutoff_product_rule", f"random-{n}", exc, ctx.tol["seminorm_tol"])]


@check("axioms", "glue_restrict", 20)
def _glue(ctx, n):
    grid = CornerGrid([0.0, 0.0], [1.0, 1.0], [9, 9])
    left = CornerGrid([0.0, 0.0], [0.625, 1.0], [6, 9])
    right = CornerGrid([0.375, 0.0], [1.0, 1.0], [6, 9])
    bad = 0
    for i in range(n):
        rng = ctx.rng("glue_restrict", i)
        f = random_function(grid, rng, 2, rough=True)
        pieces = [H.restrict(f, left), H.restrict(f, right)]
        glued = H.glue(pieces, grid)
        bad += not np.array_equal(glued.values, f.values)
        bad += sum(not np.array_equal(H.restrict(glued, p.grid).values, p.values) for p in pieces)
    g1 = CornerGrid([0.0], [1.0], [11])
    a = SampledFunction.from_callable(CornerGrid([0.0], [0.6], [7]), lambda x: x)
    b_vals = CornerGrid([0.4], [1.0], [7]).nodes().copy()
    b_vals[1] += 1.0  # x = 0.5
    b = SampledFunction(CornerGrid([0.4], [1.0], [7]), b_vals)
    return [
        VerificationReport("glue_restrict", f"random-{n}", "error", float(bad), tol=0.0),
        _expect("glue_conflict_detected", "disagree-at-0.5", OverlapConflict, lambda: H.glue([a, b], g1)),
        _expect("glue_gap_detected", "missing-right", CoverageGap, lambda: H.glue([a], g1)),
    ]


@check("axioms", "bump_properties")
def _bump(ctx, n):
    g = CornerGrid([0.0], [1.0], [101])
    vals, fn = H.bump_function(g, ([0.4], [0.6]), ([0.2], [0.8]))
    x = g.nodes()[:, 0]
    v = vals.values[:, 0]
    k_nodes = g.box_mask([0.4], [0.6])
    off = ~g.box_mask([0.2], [0.8], closed=False)
    bad = int(np.sum((v < 0) | (v > 1)) + np.sum(v[k_nodes] != 1.0) + np.sum(v[off] != 0.0))
    bad += not fn.eval(np.array([[0.25]]))[0, 0] < fn.eval(np.array([[0.35]]))[0, 0]
    bad += int(fn.eval(np.array([[0.5]]))[0, 0] != 1.0) + int(fn.eval(np.array([[0.1]]))[0, 0] != 0.0)
    full, _ = H.bump_function(g, ([0.0], [1.0]), ([0.0], [1.0]))
    bad += int(np.any(full.values != 1.0))
    return [VerificationReport("bump_properties", "plateau-0.4-0.6", "error", float(bad), tol=0.0,
                               measured=[("nodes", int(x.size))])]


def _derivative_triple(ctx, key, i):
    rng = ctx.rng(key, i)
    grid = _random_grid(rng, 40)
    k = int(rng.integers(1, 4))
    f = random_smooth_fn(rng, k, int(rng.integers(1, 3)))
    gamma = random_function(grid, rng, k)
    eta = random_function(grid, rng, k)
    return f, gamma, eta


DERIVATIVE_STEPS = (1e-3, 1e-4, 1e-5, 1e-6)


@check("axioms", "pushforward_derivative", 20)
def _derivative_identity(ctx, n):
    reps = [H.pushforward_derivative_check(*_derivative_triple(ctx, "pushforward_derivative", i),
                                           ts=DERIVATIVE_STEPS, min_order=ctx.tol["derivative_order"])
            for i in range(n)]
    return [_slowest("pushforward_derivative", f"random-{n}", reps, ctx.tol["derivative_order"])]


@check("axioms", "weak_integral", 20)
def _weak(ctx, n):
    tol = ctx.tol["weak_tol"]
    rule = QuadratureRule(32)
    g = CornerGrid([0.0], [1.0], [11])
    u2 = SmoothFn(1, 1, lambda u: u * u, lambda u, h: 2.0 * u * h, name="square")
    gamma = SampledFunction.from_callable(g, lambda x: x)
    eta = SampledFunction(g, np.ones(11))
    fixture = weak_integral_check(u2, gamma, eta, 0.1, rule, tol, "square-fixture")
    closed = (u2.eval(gamma.values + 0.1) - u2.eval(gamma.values)) / 0.1
    exact = VerificationReport("weak_integral_closed_form", "square-fixture", "error",
                               _vec_dist(closed, 2 * gamma.values + 0.1), tol=tol)
    errs = []
    for i in range(n):
        f, gamma, eta = _derivative_triple(ctx, "weak_integral", i)
        for t in (1e-1,) + DERIVATIVE_STEPS:
            errs.append(weak_integral_check(f, gamma, eta, t, rule, tol).value)
    return [fixture, exact, _worst("weak_integral", f"random-{n}x{1 + len(DERIVATIVE_STEPS)}", errs, tol)]


@check("axioms", "weak_integral_limit", 20)
def _weak_limit(ctx, n):
    rule = QuadratureRule(32)
    ts = (1e-1, 1e-2, 1e-3, 1e-4)
    reps = []
    for i in range(n):
        f, gamma, eta = _derivative_triple(ctx, "weak_integral_limit", i)
        d = f.deriv(gamma.values, eta.values)
        errs = [float(np.max(np.abs(rule.integrate(
            lambda s: f.deriv(gamma.values + s * t * eta.values, eta.values)) - d))) for t in ts]
        order = convergence_order(ts, errs, [max(1e-13, 16 * EPS * (1 + np.max(np.abs(d))) * 10)] * len(ts))
        reps.append(VerificationReport("weak_integral_limit", "", "order", max(errs),
                                       target=ctx.tol["derivative_order"], order=order,
                                       measured=[(f"err@{t:g}", e) for t, e in zip(ts, errs)]))
    return [_slowest("weak_integral_limit", f"random-{n}", reps, ctx.tol["derivative_order"])]


# ------------------------------------------------------------------ charts

def _instances(ctx):
    return [get_manifold(m) for m in ctx.manifolds]


@check("charts", "local_addition_round_trip", 1000)
def _la_round_trip(ctx, n):
    out = []
    for N in _instances(ctx):
        rng = ctx.rng("local_addition_round_trip:" + N.name)
        la = N.local_addition
        p = N.random_point(rng, n)
        v = N.random_tangent(rng, p, _omega_scale(N))
        q = sigma_apply(N, TangentVector(p, N.random_tangent(rng, p, _omega_scale(N))))
        back = theta_inverse(N, p, sigma_apply(N, TangentVector(p, v))).vec
        out.append(_worst("sigma_theta_round_trip", N.name,
                          np.linalg.norm(back - v, axis=-1), ctx.tol["round_tol"]))
        w = theta_inverse(N, p, q).vec
        out.append(_worst("theta_sigma_round_trip", N.name,
                          np.linalg.norm(N.chord(la.sigma(p, w), q), axis=-1), ctx.tol["round_tol"]))
        out.append(_worst("tangency_closure", N.name, N.tangent_residual(p, w), ctx.tol["point_tol"]))
        zero = la.sigma(p, N.zero(p))
        out.append(_worst("zero_law", N.name, np.linalg.norm(N.chord(p, zero), axis=-1),
                          ctx.tol["point_tol"]))
    S = get_manifold("sphere2")
    out.append(_expect("omega_prime_excludes_antipodes", "sphere2", OutsidePrime,
                       lambda: theta_inverse(S, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0])))
    return out


@check("charts", "atlas_round_trip", 200)
def _atlas(ctx, n):
    out = []
    for N in _instances(ctx):
        rng = ctx.rng("atlas_round_trip:" + N.name)
        p = N.random_point(rng, n)
        v = N.random_tangent(rng, p, 1.0)
        errs, used = [], 0
        for chart in N.atlas:
            m = chart.contains(p)
            if not m.any():
                continue
            used += 1
            u = chart.apply(p[m])
            errs.append(_dist(N, chart.inverse(u), p[m]))
            errs.append(_vec_dist(chart.pull(u, chart.push(p[m], v[m])), v[m]))
        errs.append(_dist(N, N.project(p), p))
        out.append(_worst("atlas_round_trip", N.name, errs, ctx.tol["round_tol"],
                          extra=[("charts_used", used), ("charts", len(N.atlas))]))
    return out


def _chart_scenario(ctx, N, key, i):
    rng = ctx.rng(f"{key}:{N.name}", i)
    gamma = random_map(N, ctx.grid, rng)
    return rng, gamma, random_section(gamma, rng, 0.4)


@check("charts", "chart_round_trip", 100)
def _chart_rt(ctx, n):
    out = []
    for N in _instances(ctx):
        errs = []
        for i in range(n):
            rng, gamma, sigma = _chart_scenario(ctx, N, "chart_round_trip", i)
            chart = F.chart_at(gamma)
            back = F.chart_inverse(chart, F.chart_apply(chart, sigma))
            xi = nearby_map(gamma, rng, 0.4)
            again = F.chart_apply(chart, F.chart_inverse(chart, xi))
            errs.append(max(_vec_dist(back.vectors, sigma.vectors), _dist(N, again.points, xi.points)))
        out.append(_worst("chart_round_trip", N.name, errs, ctx.tol["round_tol"]))
    if "broken_antipodal" in ctx.inject:
        out.append(_broken_antipodal(ctx))
    return out


def _broken_antipodal(ctx):
    S = get_manifold("sphere2")
    gamma = F.constant_embed([0.0, 0.0, 1.0], ctx.grid, S)
    xi = F.superpose(antipodal_map(S), gamma)
    try:
        F.chart_inverse(F.chart_at(gamma), xi)
    except OutsidePrime as exc:
        return VerificationReport.failure("chart_round_trip", "broken-antipodal", exc)
    return VerificationReport("chart_round_trip", "broken-antipodal", "error", 0.0)


@check("charts", "transition_coherence", 100)
def _transition(ctx, n):
    out = []
    for N in _instances(ctx):
        coh, ident, cyc = [], [], []
        for i in range(n):
            rng, gamma, sigma = _chart_scenario(ctx, N, "transition_coherence", i)
            xi = nearby_map(gamma, rng, 0.4)
            zeta = nearby_map(gamma, rng, 0.4)
            lam = F.transition(gamma, xi, sigma)
            lhs = F.chart_apply(F.chart_at(xi), lam).points
            rhs = F.chart_apply(F.chart_at(gamma), sigma).points
            coh.append(_dist(N, lhs, rhs))
            ident.append(_vec_dist(F.transition(gamma, gamma, sigma).vectors, sigma.vectors))
            two = F.transition(xi, zeta, lam).vectors
            one = F.transition(gamma, zeta, sigma).vectors
            cyc.append(_vec_dist(two, one))
        out.append(_worst("transition_coherence", N.name, coh, ctx.tol["round_tol"]))
        out.append(_worst("transition_identity", N.name, ident, ctx.tol["round_tol"]))
        out.append(_worst("transition_cocycle", N.name, cyc, ctx.tol["cocycle_tol"]))
    E = Euclidean(2)
    rng = ctx.rng("transition_coherence:affine")
    gamma, xi = random_map(E, ctx.grid, rng), random_map(E, ctx.grid, rng)
    sigma = random_section(gamma, rng)
    lam = F.transition(gamma, xi, sigma)
    out.append(VerificationReport("transition_affine", E.name, "error",
                                  _vec_dist(lam.vectors, gamma.points + sigma.vectors - xi.points),
                                  tol=ctx.tol["linear_tol"]))
    return out


def _map_pairs():
    S, G, T = get_manifold("sphere2"), get_manifold("so3"), get_manifold("torus:2")
    c, s = math.cos(0.7), math.sin(0.7)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return [
        (rotation_map(S, R), antipodal_map(S)),
        (quaternion_square(G), quaternion_inverse(G)),
        (torus_double(T), torus_double(T)),
        (planar_polynomial(), linear_map([[1.0, 2.0], [-0.5, 0.3]])),
    ]


@check("charts", "superpose_functoriality", 20)
def _functoriality(ctx, n):
    ident_bad, comp = 0, []
    pairs = _map_pairs()
    for i in range(n):
        f, g = pairs[i % len(pairs)]
        rng = ctx.rng("superpose_functoriality", i)
        gamma = random_map(f.source, ctx.grid, rng)
        ident_bad += not np.array_equal(F.superpose(identity_map(f.source), gamma).points, gamma.points)
        lhs = F.superpose(compose(g, f), gamma).points
        rhs = F.superpose(g, F.superpose(f, gamma)).points
        comp.append(_dist(g.target, lhs, rhs))
    G = get_manifold("so3")
    rng = ctx.rng("superpose_functoriality:oracle")
    gamma = random_map(G, ctx.grid, rng)
    q = gamma.points
    w, x, y, z = q.T
    oracle = np.stack([w * w - x * x - y * y - z * z, 2 * w * x, 2 * w * y, 2 * w * z], axis=1)
    sq = F.superpose(quaternion_square(G), gamma).points
    return [
        VerificationReport("superpose_identity", f"random-{n}", "error", float(ident_bad), tol=0.0),
        _worst("superpose_composition", f"random-{n}", comp, ctx.tol["point_tol"]),
        VerificationReport("superpose_quaternion_square", "so3", "error", _vec_dist(sq, oracle),
                           tol=ctx.tol["point_tol"]),
    ]


@check("charts", "section_linearity", 20)
def _linearity(ctx, n):
    f = planar_polynomial()
    E = f.source
    errs, ev_bad = [], 0
    for i in range(n):
        rng = ctx.rng("section_linearity", i)
        gamma = random_map(E, ctx.grid, rng)
        s, t = random_section(gamma, rng), random_section(gamma, rng)
        a, b = rng.normal(size=2)
        lhs = F.section_pushforward(f, a * s + b * t).vectors
        rhs = a * F.section_pushforward(f, s).vectors + b * F.section_pushforward(f, t).vectors
        errs.append(_vec_dist(lhs, rhs) / max(1.0, float(np.max(np.abs(rhs)))))
        p = int(rng.integers(gamma.grid.size))
        # in the ambient vector space both sides perform the same float operations
        ev = F.evaluate_section(a * s + b * t, p).vec
        ev_bad += not np.array_equal(ev, a * s.vectors[p] + b * t.vectors[p])
    x = square_map(1)
    g1 = CornerGrid([0.0], [1.0], [5])
    const = F.constant_embed([0.75], g1, x.source)
    push = F.section_pushforward(x, F.constant_section(const, [1.0]))
    return [
        _worst("section_linearity", f"random-{n}", errs, ctx.tol["linear_tol"]),
        VerificationReport("evaluation_linearity", f"random-{n}", "error", float(ev_bad), tol=0.0),
        VerificationReport("section_pushforward_fixture", "square-at-0.75", "error",
                           _vec_dist(push.vectors, 1.5), tol=0.0),
    ]


@check("charts", "precompose_commutation", 50)
def _precompose(ctx, n):
    S = get_manifold("sphere2")
    theta = GridMap.reflection(ctx.grid, 0)
    errs = []
    for i in range(n):
        rng = ctx.rng("precompose_commutation", i)
        gamma = random_map(S, ctx.grid, rng)
        sigma = random_section(gamma, rng, 0.5)
        lhs = F.chart_apply(F.chart_at(F.precompose(theta, gamma)), F.precompose_section(theta, sigma))
        rhs = F.precompose(theta, F.chart_apply(F.chart_at(gamma), sigma))
        errs.append(_dist(S, lhs.points, rhs.points))
    g1 = CornerGrid([0.0], [1.0], [9])
    path = F.SampledMap(g1, S, S.project(np.stack([g1.nodes()[:, 0], np.ones(9), np.zeros(9)], 1)))
    rev = F.precompose(GridMap.reflection(g1, 0), path)
    same = F.precompose(GridMap.identity(ctx.grid.m), F.constant_embed([1.0, 0, 0], ctx.grid, S))
    return [
        _worst("precompose_commutation", f"sphere-{n}", errs, ctx.tol["round_tol"]),
        VerificationReport("precompose_fixture", "reversal", "error",
                           _vec_dist(rev.points, path.points[::-1]), tol=0.0),
        VerificationReport("precompose_fixture", "identity", "error",
                           _vec_dist(same.points, [1.0, 0.0, 0.0]), tol=0.0),
    ]


@check("charts", "product_split_join", 20)
def _product(ctx, n):
    S, G = get_manifold("sphere2"), get_manifold("so3")
    P = ProductManifold(S, G)
    bad, compat = 0, []
    for i in range(n):
        rng = ctx.rng("product_split_join", i)
        g1, g2 = random_map(S, ctx.grid, rng), random_map(G, ctx.grid, rng)
        joined = F.product_join(g1, g2, P)
        a, b = F.product_split(joined)
        bad += not (np.array_equal(a.points, g1.points) and np.array_equal(b.points, g2.points))
        bad += not np.array_equal(F.product_join(a, b, P).points, joined.points)
        s1, s2 = random_section(g1, rng), random_section(g2, rng)
        js = F.product_join_section(s1, s2, P)
        lhs = F.chart_apply(F.chart_at(joined), js).points
        rhs = np.concatenate([F.chart_apply(F.chart_at(g1), s1).points,
                              F.chart_apply(F.chart_at(g2), s2).points], axis=1)
        compat.append(_vec_dist(lhs, rhs))
        z1, z2 = F.product_split_section(F.SampledSection.zeros(joined))
        bad += bool(np.any(z1.vectors) or np.any(z2.vectors))
    return [VerificationReport("product_split_join", f"random-{n}", "error", float(bad), tol=0.0),
            _worst("product_chart_compatibility", f"random-{n}", compat, ctx.tol["linear_tol"])]


@check("charts", "constant_embedding", 20)
def _constant(ctx, n):
    out = []
    for N in _instances(ctx):
        errs, bad = [], 0
        for i in range(n):
            rng = ctx.rng("constant_embedding:" + N.name, i)
            y = N.random_point(rng)
            v = N.random_tangent(rng, y, 0.5)
            zy = F.constant_embed(y, ctx.grid, N)
            target = F.constant_embed(N.local_addition.sigma(y, v), ctx.grid, N)
            sec = F.chart_inverse(F.chart_at(zy), target)
            errs.append(_vec_dist(sec.vectors, v))
            p = int(rng.integers(ctx.grid.size))
            bad += not np.array_equal(F.evaluate(zy, p), y)
            bad += bool(np.any(F.evaluate_section(F.SampledSection.zeros(zy), p).vec))
            if np.any(v):
                bad += not np.all(np.any(zy.points != target.points, axis=1))
        out.append(_worst("constant_section_chart", N.name, errs, ctx.tol["round_tol"]))
        out.append(VerificationReport("constant_evaluation", N.name, "error", float(bad), tol=0.0))
    return out


FRAME_GRID = {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "shape": [11, 5]}


def _sphere_cover(grid):
    S = get_manifold("sphere2")
    north, south = S.atlas
    lo, hi = grid.lo, grid.hi
    mid = lambda t: lo[0] + t * (hi[0] - lo[0])
    h = grid.spacing[0]
    a = round((mid(0.6) - lo[0]) / h)
    b = round((mid(0.4) - lo[0]) / h)
    south_win = CornerGrid(lo, (lo[0] + a * h,) + hi[1:], (a + 1,) + grid.shape[1:])
    north_win = CornerGrid((lo[0] + b * h,) + lo[1:], hi, (grid.shape[0] - b,) + grid.shape[1:])
    return [(south_win, south), (north_win, north)]


@check("charts", "frame_reconstruct", 50)
def _frames(ctx, n):
    grid = CornerGrid.from_dict(FRAME_GRID)
    cover = _sphere_cover(grid)
    errs, defects = [], []
    for i in range(n):
        rng = ctx.rng("frame_reconstruct", i)
        gamma = sphere_sweep(grid, rng)
        sigma = random_section(gamma, rng, 1.0)
        frame = F.local_frame(sigma, cover)
        defects.append(F.frame_defect(frame)[0])
        errs.append(_vec_dist(F.frame_reconstruct(frame, ctx.tol["frame_tol"]).vectors, sigma.vectors))
    rng = ctx.rng("frame_reconstruct:perturbed")
    gamma = sphere_sweep(grid, rng)
    frame = F.local_frame(random_section(gamma, rng, 1.0), cover)
    sub, _ = cover[0]
    overlap = sub.box_mask(cover[1][0].lo, cover[1][0].hi)
    frame.reps[0].values[overlap] += 1e-3
    E = Euclidean(3)
    flat = F.SampledMap(grid, E, gamma.points)
    vec = smooth_field(grid, rng, 3)
    single = F.local_frame(F.SampledSection(flat, vec), [(grid, E.atlas[0])])
    return [
        _worst("frame_reconstruct", f"sphere-two-charts-{n}", errs, ctx.tol["frame_tol"]),
        _worst("frame_overlap_compatibility", f"sphere-two-charts-{n}", defects, ctx.tol["frame_tol"]),
        _expect("frame_incompatible_rejected", "overlap+1e-3", IncompatibleFrame,
                lambda: F.frame_reconstruct(frame, ctx.tol["frame_tol"])),
        VerificationReport("frame_single_chart", E.name, "error",
                           _vec_dist(single.reps[0].values, vec) +
                           _vec_dist(F.frame_reconstruct(single).vectors, vec), tol=0.0),
    ]


# ----------------------------------------------------------------- tangent

def _normalization_targets(ctx):
    out = _instances(ctx)
    for N in list(out):
        try:
            out.append(tangent_manifold(N))
        except Unsupported:
            pass
    return out


@check("tangent", "normalization", 20)
def _normalization(ctx, n):
    min_order = ctx.tol["min_order"]
    out = []
    for N in _normalization_targets(ctx):
        reps = []
        for i in range(n):
            rng = ctx.rng("normalization:" + N.name, i)
            p = N.random_point(rng)
            d = N.project_tangent(p, rng.normal(size=p.shape))
            d /= np.linalg.norm(d)
            reps.append(check_normalized(N, p, [d], min_order=min_order))
        out.append(_slowest("normalization", N.name, reps, min_order))
    S, G = get_manifold("sphere2"), get_manifold("so3")
    out.append(check_normalized(S, [0.0, 0.0, 1.0], [[1.0, 0.0, 0.0]], min_order=min_order,
                                scenario="sphere-north-e1"))
    out.append(check_normalized(G, G.group.identity, [G.generator(0)], min_order=min_order,
                                scenario="so3-identity-x"))
    out.append(check_normalized(Euclidean(2), [0.3, -1.0], [[1.0, 0.0]], steps=(1e-2, 1e-3),
                                min_order=min_order, scenario="euclidean-e1"))
    return out


@check("tangent", "tangent_identify", 20)
def _identify(ctx, n):
    cfg = FDConfig(min_order=ctx.tol["min_order"])
    out = []
    for N in _instances(ctx):
        reps = []
        for i in range(n):
            _, gamma, sigma = _chart_scenario(ctx, N, "tangent_identify", i)
            reps.append(F.tangent_identify(gamma, sigma, cfg))
        out.append(_slowest("tangent_identify", N.name, reps, cfg.min_order))
    S = get_manifold("sphere2")
    north = F.constant_embed([0.0, 0.0, 1.0], ctx.grid, S)
    out.append(F.tangent_identify(north, F.constant_section(north, [0.3, 0.0, 0.0]), cfg,
                                  scenario="sphere-north-0.3e1"))
    out.append(F.tangent_identify(north, F.SampledSection.zeros(north), cfg, scenario="zero-section"))
    return out


def _functor_maps():
    S, G, T = get_manifold("sphere2"), get_manifold("so3"), get_manifold("torus:2")
    c, s = math.cos(1.1), math.sin(1.1)
    R = np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    return [antipodal_map(S), rotation_map(S, R), quaternion_square(G), quaternion_inverse(G),
            torus_double(T), planar_polynomial(), linear_map([[2.0, -1.0], [0.5, 1.0]]),
            identity_map(S)]


@check("tangent", "tangent_functor", 20)
def _functor(ctx, n):
    cfg = FDConfig(min_order=ctx.tol["min_order"])
    maps = _functor_maps()
    reps = []
    for i in range(n):
        f = maps[i % len(maps)]
        rng = ctx.rng("tangent_functor", i)
        gamma = random_map(f.source, ctx.grid, rng)
        reps.append(F.tangent_functor_check(f, gamma, random_section(gamma, rng, 0.5), cfg))
    chain = []
    pairs = _map_pairs()
    for i in range(n):
        f, g = pairs[i % len(pairs)]
        rng = ctx.rng("pushforward_chain_rule", i)
        gamma = random_map(f.source, ctx.grid, rng)
        chain.append(F.tangent_functor_check(compose(g, f), gamma, random_section(gamma, rng, 0.5), cfg))
    return [_slowest("tangent_functor", f"random-{n}", reps, cfg.min_order),
            _slowest("pushforward_chain_rule", f"random-{n}", chain, cfg.min_order)]


@check("tangent", "smooth_map_registry", 8)
def _registry(ctx, n):
    worst = [f.validate(ctx.rng("smooth_map_registry", i), rtol=ctx.tol["fd_rtol"])
             for i, f in enumerate(_functor_maps()[:n])]
    return [_worst("smooth_map_registry", "library-maps", worst, ctx.tol["fd_rtol"])]


@check("tangent", "tangent_bundle_round_trip", 200)
def _tangent_bundle(ctx, n):
    out = []
    for N in _instances(ctx):
        try:
            T = tangent_manifold(N)
        except Unsupported:
            out.append(_expect("tangent_bundle_unsupported", N.name, Unsupported,
                               lambda N=N: tangent_manifold(N)))
            continue
        rng = ctx.rng("tangent_bundle_round_trip:" + T.name)
        la = T.local_addition
        x = T.random_point(rng, n)
        d = T.random_tangent(rng, x, 1.0)
        y = la.sigma(x, d)
        errs = np.maximum(np.linalg.norm(la.theta_inv(x, y) - d, axis=-1), T.membership_residual(y))
        out.append(_worst("tangent_bundle_round_trip", T.name, errs, ctx.tol["round_tol"]))
    return out


# ---------------------------------------------------------------- liegroup

LOOP_GRID = {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "shape": [6, 6]}


def _loops(ctx, key, i, k):
    G = get_manifold("so3")
    grid = CornerGrid.from_dict(LOOP_GRID)
    rng = ctx.rng(key, i)
    return [random_map(G, grid, rng, amp=1.0) for _ in range(k)]


@check("liegroup", "loop_group_axioms", 50)
def _axioms(ctx, n):
    G = get_manifold("so3")
    assoc, unit, inv, hom = [], [], [], 0
    for i in range(n):
        a, b, c = _loops(ctx, "loop_group_axioms", i, 3)
        e = F.loop_identity(a.grid, G)
        assoc.append(_vec_dist(F.loop_mul(F.loop_mul(a, b), c).points,
                               F.loop_mul(a, F.loop_mul(b, c)).points))
        unit.append(max(_vec_dist(F.loop_mul(a, e).points, a.points),
                        _vec_dist(F.loop_mul(e, a).points, a.points)))
        inv.append(max(_vec_dist(F.loop_mul(a, F.loop_inv(a)).points, e.points),
                       _vec_dist(F.loop_mul(F.loop_inv(a), a).points, e.points)))
        p = i % a.grid.size
        hom += not np.array_equal(F.evaluate(F.loop_mul(a, b), p),
                                  G.group.mul(F.evaluate(a, p), F.evaluate(b, p)))
    rng = ctx.rng("loop_group_axioms:constants")
    g, h = G.random_point(rng), G.random_point(rng)
    grid = CornerGrid.from_dict(LOOP_GRID)
    const = _vec_dist(F.loop_mul(F.constant_embed(g, grid, G), F.constant_embed(h, grid, G)).points,
                      F.constant_embed(G.group.mul(g, h), grid, G).points)
    tol = ctx.tol["group_tol"]
    return [
        _worst("loop_associativity", f"so3-{n}", assoc, tol),
        _worst("loop_identity", f"so3-{n}", unit, tol),
        _worst("loop_inverse", f"so3-{n}", inv, tol),
        VerificationReport("loop_constants", "so3", "error", const, tol=tol),
        VerificationReport("evaluation_homomorphism", f"so3-{n}", "error", float(hom), tol=0.0),
    ]


@check("liegroup", "identity_chart_round_trip", 50)
def _identity_chart(ctx, n):
    G = get_manifold("so3")
    grid = CornerGrid.from_dict(LOOP_GRID)
    e = F.loop_identity(grid, G)
    errs = []
    for i in range(n):
        rng = ctx.rng("identity_chart_round_trip", i)
        gamma = nearby_map(e, rng, 1.2)
        u = F.identity_chart(gamma)
        back = F.identity_chart_inverse(u, G)
        errs.append(_vec_dist(back.points, gamma.points))
    far = F.constant_embed([0.0, 1.0, 0.0, 0.0], grid, G)
    return [_worst("identity_chart_round_trip", f"so3-{n}", errs, ctx.tol["round_tol"]),
            _expect("identity_chart_rejects_far_loops", "so3-pi-rotation", OutsideChart,
                    lambda: F.identity_chart(far))]


@check("liegroup", "lie_affine_exact", 1000)
def _lie_affine(ctx, n):
    bad = 0
    for k in (1, 2, 5):
        E = Euclidean(k)
        lie = lie_local_addition(E)
        rng = ctx.rng(f"lie_affine_exact:{k}")
        p, v, q = (rng.normal(scale=3.0, size=(n, k)) for _ in range(3))
        bad += int(np.sum(lie.sigma(p, v) != E.local_addition.sigma(p, v)))
        bad += int(np.sum(lie.theta_inv(p, q) != E.local_addition.theta_inv(p, q)))
    return [VerificationReport("lie_affine_exact", "euclidean:1,2,5", "error", float(bad), tol=0.0,
                               measured=[("samples", 3 * n)])]


@check("liegroup", "lie_construction_fixtures")
def _lie_fixtures(ctx, n):
    G = get_manifold("so3")
    got = G.local_addition.sigma(G.group.identity, (math.pi / 4) * G.generator(0))
    want = np.array([math.cos(math.pi / 8), math.sin(math.pi / 8), 0.0, 0.0])
    g = G.random_point(ctx.rng("lie_construction_fixtures"))
    zero = G.local_addition.sigma(g, np.zeros(4))
    return [
        VerificationReport("lie_exp_fixture", "so3-pi/4-x", "error", _vec_dist(got, want),
                           tol=ctx.tol["group_tol"]),
        VerificationReport("lie_zero_law", "so3", "error", _vec_dist(zero, g), tol=ctx.tol["group_tol"]),
        _expect("lie_radius_cap", "so3-radius-2", ChartTooLarge,
                lambda: lie_local_addition(G, G.identity_chart, 2.0)),
    ]


# ---------------------------------------------------------------- coverage

COVERAGE = {
    "manifold-core": {
        "round trip sigma(theta_inv(p, q)) = q": ["theta_sigma_round_trip"],
        "round trip theta_inv(p, sigma(v)) = v": ["sigma_theta_round_trip"],
        "zero law": ["zero_law", "lie_zero_law"],
        "tangency closure": ["tangency_closure"],
        "normalization order": ["normalization"],
        "lie construction equals affine addition on R^n": ["lie_affine_exact"],
        "charts invert on samples, project fixes points": ["atlas_round_trip"],
    },
    "holder-spaces": {
        "oracle equivalence": ["oracle_equivalence"],
        "homogeneity and triangle": ["seminorm_homogeneity", "seminorm_triangle"],
        "monotone under restriction": ["restriction_monotone"],
        "extension isometry": ["extension_isometry"],
        "glue-restrict inverse": ["glue_restrict"],
        "pushforward derivative identity": ["pushforward_derivative"],
        "weak-integral identity": ["weak_integral"],
    },
    "mapping-manifold": {
        "chart round trips": ["chart_round_trip"],
        "transition coherence, identity and cocycle": ["transition_coherence", "transition_identity",
                                                      "transition_cocycle"],
        "functoriality": ["superpose_identity", "superpose_composition", "pushforward_chain_rule"],
        "section linear structure": ["section_linearity", "evaluation_linearity", "product_split_join"],
        "frame embedding": ["frame_reconstruct", "frame_overlap_compatibility"],
        "tangent identification and functor orders": ["tangent_identify", "tangent_functor"],
        "loop group axioms and identity chart": ["loop_associativity", "loop_identity", "loop_inverse",
                                                 "identity_chart_round_trip",
                                                 "evaluation_homomorphism"],
    },
    "numerics-harness": {
        "quadrature sanity": ["quadrature_sanity"],
        "FD sanity on registered functions": ["fd_sanity", "smooth_map_registry"],
        "report pass bits recomputable": ["report_determinism"],
    },
    "cli-runner": {
        "determinism": ["report_determinism"],
        "completeness": ["report_determinism"],
    },
}

import math

import numpy as np
import pytest

from mfmaps import mapping as F
from mfmaps.errors import (BadIndex, ChartDomainViolation, CoverageGap, DomainViolation,
                           GridMismatch, IncompatibleFrame, NotProduct, OutsideChart, OutsideOmega,
                           OutsidePrime, ValidationError)
from mfmaps.holder import CornerGrid, GridMap, SampledFunction
from mfmaps.manifolds import (ProductManifold, antipodal_map, compose, get_manifold,
                              quaternion_square, rotation_map, torus_double)
from mfmaps.numerics import FDConfig
from mfmaps.sampling import nearby_map, random_map, random_section, sphere_sweep

GRID = CornerGrid([0, 0], [1, 1], [6, 5])
TARGETS = ["euclidean:2", "sphere2", "so3", "torus:2", "sphere2*torus:1"]


def test_sampled_map_validation():
    S = get_manifold("sphere2")
    pts = np.tile([0.0, 0.0, 1.0], (GRID.size, 1))
    pts[7] = [0.0, 0.0, 1.1]
    with pytest.raises(ValidationError) as info:
        F.SampledMap(GRID, S, pts)
    assert info.value.node == 7
    with pytest.raises(ValidationError):
        F.SampledMap(GRID, S, pts[:, :2])


def test_section_tangency_checked(rng):
    gamma = random_map(get_manifold("sphere2"), GRID, rng)
    with pytest.raises(ValidationError):
        F.SampledSection(gamma, gamma.points)


@pytest.mark.parametrize("ident", TARGETS)
def test_chart_round_trips(rng, ident):
    N = get_manifold(ident)
    for _ in range(10):
        gamma = random_map(N, GRID, rng)
        chart = F.chart_at(gamma)
        sigma = random_section(gamma, rng)
        xi = F.chart_apply(chart, sigma)
        back = F.chart_inverse(chart, xi)
        assert np.max(np.abs(back.vectors - sigma.vectors)) <= 1e-10
        eta = nearby_map(gamma, rng)
        again = F.chart_apply(chart, F.chart_inverse(chart, eta))
        assert np.max(N.distance_error(again.points, eta.points)) <= 1e-10


@pytest.mark.parametrize("ident", TARGETS)
def test_transition_coherence_and_cocycle(rng, ident):
    N = get_manifold(ident)
    for _ in range(10):
        gamma = random_map(N, GRID, rng)
        xi = nearby_map(gamma, rng, 0.3)
        zeta = nearby_map(xi, rng, 0.3)
        sigma = random_section(gamma, rng, 0.3)
        tau = F.transition(gamma, xi, sigma)
        lhs = F.chart_apply(F.chart_at(xi), tau)
        rhs = F.chart_apply(F.chart_at(gamma), sigma)
        assert np.max(N.distance_error(lhs.points, rhs.points)) <= 1e-10
        direct = F.transition(gamma, zeta, sigma)
        chained = F.transition(xi, zeta, tau)
        assert np.max(np.abs(direct.vectors - chained.vectors)) <= 1e-9
        same = F.transition(gamma, gamma, sigma)
        assert np.max(np.abs(same.vectors - sigma.vectors)) <= 1e-10


def test_chart_errors(rng):
    S = get_manifold("sphere2")
    gamma = random_map(S, GRID, rng)
    chart = F.chart_at(gamma)
    far = F.SampledMap(GRID, S, -gamma.points)
    with pytest.raises(OutsidePrime):
        F.chart_inverse(chart, far)
    big = random_section(gamma, rng) * 20.0
    with pytest.raises(OutsideOmega):
        F.chart_apply(chart, big)
    other = random_map(S, GRID, rng)
    with pytest.raises(GridMismatch):
        F.chart_apply(chart, random_section(other, rng))
    coarse = random_map(S, CornerGrid([0, 0], [1, 1], [3, 3]), rng)
    with pytest.raises(GridMismatch):
        F.chart_inverse(chart, coarse)


def test_antipodal_superposition_leaves_chart(rng):
    S = get_manifold("sphere2")
    gamma = random_map(S, GRID, rng, amp=0.1)
    flipped = F.superpose(antipodal_map(S), gamma)
    with pytest.raises(OutsidePrime):
        F.chart_inverse(F.chart_at(gamma), flipped)


def test_section_arithmetic(rng):
    gamma = random_map(get_manifold("so3"), GRID, rng)
    a, b = random_section(gamma, rng), random_section(gamma, rng)
    assert np.allclose((a + b - b).vectors, a.vectors)
    assert np.array_equal((2 * a).vectors, (a * 2).vectors)
    assert np.array_equal((-a).vectors, -a.vectors)
    assert np.array_equal(F.SampledSection.zeros(gamma).vectors, np.zeros_like(gamma.points))
    with pytest.raises(GridMismatch):
        a + random_section(random_map(gamma.target, GRID, rng), rng)


def test_superposition(rng):
    S = get_manifold("sphere2")
    R = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    gamma = random_map(S, GRID, rng)
    f, g = rotation_map(S, R), antipodal_map(S)
    assert np.array_equal(F.superpose(compose(g, f), gamma).points,
                          F.superpose(g, F.superpose(f, gamma)).points)
    sigma = random_section(gamma, rng)
    pushed = F.section_pushforward(f, sigma)
    assert np.allclose(pushed.vectors, sigma.vectors @ R.T)
    with pytest.raises(DomainViolation):
        F.superpose(f, gamma, domain=lambda p: p[:, 2] > 2.0)


def test_section_pushforward_is_linear(rng):
    G = get_manifold("so3")
    f = quaternion_square(G)
    gamma = random_map(G, GRID, rng)
    a, b = random_section(gamma, rng), random_section(gamma, rng)
    lhs = F.section_pushforward(f, a * 2.0 + b).vectors
    rhs = 2.0 * F.section_pushforward(f, a).vectors + F.section_pushforward(f, b).vectors
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_precompose(rng):
    T = get_manifold("torus:2")
    gamma = random_map(T, GRID, rng)
    theta = GridMap.reflection(GRID, 1)
    once = F.precompose(theta, gamma)
    assert np.array_equal(F.precompose(theta, once).points, gamma.points)
    f = torus_double(T)
    assert np.array_equal(F.superpose(f, once).points, F.precompose(theta, F.superpose(f, gamma)).points)
    sigma = random_section(gamma, rng)
    moved = F.precompose_section(theta, sigma)
    assert np.array_equal(moved.base.points, once.points)


def test_products(rng):
    S, T = get_manifold("sphere2"), get_manifold("torus:1")
    a, b = random_map(S, GRID, rng), random_map(T, GRID, rng)
    P = ProductManifold(S, T)
    joined = F.product_join(a, b, P)
    x, y = F.product_split(joined)
    assert np.array_equal(x.points, a.points) and np.array_equal(y.points, b.points)
    sa, sb = random_section(a, rng), random_section(b, rng)
    s = F.product_join_section(sa, sb, P)
    u, v = F.product_split_section(s)
    assert np.array_equal(u.vectors, sa.vectors) and np.array_equal(v.vectors, sb.vectors)
    # charts of the product are products of charts
    moved = F.chart_apply(F.chart_at(joined), s)
    ma = F.chart_apply(F.chart_at(a), sa)
    assert np.array_equal(moved.points[:, :3], ma.points)
    with pytest.raises(NotProduct):
        F.product_split(a)
    with pytest.raises(NotProduct):
        F.product_join(b, a, P)


def test_evaluation_and_constants(rng):
    G = get_manifold("so3")
    gamma = random_map(G, GRID, rng)
    assert np.array_equal(F.evaluate(gamma, 3), gamma.points[3])
    for bad in (-1, GRID.size, 1.5, True):
        with pytest.raises(BadIndex):
            F.evaluate(gamma, bad)
    q = G.random_point(rng)
    c = F.constant_embed(q, GRID, G)
    assert all(np.array_equal(F.evaluate(c, i), q) for i in range(GRID.size))
    v = G.random_tangent(rng, q, 0.5)
    sec = F.constant_section(c, v)
    tv = F.evaluate_section(sec, 4)
    assert np.array_equal(tv.vec, v)
    moved = F.chart_apply(F.chart_at(c), sec)
    assert np.allclose(moved.points, G.local_addition.sigma(q, v), atol=0)
    with pytest.raises(ValidationError):
        F.constant_embed(np.array([2.0, 0, 0, 0]), GRID, G)


def sphere_cover(grid):
    S = get_manifold("sphere2")
    north, south = S.atlas
    x0 = grid.axes()[0]
    lo_half = CornerGrid(grid.lo, [x0[6], grid.hi[1]], [7, grid.shape[1]])
    hi_half = CornerGrid([x0[4], grid.lo[1]], grid.hi, [grid.shape[0] - 4, grid.shape[1]])
    return [(lo_half, south), (hi_half, north)]


def test_frames_on_sphere(rng):
    grid = CornerGrid([0, 0], [1, 1], [11, 5])
    gamma = sphere_sweep(grid, rng)
    cover = sphere_cover(grid)
    with pytest.raises(OutsideChart):
        get_manifold("sphere2").chart_containing(gamma.points)
    for _ in range(10):
        sigma = random_section(gamma, rng)
        frame = F.local_frame(sigma, cover)
        worst, _ = F.frame_defect(frame)
        assert worst <= 1e-10
        back = F.frame_reconstruct(frame)
        assert np.max(np.abs(back.vectors - sigma.vectors)) <= 1e-10


def test_frames_reject_mismatch(rng):
    grid = CornerGrid([0, 0], [1, 1], [11, 5])
    gamma = sphere_sweep(grid, rng)
    frame = F.local_frame(random_section(gamma, rng), sphere_cover(grid))
    frame.reps[1] = SampledFunction(frame.reps[1].grid, frame.reps[1].values + 1e-3)
    with pytest.raises(IncompatibleFrame):
        F.frame_reconstruct(frame)


def test_frame_cover_errors(rng):
    grid = CornerGrid([0, 0], [1, 1], [11, 5])
    gamma = sphere_sweep(grid, rng)
    sigma = random_section(gamma, rng)
    lo, hi = sphere_cover(grid)
    with pytest.raises(CoverageGap):
        F.local_frame(sigma, [lo])
    with pytest.raises(ChartDomainViolation):
        F.local_frame(sigma, [(lo[0], hi[1]), hi])


@pytest.mark.parametrize("ident", ["euclidean:2", "sphere2", "so3", "torus:2"])
def test_tangent_identification(rng, ident):
    N = get_manifold(ident)
    gamma = random_map(N, GRID, rng)
    assert F.tangent_identify(gamma, random_section(gamma, rng)).passed


def test_tangent_functor(rng):
    S, G = get_manifold("sphere2"), get_manifold("so3")
    R = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    for f, N in ((rotation_map(S, R), S), (antipodal_map(S), S), (quaternion_square(G), G)):
        gamma = random_map(N, GRID, rng)
        rep = F.tangent_functor_check(f, gamma, random_section(gamma, rng))
        assert rep.passed, rep


def test_fd_step_must_stay_in_omega(rng):
    S = get_manifold("sphere2")
    gamma = random_map(S, GRID, rng)
    sigma = random_section(gamma, rng)
    with pytest.raises(OutsideOmega):
        F.tangent_identify(gamma, sigma, FDConfig(steps=(20.0, 0.1)))


def test_loop_group(rng):
    G = get_manifold("so3")
    a, b, c = (random_map(G, GRID, rng) for _ in range(3))
    e = F.loop_identity(GRID, G)
    dist = lambda x, y: np.max(np.minimum(np.linalg.norm(x.points - y.points, axis=1),
                                          np.linalg.norm(x.points + y.points, axis=1)))
    assert dist(F.loop_mul(F.loop_mul(a, b), c), F.loop_mul(a, F.loop_mul(b, c))) <= 1e-12
    assert dist(F.loop_mul(a, e), a) <= 1e-12
    assert dist(F.loop_mul(a, F.loop_inv(a)), e) <= 1e-12
    S = get_manifold("sphere2")
    with pytest.raises(ValidationError):
        F.loop_mul(random_map(S, GRID, rng), random_map(S, GRID, rng))
    with pytest.raises(GridMismatch):
        F.loop_mul(random_map(S, GRID, rng), a)


def test_identity_chart(rng):
    G = get_manifold("so3")
    gamma = random_map(G, GRID, rng, amp=0.2, base=G.group.identity)
    u = F.identity_chart(gamma)
    back = F.identity_chart_inverse(u, G)
    assert np.max(np.abs(back.points - gamma.points)) <= 1e-10
    flip = F.constant_embed(np.array([0.0, 1.0, 0.0, 0.0]), GRID, G)
    with pytest.raises(OutsideChart):
        F.identity_chart(flip)
    too_big = SampledFunction(GRID, np.tile([0.0, math.pi, 0.0, 0.0], (GRID.size, 1)))
    with pytest.raises(OutsideChart):
        F.identity_chart_inverse(too_big, G)


def test_chart_fixture_north_pole():
    S = get_manifold("sphere2")
    gamma = F.constant_embed([0.0, 0.0, 1.0], GRID, S)
    xi = F.chart_apply(F.chart_at(gamma), F.constant_section(gamma, [math.pi / 2, 0.0, 0.0]))
    assert np.allclose(xi.points, [1.0, 0.0, 0.0], atol=1e-16)


def test_section_pushforward_fixture():
    from mfmaps.manifolds import square_map
    E = get_manifold("euclidean:1")
    gamma = F.constant_embed([0.75], GRID, E)
    out = F.section_pushforward(square_map(1), F.constant_section(gamma, [1.0]))
    assert np.array_equal(out.vectors, np.full((GRID.size, 1), 1.5))


def test_constant_chart_inverse_is_constant(rng):
    G = get_manifold("so3")
    y = G.random_point(rng)
    v = G.random_tangent(rng, y, 0.5)
    zeta_y = F.constant_embed(y, GRID, G)
    zeta_moved = F.constant_embed(G.local_addition.sigma(y, v), GRID, G)
    sec = F.chart_inverse(F.chart_at(zeta_y), zeta_moved)
    assert np.max(np.abs(sec.vectors - v)) <= 1e-12

import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

from mfmaps import quaternion as quat
from mfmaps.errors import (ChartTooLarge, OutsideChart, OutsideOmega, OutsidePrime, Unsupported,
                           ValidationError)
from mfmaps.manifolds import (Euclidean, FlatTorus, ProductManifold, Sphere2, TangentVector,
                              UnitQuaternions, antipodal_map, check_normalized, compose,
                              get_manifold, identity_map, lie_local_addition, linear_map,
                              planar_polynomial, quaternion_inverse, quaternion_square,
                              rotation_map, sigma_apply, sphere_inclusion, square_map,
                              tangent_manifold, theta_inverse, torus_double)

IDS = ["euclidean:2", "sphere2", "so3", "torus:2", "sphere2*torus:1", "euclidean:1*so3"]


@pytest.mark.parametrize("ident", IDS + ["Tso3", "Ttorus:2", "Teuclidean:3"])
def test_local_addition_round_trips(rng, ident):
    N = tangent_manifold(get_manifold(ident[1:])) if ident.startswith("T") else get_manifold(ident)
    la = N.local_addition
    p = N.random_point(rng, 200)
    v = N.random_tangent(rng, p, 0.9)
    assert np.all(la.omega_contains(p, v))
    q = la.sigma(p, v)
    assert np.all(N.contains(q))
    w = la.theta_inv(p, q)
    assert np.all(N.is_tangent(p, w))
    assert np.max(np.abs(w - v)) <= 1e-10
    assert np.max(N.distance_error(la.sigma(p, w), q)) <= 1e-10
    assert np.max(N.distance_error(la.sigma(p, N.zero(p)), p)) <= 1e-15


def test_sphere_exponential_fixture():
    S = get_manifold("sphere2")
    north = np.array([0.0, 0.0, 1.0])
    q = S.local_addition.sigma(north, np.array([math.pi / 2, 0.0, 0.0]))
    assert np.allclose(q, [1.0, 0.0, 0.0], atol=1e-16)
    assert np.allclose(S.local_addition.theta_inv(north, q), [math.pi / 2, 0, 0], atol=1e-15)


def test_sphere_rejects_cut_locus():
    S = get_manifold("sphere2")
    p = np.array([0.0, 0.0, 1.0])
    with pytest.raises(OutsidePrime):
        theta_inverse(S, p, -p)
    with pytest.raises(OutsideOmega):
        sigma_apply(S, TangentVector(p, np.array([math.pi - 0.05, 0.0, 0.0])))


def test_tangent_vector_shapes():
    with pytest.raises(ValidationError):
        TangentVector(np.zeros(3), np.zeros(2))


def test_so3_generator_is_unit_speed_rotation():
    G = get_manifold("so3")
    e = G.group.identity
    for axis in range(3):
        for t in (0.1, 0.7, 1.4):
            q = G.local_addition.sigma(e, t * G.generator(axis))
            K = np.zeros((3, 3))
            K[(axis + 1) % 3, (axis + 2) % 3] = -1.0
            K[(axis + 2) % 3, (axis + 1) % 3] = 1.0
            R = expm(t * K)
            assert np.allclose(Rotation.from_quat(np.roll(q, -1)).as_matrix(), R, atol=1e-14)


def test_so3_left_translation_commutes(rng):
    G = get_manifold("so3")
    la = G.local_addition
    g = G.random_point(rng, 20)
    h = G.random_point(rng, 20)
    v = G.random_tangent(rng, g, 1.0)
    lhs = G.group.mul(h, la.sigma(g, v))
    rhs = la.sigma(G.group.mul(h, g), G.group.translate(h, v))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_so3_radius_cap():
    G = get_manifold("so3")
    with pytest.raises(ChartTooLarge):
        lie_local_addition(G, radius=2.0)
    with pytest.raises(ChartTooLarge):
        lie_local_addition(G, radius=0.0)
    small = lie_local_addition(G, radius=0.3)
    e = G.group.identity
    unit = 2 * G.generator(0)
    assert not small.omega_contains(e, 0.31 * unit)
    assert small.omega_contains(e, 0.29 * unit)


def test_euclidean_lie_addition_is_affine(rng):
    for n in (1, 2, 5):
        E = Euclidean(n)
        la = lie_local_addition(E)
        p, v = rng.normal(size=(2, 50, n))
        assert np.array_equal(la.sigma(p, v), p + v)
        assert np.array_equal(la.theta_inv(p, p + v), (p + v) - p)


def test_sphere_has_no_group():
    with pytest.raises(Unsupported):
        lie_local_addition(get_manifold("sphere2"))


def test_torus_wraps():
    T = get_manifold("torus:2")
    p = np.array([0.1, 2 * math.pi - 0.1])
    q = T.local_addition.sigma(p, np.array([-0.3, 0.3]))
    assert np.allclose(q, [2 * math.pi - 0.2, 0.2])
    assert np.allclose(T.local_addition.theta_inv(p, q), [-0.3, 0.3])
    assert not T.local_addition.omega_contains(p, np.array([1.6, 0.0]))
    assert not T.contains(np.array([7.0, 0.0]))


@pytest.mark.parametrize("ident", IDS + ["so3*so3"])
def test_atlas_round_trip(rng, ident):
    N = get_manifold(ident)
    p = N.random_point(rng, 300)
    for chart in N.atlas:
        inside = chart.contains(p)
        if not inside.any():
            continue
        q = p[inside]
        u = chart.apply(q)
        assert np.max(N.distance_error(chart.inverse(u), q)) <= 1e-12
        v = N.random_tangent(rng, q, 1.0)
        assert np.max(np.abs(chart.pull(u, chart.push(q, v)) - v)) <= 1e-10
    for x in p:
        N.chart_containing(x[None])


def test_sphere_chart_gap():
    S = Sphere2(chart_cap=-0.5)
    with pytest.raises(OutsideChart):
        S.chart_containing(np.array([[1.0, 0.0, 0.0]]))


def test_manifold_ids():
    assert get_manifold("sphere2") is get_manifold("sphere2")
    assert isinstance(get_manifold("torus:3"), FlatTorus)
    assert isinstance(get_manifold("so3"), UnitQuaternions)
    P = get_manifold("sphere2*euclidean:2")
    assert isinstance(P, ProductManifold) and P.embed_dim == 5 and P.dim == 4
    for bad in ("klein", "euclidean:x", "torus:0", "sphere2:3", "", "so3*"):
        with pytest.raises(ValidationError):
            get_manifold(bad)


def test_tangent_manifolds():
    assert tangent_manifold(Euclidean(2)).embed_dim == 4
    assert tangent_manifold(FlatTorus(2)).factors[1].name == "euclidean:2"
    assert tangent_manifold(UnitQuaternions()).embed_dim == 8
    with pytest.raises(Unsupported):
        tangent_manifold(get_manifold("sphere2"))


@pytest.mark.parametrize("ident", ["euclidean:2", "sphere2", "so3", "torus:2"])
def test_normalized(rng, ident):
    N = get_manifold(ident)
    p = N.random_point(rng)
    dirs = [N.random_tangent(rng, p, 1.0) for _ in range(3)]
    assert check_normalized(N, p, dirs).passed


def test_tso3_normalized(rng):
    T = tangent_manifold(get_manifold("so3"))
    p = T.random_point(rng)
    dirs = [T.project_tangent(p, rng.normal(size=8)) * 0.5 for _ in range(3)]
    assert check_normalized(T, p, dirs).passed


def library(rng):
    S, G, T = get_manifold("sphere2"), get_manifold("so3"), get_manifold("torus:2")
    R = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
    return [identity_map(S), antipodal_map(S), rotation_map(S, R), quaternion_square(G),
            quaternion_inverse(G), linear_map(rng.normal(size=(2, 3))), square_map(2),
            torus_double(T), sphere_inclusion(S), planar_polynomial(),
            compose(antipodal_map(S), rotation_map(S, R))]


def test_map_library_tangents(rng):
    for f in library(rng):
        assert f.validate(rng, probes=10) <= 1e-5, f


def test_wrong_tangent_detected(rng):
    S = get_manifold("sphere2")
    bad = antipodal_map(S)
    bad.tangent = lambda p, v: v
    with pytest.raises(ValidationError):
        bad.validate(rng, probes=3)


def test_lift_acts_on_tangent_bundle(rng):
    G = get_manifold("so3")
    Tf = quaternion_square(G).lift()
    T = Tf.source
    x = T.random_point(rng, 10)
    assert np.all(Tf.target.contains(Tf(x), tol=1e-12))
    q = quat.normalize(rng.normal(size=4))
    assert np.allclose(Tf(np.concatenate([q, np.zeros(4)]))[4:], 0.0)


def test_sphere_quarter_turn_matches_rotation():
    S = get_manifold("sphere2")
    p = np.array([1.0, 0.0, 0.0])
    q = sigma_apply(S, TangentVector(p, np.array([0.0, math.pi / 2, 0.0])))
    R = Rotation.from_rotvec([0.0, 0.0, math.pi / 2]).as_matrix()
    assert np.allclose(q, R @ p, rtol=0, atol=1e-15)


def test_so3_exp_fixture():
    G = get_manifold("so3")
    q = G.local_addition.sigma(G.group.identity, (math.pi / 4) * G.generator(0))
    assert np.allclose(q, [math.cos(math.pi / 8), math.sin(math.pi / 8), 0, 0], atol=1e-16)


def test_normalized_fixture_slopes():
    S, G = get_manifold("sphere2"), get_manifold("so3")
    rep = check_normalized(S, np.array([0.0, 0.0, 1.0]), [np.array([1.0, 0.0, 0.0])])
    assert abs(rep.order - 2.0) < 0.05
    rep = check_normalized(G, G.group.identity, [G.generator(0)])
    assert abs(rep.order - 2.0) < 0.05

"""Finite-dimensional target manifolds with charts and normalized local additions.

Points and tangent vectors are plain float arrays in ambient coordinates with
arbitrary leading batch axes: points have shape ``(..., embed_dim)`` and a
tangent vector at ``p`` is an ambient array of the same shape. Instances are
addressed by string ids: ``"euclidean:n"``, ``"sphere2"``, ``"so3"``,
``"torus:n"``.

``so3`` is realized on unit quaternions, so ``q`` and ``-q`` are distinct
points; its local addition is the Lie-group construction ``g * exp(g^-1 v)``
built by :func:`lie_local_addition` from the logarithm chart at the identity.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import quaternion as quat
from .errors import (ChartTooLarge, OutsideChart, OutsideOmega, OutsidePrime,
                     Unsupported, ValidationError)
from .numerics import FDConfig, VerificationReport, fd_directional, fd_report

POINT_TOL = 1e-9
ROUND_TOL = 1e-10
SPHERE_MARGIN = 0.1
SO3_RADIUS_CAP = math.pi / 2
TORUS_RADIUS = math.pi / 2
TWO_PI = 2.0 * math.pi


def _norm(x):
    return np.linalg.norm(x, axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _shape(size, k):
    if size is None or size == ():
        return (k,)
    return tuple(np.atleast_1d(size).astype(int).tolist()) + (k,)


@dataclass
class TangentVector:
    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.vec = np.asarray(self.vec, dtype=float)
        if self.base.shape != self.vec.shape:
            raise ValidationError(f"base {self.base.shape} and vector {self.vec.shape} shapes differ")


class Chart:
    """Coordinate chart ``phi: U -> R^dim`` with its tangent maps.

    ``push(p, v)`` is ``dphi_p(v)``; ``pull(u, w)`` is ``T(phi^-1)`` at
    coordinates ``u`` applied to ``w`` and returns an ambient vector.
    """

    def __init__(self, name, dim, contains, apply, inverse, push, pull):
        self.name = name
        self.dim = dim
        self.contains = contains
        self.apply = apply
        self.inverse = inverse
        self.push = push
        self.pull = pull

    def __repr__(self):
        return f"Chart({self.name})"


class IdentityChart:
    """Chart at the neutral element with values in the ambient copy of ``T_e G``.

    ``cap`` is the largest radius on which the inverse is injective.
    """

    def __init__(self, apply, inverse, cap, radius=None):
        self.apply = apply
        self.inverse = inverse
        self.cap = cap
        self.radius = cap if radius is None else radius

    def image_contains(self, v):
        return _norm(v) < self.radius

    def contains(self, g):
        return self.image_contains(self.apply(g))


@dataclass
class LieGroupOps:
    identity: np.ndarray
    mul: object
    inv: object
    translate: object  # tangent map of left translation: (g, v) -> g.v


class LocalAddition:
    """``Sigma`` on ``Omega`` with its inverse ``theta^-1`` on ``Omega'``."""

    def __init__(self, sigma, theta_inv, omega_contains, prime_contains, normalized=True, name=""):
        self.sigma = sigma
        self.theta_inv = theta_inv
        self.omega_contains = omega_contains
        self.prime_contains = prime_contains
        self.normalized = normalized
        self.name = name

    def __repr__(self):
        return f"LocalAddition({self.name})"


class ManifoldSpec:
    """Embedded manifold with a finite atlas and a normalized local addition."""

    name = "manifold"
    dim = 0
    embed_dim = 0
    group = None
    factors = None

    def __init__(self, point_tol=POINT_TOL, round_tol=ROUND_TOL):
        self.point_tol = point_tol
        self.round_tol = round_tol
        self.atlas = []
        self.local_addition = None

    def __repr__(self):
        return f"ManifoldSpec({self.name})"

    def membership_residual(self, x):
        raise NotImplementedError

    def tangent_residual(self, p, v):
        raise NotImplementedError

    def contains(self, x, tol=None):
        tol = self.point_tol if tol is None else tol
        return self.membership_residual(np.asarray(x, dtype=float)) <= tol

    def is_tangent(self, p, v, tol=None):
        tol = self.point_tol if tol is None else tol
        return self.tangent_residual(np.asarray(p, dtype=float), np.asarray(v, dtype=float)) <= tol

    def project(self, x):
        return np.asarray(x, dtype=float)

    def project_tangent(self, p, v):
        return np.asarray(v, dtype=float)

    def chord(self, p, q):
        """Ambient displacement from ``p`` to ``q``."""
        return np.asarray(q, dtype=float) - np.asarray(p, dtype=float)

    def distance_error(self, p, q):
        return _norm(self.chord(p, q))

    def zero(self, p):
        return np.zeros_like(np.asarray(p, dtype=float))

    def random_point(self, rng, size=()):
        raise NotImplementedError

    def random_tangent(self, rng, p, scale=1.0):
        """Tangent vectors at ``p`` with norms uniform in ``[0, scale)``."""
        p = np.asarray(p, dtype=float)
        v = self.project_tangent(p, rng.normal(size=p.shape))
        n = _norm(v)[..., None]
        r = scale * rng.uniform(size=p.shape[:-1] + (1,))
        return np.where(n > 0, v / np.where(n > 0, n, 1.0), 0.0) * r

    def chart_containing(self, p):
        """First atlas chart whose domain holds every given point."""
        for chart in self.atlas:
            if np.all(chart.contains(p)):
                return chart
        raise OutsideChart(f"no single chart of {self.name} contains the points")


class Euclidean(ManifoldSpec):
    def __init__(self, n, **kw):
        super().__init__(**kw)
        self.n = int(n)
        self.dim = self.embed_dim = self.n
        self.name = f"euclidean:{self.n}"
        ident = lambda x: np.asarray(x, dtype=float)
        self.atlas = [Chart("identity", self.n, lambda p: np.ones(np.shape(p)[:-1], bool),
                            ident, ident, lambda p, v: ident(v), lambda u, w: ident(w))]
        self.group = LieGroupOps(
            identity=np.zeros(self.n),
            mul=lambda a, b: np.asarray(a, dtype=float) + np.asarray(b, dtype=float),
            inv=lambda a: -np.asarray(a, dtype=float),
            translate=lambda g, v: np.asarray(v, dtype=float),
        )
        self.identity_chart = IdentityChart(ident, ident, cap=math.inf)
        self.local_addition = LocalAddition(
            sigma=lambda p, v: p + v,
            theta_inv=lambda p, q: q - p,
            omega_contains=lambda p, v: np.ones(np.shape(v)[:-1], bool),
            prime_contains=lambda p, q: np.ones(np.shape(q)[:-1], bool),
            name="affine",
        )

    def membership_residual(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.all(np.isfinite(x), axis=-1), 0.0, np.inf)

    def tangent_residual(self, p, v):
        return np.zeros(np.shape(v)[:-1])

    def random_point(self, rng, size=()):
        return rng.normal(size=_shape(size, self.n))


def _stereo(sign):
    """Stereographic projection from the pole ``(0, 0, sign)``."""

    def apply(p):
        p = np.asarray(p, dtype=float)
        return p[..., :2] / (1.0 - sign * p[..., 2:3])

    def inverse(u):
        u = np.asarray(u, dtype=float)
        s = 1.0 + _dot(u, u)[..., None]
        return np.concatenate([2.0 * u / s, sign * (s - 2.0) / s], axis=-1)

    def push(p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        d = 1.0 - sign * p[..., 2:3]
        return v[..., :2] / d + sign * p[..., :2] * v[..., 2:3] / d ** 2

    def pull(u, w):
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        s = 1.0 + _dot(u, u)[..., None]
        uw = _dot(u, w)[..., None]
        return np.concatenate([2.0 * w / s - 4.0 * u * uw / s ** 2, sign * 4.0 * uw / s ** 2], axis=-1)

    return apply, inverse, push, pull


class Sphere2(ManifoldSpec):
    """Unit sphere in R^3 with the geodesic exponential as local addition.

    ``Omega`` holds vectors shorter than ``pi - margin`` and ``Omega'`` pairs
    at angle below ``pi - margin``, keeping ``theta^-1`` away from the cut locus.
    """

    name = "sphere2"
    dim = 2
    embed_dim = 3

    def __init__(self, margin=SPHERE_MARGIN, chart_cap=0.5, **kw):
        super().__init__(**kw)
        self.margin = margin
        self.max_angle = math.pi - margin
        north = _stereo(1.0)
        south = _stereo(-1.0)
        self.atlas = [
            Chart("stereo-north", 2, lambda p: np.asarray(p)[..., 2] < chart_cap, *north),
            Chart("stereo-south", 2, lambda p: np.asarray(p)[..., 2] > -chart_cap, *south),
        ]
        self.local_addition = LocalAddition(
            sigma=self._exp,
            theta_inv=self._log,
            omega_contains=lambda p, v: _norm(v) < self.max_angle,
            prime_contains=lambda p, q: self._angle(p, q) < self.max_angle,
            name="geodesic exponential",
        )

    @staticmethod
    def _exp(p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        a = _norm(v)[..., None]
        return np.cos(a) * p + np.sinc(a / np.pi) * v

    @staticmethod
    def _angle(p, q):
        c = _dot(p, q)
        s = _norm(q - c[..., None] * p)
        return np.arctan2(s, c)

    @staticmethod
    def _log(p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        c = _dot(p, q)[..., None]
        w = q - c * p
        s = _norm(w)[..., None]
        angle = np.arctan2(s, c)
        factor = np.where(s > 0, angle / np.where(s > 0, s, 1.0), 1.0)
        return factor * w

    def membership_residual(self, x):
        return np.abs(_norm(x) - 1.0)

    def tangent_residual(self, p, v):
        return np.abs(_dot(p, v))

    def project(self, x):
        x = np.asarray(x, dtype=float)
        return x / _norm(x)[..., None]

    def project_tangent(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        return v - _dot(p, v)[..., None] * p

    def random_point(self, rng, size=()):
        return self.project(rng.normal(size=_shape(size, 3)))


def _quat_chart(center):
    """Logarithm chart centred at the unit quaternion ``center``."""
    c = np.asarray(center, dtype=float)
    cbar = quat.qconj(c)

    def contains(p):
        return _dot(np.asarray(p, dtype=float), c) > 0.25

    def apply(p):
        return quat.qlog(quat.qmul(cbar, p))

    def inverse(u):
        return quat.qmul(c, quat.qexp(u))

    def push(p, v):
        return quat.dlog(quat.qmul(cbar, p), quat.qmul(cbar, v))

    def pull(u, w):
        return quat.qmul(c, quat.dexp(u, w))

    return contains, apply, inverse, push, pull


class UnitQuaternions(ManifoldSpec):
    """``so3``: the unit quaternion group with left-translated exponential."""

    name = "so3"
    dim = 3
    embed_dim = 4

    def __init__(self, radius=SO3_RADIUS_CAP, **kw):
        super().__init__(**kw)
        centers = []
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1.0
            centers += [e, -e]
        self.atlas = [Chart(f"log@{c.tolist()}", 3, *_quat_chart(c)) for c in centers]
        self.group = LieGroupOps(
            identity=np.array([1.0, 0.0, 0.0, 0.0]),
            mul=lambda a, b: quat.normalize(quat.qmul(a, b)),
            inv=quat.qconj,
            translate=quat.qmul,
        )
        self.identity_chart = IdentityChart(
            apply=lambda g: quat.pure(quat.qlog(g)),
            inverse=lambda v: quat.qexp(np.asarray(v, dtype=float)[..., 1:]),
            cap=SO3_RADIUS_CAP,
        )
        self.local_addition = lie_local_addition(self, self.identity_chart, radius)

    @staticmethod
    def generator(axis):
        """Ambient tangent vector at the identity of the unit-speed rotation about ``axis``."""
        v = np.zeros(4)
        v[1 + axis] = 0.5
        return v

    def membership_residual(self, x):
        return np.abs(_norm(x) - 1.0)

    def tangent_residual(self, p, v):
        return np.abs(_dot(p, v))

    def project(self, x):
        return quat.normalize(x)

    def project_tangent(self, p, v):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        return v - _dot(p, v)[..., None] * p

    def random_point(self, rng, size=()):
        return quat.normalize(rng.normal(size=_shape(size, 4)))


def _wrap(d):
    """Representative of an angle difference in ``[-pi, pi)``."""
    return np.mod(np.asarray(d, dtype=float) + math.pi, TWO_PI) - math.pi


class FlatTorus(ManifoldSpec):
    """``(R / 2 pi Z)^n`` in angle coordinates ``[0, 2 pi)``.

    ``Omega`` holds vectors of sup-norm below ``pi / 2``.
    """

    def __init__(self, n, radius=TORUS_RADIUS, **kw):
        super().__init__(**kw)
        self.n = int(n)
        self.dim = self.embed_dim = self.n
        self.name = f"torus:{self.n}"
        self.radius = radius
        shifts = np.array(np.meshgrid(*[[0.0, math.pi]] * self.n, indexing="ij")).reshape(self.n, -1).T
        self.atlas = [self._chart(s) for s in shifts]
        self.local_addition = LocalAddition(
            sigma=lambda p, v: np.mod(p + v, TWO_PI),
            theta_inv=lambda p, q: _wrap(q - p),
            omega_contains=lambda p, v: np.max(np.abs(v), axis=-1) < self.radius,
            prime_contains=lambda p, q: np.max(np.abs(_wrap(q - p)), axis=-1) < self.radius,
            name="angle addition",
        )

    @staticmethod
    def _chart(shift):
        def contains(p):
            return np.all(np.abs(_wrap(np.asarray(p) - shift)) < 2.5, axis=-1)

        return Chart(f"angles-{shift.tolist()}", len(shift), contains,
                     lambda p: _wrap(np.asarray(p, dtype=float) - shift),
                     lambda u: np.mod(np.asarray(u, dtype=float) + shift, TWO_PI),
                     lambda p, v: np.asarray(v, dtype=float),
                     lambda u, w: np.asarray(w, dtype=float))

    def membership_residual(self, x):
        x = np.asarray(x, dtype=float)
        below = np.maximum(0.0, -x)
        above = np.maximum(0.0, x - TWO_PI)
        return np.max(np.maximum(below, above), axis=-1)

    def tangent_residual(self, p, v):
        return np.zeros(np.shape(v)[:-1])

    def project(self, x):
        return np.mod(np.asarray(x, dtype=float), TWO_PI)

    def chord(self, p, q):
        return _wrap(np.asarray(q, dtype=float) - np.asarray(p, dtype=float))

    def random_point(self, rng, size=()):
        return rng.uniform(0.0, TWO_PI, size=_shape(size, self.n))

    def random_tangent(self, rng, p, scale=1.0):
        # sup-norm ball, matching the shape of Omega
        p = np.asarray(p, dtype=float)
        return rng.uniform(-scale, scale, size=p.shape)


class ProductManifold(ManifoldSpec):
    """``N1 x N2`` with ambient coordinates concatenated."""

    def __init__(self, first, second, **kw):
        super().__init__(**kw)
        self.factors = (first, second)
        self.split_at = first.embed_dim
        self.dim = first.dim + second.dim
        self.embed_dim = first.embed_dim + second.embed_dim
        self.name = f"{first.name}*{second.name}"
        k = self.split_at
        la1, la2 = first.local_addition, second.local_addition

        def both(f1, f2, combine):
            return lambda p, v: combine(f1(p[..., :k], v[..., :k]), f2(p[..., k:], v[..., k:]))

        cat = lambda a, b: np.concatenate([a, b], axis=-1)
        land = lambda a, b: a & b
        self.local_addition = LocalAddition(
            sigma=both(la1.sigma, la2.sigma, cat),
            theta_inv=both(la1.theta_inv, la2.theta_inv, cat),
            omega_contains=both(la1.omega_contains, la2.omega_contains, land),
            prime_contains=both(la1.prime_contains, la2.prime_contains, land),
            normalized=la1.normalized and la2.normalized,
            name=f"{la1.name} x {la2.name}",
        )
        self.atlas = [self._chart(c1, c2) for c1 in first.atlas for c2 in second.atlas]

    def _chart(self, c1, c2):
        k, d = self.split_at, c1.dim
        cat = lambda a, b: np.concatenate([a, b], axis=-1)
        return Chart(
            f"{c1.name} x {c2.name}", c1.dim + c2.dim,
            lambda p: c1.contains(p[..., :k]) & c2.contains(p[..., k:]),
            lambda p: cat(c1.apply(p[..., :k]), c2.apply(p[..., k:])),
            lambda u: cat(c1.inverse(u[..., :d]), c2.inverse(u[..., d:])),
            lambda p, v: cat(c1.push(p[..., :k], v[..., :k]), c2.push(p[..., k:], v[..., k:])),
            lambda u, w: cat(c1.pull(u[..., :d], w[..., :d]), c2.pull(u[..., d:], w[..., d:])),
        )

    def split(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., :self.split_at], x[..., self.split_at:]

    def membership_residual(self, x):
        a, b = self.split(x)
        return np.maximum(self.factors[0].membership_residual(a), self.factors[1].membership_residual(b))

    def tangent_residual(self, p, v):
        (p1, p2), (v1, v2) = self.split(p), self.split(v)
        return np.maximum(self.factors[0].tangent_residual(p1, v1),
                          self.factors[1].tangent_residual(p2, v2))

    def project(self, x):
        a, b = self.split(x)
        return np.concatenate([self.factors[0].project(a), self.factors[1].project(b)], axis=-1)

    def project_tangent(self, p, v):
        (p1, p2), (v1, v2) = self.split(p), self.split(v)
        return np.concatenate([self.factors[0].project_tangent(p1, v1),
                               self.factors[1].project_tangent(p2, v2)], axis=-1)

    def chord(self, p, q):
        (p1, p2), (q1, q2) = self.split(p), self.split(q)
        return np.concatenate([self.factors[0].chord(p1, q1), self.factors[1].chord(p2, q2)], axis=-1)

    def random_point(self, rng, size=()):
        return np.concatenate([f.random_point(rng, size) for f in self.factors], axis=-1)

    def random_tangent(self, rng, p, scale=1.0):
        p1, p2 = self.split(p)
        return np.concatenate([self.factors[0].random_tangent(rng, p1, scale),
                               self.factors[1].random_tangent(rng, p2, scale)], axis=-1)


class TangentUnitQuaternions(ManifoldSpec):
    """Tangent bundle of ``so3``, points ``(g, v)`` in R^8 with ``<g, v> = 0``.

    Left trivialization ``(g, v) -> (g, g^-1 v)`` identifies it with
    ``G x g``; the local addition moves ``g`` by the group local addition and
    translates the Lie-algebra component.
    """

    dim = 6
    embed_dim = 8

    def __init__(self, base: UnitQuaternions, **kw):
        super().__init__(**kw)
        self.base = base
        self.name = f"T{base.name}"
        la = base.local_addition

        def parts(x):
            x = np.asarray(x, dtype=float)
            return x[..., :4], x[..., 4:]

        def sigma(p, d):
            (g, v), (dg, dv) = parts(p), parts(d)
            gi = quat.qconj(g)
            xi = quat.qmul(gi, v)
            dxi = quat.qmul(gi, dv) - quat.qmul(quat.qmul(gi, dg), xi)
            h = la.sigma(g, dg)
            w = quat.qmul(h, xi + dxi)
            return np.concatenate([h, w], axis=-1)

        def theta_inv(p, q):
            (g, v), (h, w) = parts(p), parts(q)
            dg = la.theta_inv(g, h)
            gi = quat.qconj(g)
            xi = quat.qmul(gi, v)
            dxi = quat.qmul(quat.qconj(h), w) - xi
            dv = quat.qmul(g, dxi) + quat.qmul(dg, xi)
            return np.concatenate([dg, dv], axis=-1)

        self._parts = parts
        self.local_addition = LocalAddition(
            sigma=sigma, theta_inv=theta_inv,
            omega_contains=lambda p, d: la.omega_contains(parts(p)[0], parts(d)[0]),
            prime_contains=lambda p, q: la.prime_contains(parts(p)[0], parts(q)[0]),
            name="left-trivialized",
        )
        self.atlas = [self._chart(c) for c in base.atlas]

    def _chart(self, c):
        parts = self._parts

        def apply(p):
            g, v = parts(p)
            return np.concatenate([c.apply(g), quat.qmul(quat.qconj(g), v)[..., 1:]], axis=-1)

        def inverse(u):
            g = c.inverse(u[..., :3])
            return np.concatenate([g, quat.qmul(g, quat.pure(u[..., 3:]))], axis=-1)

        def push(p, d):
            (g, v), (dg, dv) = parts(p), parts(d)
            gi = quat.qconj(g)
            dxi = quat.qmul(quat.qconj(dg), v) + quat.qmul(gi, dv)
            return np.concatenate([c.push(g, dg), dxi[..., 1:]], axis=-1)

        def pull(u, w):
            g = c.inverse(u[..., :3])
            dg = c.pull(u[..., :3], w[..., :3])
            xi = quat.pure(u[..., 3:])
            dv = quat.qmul(dg, xi) + quat.qmul(g, quat.pure(w[..., 3:]))
            return np.concatenate([dg, dv], axis=-1)

        return Chart(f"T{c.name}", 6, lambda p: c.contains(parts(p)[0]), apply, inverse, push, pull)

    def membership_residual(self, x):
        g, v = self._parts(x)
        return np.maximum(np.abs(_norm(g) - 1.0), np.abs(_dot(g, v)))

    def tangent_residual(self, p, d):
        (g, v), (dg, dv) = self._parts(p), self._parts(d)
        return np.maximum(np.abs(_dot(g, dg)), np.abs(_dot(dg, v) + _dot(g, dv)))

    def project(self, x):
        g, v = self._parts(x)
        g = quat.normalize(g)
        return np.concatenate([g, v - _dot(g, v)[..., None] * g], axis=-1)

    def project_tangent(self, p, d):
        (g, v), (dg, dv) = self._parts(p), self._parts(d)
        dg = dg - _dot(g, dg)[..., None] * g
        dv = dv - (_dot(dg, v) + _dot(g, dv))[..., None] * g
        return np.concatenate([dg, dv], axis=-1)

    def random_point(self, rng, size=()):
        g = self.base.random_point(rng, size)
        v = self.base.random_tangent(rng, g, 1.0)
        return np.concatenate([g, v], axis=-1)


def lie_local_addition(G: ManifoldSpec, chart: IdentityChart | None = None, radius=None) -> LocalAddition:
    """Local addition ``v -> g * phi^-1(g^-1 . v)`` for a Lie group ``G``, ``g = pi(v)``.

    ``chart`` sends a neighbourhood of the identity into the ambient copy of
    the tangent space at the identity with ``phi(e) = 0``; ``Omega`` is the
    union of the left translates of the ball of ``radius``.
    """
    ops = G.group
    if ops is None:
        raise Unsupported(f"{G.name} carries no group structure")
    chart = chart or G.identity_chart
    radius = chart.cap if radius is None else float(radius)
    if not radius > 0:
        raise ChartTooLarge("radius must be positive")
    if radius > chart.cap:
        raise ChartTooLarge(f"radius {radius} exceeds the injectivity cap {chart.cap} of {G.name}")
    chart = IdentityChart(chart.apply, chart.inverse, chart.cap, radius)

    def sigma(g, v):
        return ops.mul(g, chart.inverse(ops.translate(ops.inv(g), v)))

    def theta_inv(g, h):
        return ops.translate(g, chart.apply(ops.mul(ops.inv(g), h)))

    return LocalAddition(
        sigma=sigma,
        theta_inv=theta_inv,
        omega_contains=lambda g, v: chart.image_contains(ops.translate(ops.inv(g), v)),
        prime_contains=lambda g, h: chart.contains(ops.mul(ops.inv(g), h)),
        normalized=True,
        name=f"lie({G.name}, r={radius:g})",
    )


@functools.lru_cache(maxsize=None)
def get_manifold(ident: str) -> ManifoldSpec:
    """Instance for a string id such as ``"sphere2"`` or ``"torus:2"``."""
    if "*" in ident:
        first, _, second = ident.partition("*")
        return ProductManifold(get_manifold(first), get_manifold(second))
    name, _, arg = ident.strip().partition(":")
    if name in ("euclidean", "torus"):
        try:
            n = int(arg)
        except ValueError:
            n = 0
        if n < 1:
            raise ValidationError(f"bad manifold id {ident!r}: need a positive dimension")
        return Euclidean(n) if name == "euclidean" else FlatTorus(n)
    if name == "sphere2" and not arg:
        return Sphere2()
    if name == "so3" and not arg:
        return UnitQuaternions()
    raise ValidationError(f"unknown manifold id {ident!r}")


def tangent_manifold(N: ManifoldSpec) -> ManifoldSpec:
    """``TN`` with a local addition; points are ``(p, v)`` concatenated."""
    if isinstance(N, Euclidean):
        T = Euclidean(2 * N.n)
        T.name = f"T{N.name}"
        return T
    if isinstance(N, FlatTorus):
        T = ProductManifold(N, Euclidean(N.n))
        T.name = f"T{N.name}"
        return T
    if isinstance(N, UnitQuaternions):
        return TangentUnitQuaternions(N)
    raise Unsupported(f"no tangent-bundle local addition for {N.name}")


def product_manifold(first: ManifoldSpec, second: ManifoldSpec) -> ProductManifold:
    return ProductManifold(first, second)


def sigma_apply(N: ManifoldSpec, v: TangentVector) -> np.ndarray:
    la = N.local_addition
    ok = np.atleast_1d(la.omega_contains(v.base, v.vec))
    if not ok.all():
        raise OutsideOmega("tangent vector outside Omega", node=int(np.flatnonzero(~ok)[0]))
    return la.sigma(v.base, v.vec)


def theta_inverse(N: ManifoldSpec, p, q) -> TangentVector:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    la = N.local_addition
    ok = np.atleast_1d(la.prime_contains(p, q))
    if not ok.all():
        raise OutsidePrime("point pair outside Omega'", node=int(np.flatnonzero(~ok)[0]))
    return TangentVector(p, la.theta_inv(p, q))


def check_normalized(N: ManifoldSpec, p, dirs, steps=(1e-2, 1e-3, 1e-4),
                     min_order=1.8, scenario="") -> VerificationReport:
    """FD of ``h -> Sigma(h * dir)`` at 0 should reproduce ``dir``."""
    cfg = FDConfig(steps=steps, min_order=min_order)
    p = np.asarray(p, dtype=float)
    la = N.local_addition
    worst = None
    for d in dirs:
        d = np.asarray(d, dtype=float)
        if not np.all(la.omega_contains(p, cfg.steps[0] * d)):
            raise OutsideOmega("largest step leaves Omega")
        res = fd_directional(lambda s: la.sigma(p, s * d), 0.0, 1.0, cfg, exact=d, chord=N.chord)
        if worst is None or res.order < worst.order:
            worst = res
    return fd_report("normalized", scenario, worst, min_order)


class SmoothMap:
    """Smooth map between manifolds with its hand-coded tangent map.

    ``fn`` acts on ambient points and ``tangent(p, v)`` returns ``Tf(v)`` at
    ``f(p)``; both are vectorized over leading axes.
    """

    def __init__(self, source, target, fn, tangent=None, name=""):
        self.source = source
        self.target = target
        self.fn = fn
        self.tangent = tangent
        self.name = name

    def __repr__(self):
        return f"SmoothMap({self.name}: {self.source.name} -> {self.target.name})"

    def __call__(self, p):
        return self.fn(np.asarray(p, dtype=float))

    def push(self, p, v):
        if self.tangent is None:
            raise Unsupported(f"{self!r} has no tangent map")
        return self.tangent(np.asarray(p, dtype=float), np.asarray(v, dtype=float))

    def validate(self, rng, probes=50, rtol=1e-5):
        """Check ``tangent`` against central differences along ``Sigma``-curves."""
        la = self.source.local_addition
        cfg = FDConfig()
        worst = 0.0
        for _ in range(probes):
            p = self.source.random_point(rng)
            v = self.source.random_tangent(rng, p, 1.0)
            exact = self.push(p, v)
            res = fd_directional(lambda s: self(la.sigma(p, s * v)), 0.0, 1.0, cfg,
                                 exact=exact, chord=self.target.chord)
            rel = float(np.max(np.abs(res.value - exact)) / max(1.0, float(np.max(np.abs(exact)))))
            worst = max(worst, rel)
        if worst > rtol:
            raise ValidationError(f"{self!r}: tangent map disagrees with FD ({worst:.3g})")
        return worst

    def lift(self):
        """``Tf`` as a map ``TN1 -> TN2`` on concatenated ``(p, v)`` points."""
        T1, T2 = tangent_manifold(self.source), tangent_manifold(self.target)
        k = self.source.embed_dim

        def fn(x):
            return np.concatenate([self(x[..., :k]), self.push(x[..., :k], x[..., k:])], axis=-1)

        return SmoothMap(T1, T2, fn, None, name=f"T{self.name}")


def identity_map(N):
    return SmoothMap(N, N, lambda p: p, lambda p, v: v, name="identity")


def antipodal_map(S):
    return SmoothMap(S, S, lambda p: -p, lambda p, v: -v, name="antipodal")


def rotation_map(S, R):
    R = np.asarray(R, dtype=float)
    return SmoothMap(S, S, lambda p: p @ R.T, lambda p, v: v @ R.T, name="rotation")


def quaternion_square(G):
    return SmoothMap(G, G, lambda q: quat.normalize(quat.qmul(q, q)),
                     lambda q, v: quat.qmul(v, q) + quat.qmul(q, v), name="square")


def quaternion_inverse(G):
    return SmoothMap(G, G, quat.qconj, lambda q, v: quat.qconj(v), name="inverse")


def linear_map(A, source=None, target=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    source = source or Euclidean(A.shape[1])
    target = target or Euclidean(A.shape[0])
    return SmoothMap(source, target, lambda p: p @ A.T, lambda p, v: v @ A.T, name="linear")


def square_map(n=1):
    E = Euclidean(n)
    return SmoothMap(E, E, lambda x: x * x, lambda x, v: 2.0 * x * v, name="square")


def torus_double(T):
    return SmoothMap(T, T, lambda p: np.mod(2.0 * p, TWO_PI), lambda p, v: 2.0 * v, name="double")


def sphere_inclusion(S):
    return SmoothMap(S, Euclidean(3), lambda p: p, lambda p, v: v, name="inclusion")


def planar_polynomial():
    E = Euclidean(2)

    def fn(x):
        return np.stack([np.sin(x[..., 0]) + x[..., 1] ** 2, x[..., 0] * x[..., 1]], axis=-1)

    def tangent(x, v):
        return np.stack([np.cos(x[..., 0]) * v[..., 0] + 2.0 * x[..., 1] * v[..., 1],
                         x[..., 1] * v[..., 0] + x[..., 0] * v[..., 1]], axis=-1)

    return SmoothMap(E, E, fn, tangent, name="planar-polynomial")


def compose(g: SmoothMap, f: SmoothMap) -> SmoothMap:
    """``g o f`` with the chain-rule tangent map."""
    tangent = None
    if f.tangent is not None and g.tangent is not None:
        tangent = lambda p, v: g.push(f(p), f.push(p, v))
    return SmoothMap(f.source, g.target, lambda p: g(f(p)), tangent, name=f"{g.name}.{f.name}")

"""Seeded generators for random smooth scenarios.

Every stream comes from ``numpy.random.default_rng`` (PCG64) seeded with the
integer list ``[seed, crc32(key), index]``. PCG64 and ``SeedSequence`` are
specified bit-for-bit, so a seed reproduces the same scenarios on every
platform and the scenarios of one check do not depend on which other checks ran.
"""
from __future__ import annotations

import zlib

import numpy as np

from .holder import CornerGrid, SampledFunction, SmoothFn
from .manifolds import ManifoldSpec, get_manifold
from .mapping import SampledMap, SampledSection, chart_apply, chart_at


def stream(seed, key, index=0):
    return np.random.default_rng([int(seed), zlib.crc32(str(key).encode()), int(index)])


def smooth_field(grid: CornerGrid, rng, k, terms=3, freq=1.5):
    """Sum of a few random plane waves, ``k`` components, values of order 1."""
    x = grid.nodes()
    out = np.zeros((grid.size, k))
    for _ in range(terms):
        w = rng.normal(scale=freq, size=(k, grid.m))
        phase = rng.uniform(0.0, 2 * np.pi, size=k)
        amp = rng.normal(size=k) / terms
        out += amp * np.sin(x @ w.T + phase)
    return out


def random_map(N: ManifoldSpec, grid: CornerGrid, rng, amp=0.6, base=None) -> SampledMap:
    """Smooth map that stays near a random base point of ``N``."""
    p0 = N.random_point(rng) if base is None else np.asarray(base, dtype=float)
    field = smooth_field(grid, rng, N.embed_dim)
    return SampledMap(grid, N, N.project(p0 + amp * field))


def random_section(gamma: SampledMap, rng, amp=0.5) -> SampledSection:
    """Smooth section whose largest vector has norm ``amp * u``, ``u`` uniform in [0.2, 1]."""
    N = gamma.target
    v = N.project_tangent(gamma.points, smooth_field(gamma.grid, rng, N.embed_dim))
    top = float(np.max(np.abs(v) if N.name.startswith("torus") else np.linalg.norm(v, axis=1)))
    scale = amp * rng.uniform(0.2, 1.0) / top if top > 0 else 0.0
    return SampledSection(gamma, scale * v)


def nearby_map(gamma: SampledMap, rng, amp=0.5) -> SampledMap:
    """``Sigma o sigma`` for a random section of size at most ``amp``."""
    return chart_apply(chart_at(gamma), random_section(gamma, rng, amp))


def random_function(grid: CornerGrid, rng, codim=1, rough=False) -> SampledFunction:
    """Smooth field, or i.i.d. normal samples when ``rough``."""
    if rough:
        return SampledFunction(grid, rng.normal(size=(grid.size, codim)))
    return SampledFunction(grid, smooth_field(grid, rng, codim))


def random_smooth_fn(rng, arity, out_dim=1, width=4) -> SmoothFn:
    """``u -> C tanh(A u + b) + D u``, a random map with bounded derivatives."""
    A = rng.normal(size=(width, arity))
    b = rng.normal(size=width)
    C = rng.normal(size=(out_dim, width)) / np.sqrt(width)
    D = rng.normal(size=(out_dim, arity)) / np.sqrt(arity)

    def ev(u):
        return np.tanh(u @ A.T + b) @ C.T + u @ D.T

    def dv(u, h):
        s = 1.0 - np.tanh(u @ A.T + b) ** 2
        return (s * (h @ A.T)) @ C.T + h @ D.T

    return SmoothFn(arity, out_dim, ev, dv, name="tanh-net")


def sphere_sweep(grid: CornerGrid, rng, wobble=0.05) -> SampledMap:
    """Sphere-valued map whose polar angle runs from near the north pole to near
    the south pole along the first axis, so no single stereographic chart holds it."""
    x = grid.nodes()
    span = x[:, 0] - grid.lo[0]
    polar = 0.05 + 0.9 * np.pi * span / (grid.hi[0] - grid.lo[0])
    azimuth = np.pi * (x[:, -1] if grid.m > 1 else x[:, 0])
    noise = wobble * smooth_field(grid, rng, 2)
    polar = polar + noise[:, 0]
    azimuth = azimuth + noise[:, 1]
    pts = np.stack([np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth),
                    np.cos(polar)], axis=1)
    return SampledMap(grid, get_manifold("sphere2"), pts)

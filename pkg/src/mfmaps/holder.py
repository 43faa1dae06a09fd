"""λ-Hölder functions on sampled boxes.

Every sup below is taken over grid nodes, so each norm is a lower bound for
its continuum counterpart. The operators realize pushforward, pullback,
extension by zero and cut-off multiplication on these samples, together with
restriction, gluing and the smooth plateau functions used as cut-offs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (BadNesting, CoverageGap, DomainViolation, GridMismatch,
                     NotCompactlySupported, NotNodeAligned, OverlapConflict,
                     ValidationError)
from .numerics import (EPS, ERROR_FLOOR, ROUNDOFF_FACTOR, FDConfig, VerificationReport,
                       convergence_order, fd_directional)

LOCATE_TOL = 1e-12


@dataclass(frozen=True)
class CornerGrid:
    """Uniform lattice on the box ``[lo, hi]`` inside ``[0, inf)^m``."""

    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        shape = tuple(int(v) for v in np.atleast_1d(self.shape))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", shape)
        if not (len(lo) == len(hi) == len(shape)) or not lo:
            raise ValidationError("lo, hi and shape must have the same positive length")
        if any(v < 0 for v in lo):
            raise ValidationError("grid must lie in [0, inf)^m (lo >= 0)")
        if any(not b > a for a, b in zip(lo, hi)):
            raise ValidationError("hi must exceed lo componentwise")
        if any(n < 2 for n in shape):
            raise ValidationError("every axis needs at least two nodes")

    @property
    def m(self):
        return len(self.lo)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def spacing(self):
        return tuple((b - a) / (n - 1) for a, b, n in zip(self.lo, self.hi, self.shape))

    @property
    def diameter(self):
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def axes(self):
        return [np.linspace(a, b, n) for a, b, n in zip(self.lo, self.hi, self.shape)]

    def nodes(self):
        """Node coordinates, shape ``(size, m)``, row-major order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def locate(self, points, tol=LOCATE_TOL):
        """Flat node index of each point, or -1 where it is not a node."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        axes = self.axes()
        out = np.zeros(pts.shape[0], dtype=np.int64)
        ok = np.ones(pts.shape[0], dtype=bool)
        for c, (ax, h) in enumerate(zip(axes, self.spacing)):
            raw = np.rint((pts[:, c] - ax[0]) / h)
            inside = (raw >= 0) & (raw <= len(ax) - 1)
            idx = np.clip(raw, 0, len(ax) - 1).astype(np.int64)
            close = np.abs(ax[idx] - pts[:, c]) <= tol * np.maximum(1.0, np.abs(pts[:, c]))
            ok &= inside & close
            out = out * len(ax) + idx
        return np.where(ok, out, -1)

    def sub_indices(self, sub):
        """Indices of ``sub``'s nodes among this grid's nodes."""
        if sub.m != self.m:
            raise GridMismatch(f"dimension mismatch: {sub.m} vs {self.m}")
        idx = self.locate(sub.nodes())
        bad = np.flatnonzero(idx < 0)
        if bad.size:
            raise GridMismatch("sub-grid node is not a node of the parent grid", node=int(bad[0]))
        return idx

    def box_mask(self, lo, hi, closed=True, tol=LOCATE_TOL):
        """Boolean mask of the nodes inside the box ``[lo, hi]``."""
        x = self.nodes()
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if closed:
            return np.all((x >= lo - tol) & (x <= hi + tol), axis=1)
        return np.all((x > lo + tol) & (x < hi - tol), axis=1)

    def to_dict(self):
        return {"lo": list(self.lo), "hi": list(self.hi), "shape": list(self.shape)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["lo"], d["hi"], d["shape"])


@dataclass(frozen=True)
class HolderExponent:
    value: float

    def __post_init__(self):
        v = float(self.value)
        object.__setattr__(self, "value", v)
        if not 0.0 < v <= 1.0:
            raise ValidationError(f"Hölder exponent must lie in (0, 1], got {v}")

    def __float__(self):
        return self.value


def _exponent(lam):
    return HolderExponent(float(lam)).value


class SampledFunction:
    """Vector-valued function sampled on the nodes of a ``CornerGrid``."""

    def __init__(self, grid: CornerGrid, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != grid.size:
            raise ValidationError(
                f"values must have shape ({grid.size}, codim), got {values.shape}")
        bad = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
        if bad.size:
            raise ValidationError("non-finite sample", node=int(bad[0]))
        self.grid = grid
        self.values = values

    @property
    def codim(self):
        return self.values.shape[1]

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.nodes()), dtype=float))

    @classmethod
    def zeros(cls, grid, codim=1):
        return cls(grid, np.zeros((grid.size, codim)))

    def _check_same(self, other):
        if other.grid != self.grid:
            raise GridMismatch("functions live on different grids")

    def __add__(self, other):
        self._check_same(other)
        return SampledFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_same(other)
        return SampledFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SampledFunction(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)

    def __repr__(self):
        return f"SampledFunction(grid={self.grid!r}, codim={self.codim})"


class SmoothFn:
    """Smooth map ``R^arity -> R^out_dim`` with a hand-coded directional derivative.

    ``eval(x)`` maps arrays of shape ``(..., arity)`` to ``(..., out_dim)``;
    ``deriv(x, h)`` returns ``df(x; h)`` with the same leading shape.
    """

    def __init__(self, arity, out_dim, eval, deriv, name=""):
        self.arity = int(arity)
        self.out_dim = int(out_dim)
        self._eval = eval
        self._deriv = deriv
        self.name = name

    def eval(self, x):
        return np.asarray(self._eval(np.asarray(x, dtype=float)), dtype=float)

    def deriv(self, x, h):
        return np.asarray(self._deriv(np.asarray(x, dtype=float),
                                      np.asarray(h, dtype=float)), dtype=float)

    def __repr__(self):
        return f"SmoothFn({self.name or '?'}: R^{self.arity} -> R^{self.out_dim})"

    def validate(self, rng, probes=50, scale=1.0, rtol=1e-5, min_order=1.8):
        """Compare ``deriv`` with central differences of ``eval`` at random probes.

        Returns the worst relative mismatch and the smallest observed order;
        raises ``ValidationError`` when either misses its threshold.
        """
        cfg = FDConfig(steps=(1e-2, 1e-3, 1e-4), min_order=min_order)
        worst, min_ord = 0.0, math.inf
        for _ in range(probes):
            x = scale * rng.uniform(-1.0, 1.0, self.arity)
            h = rng.normal(size=self.arity)
            h /= np.linalg.norm(h)
            exact = self.deriv(x, h)
            res = fd_directional(self.eval, x, h, cfg, exact=exact)
            rel = float(np.max(np.abs(res.value - exact)) / max(1.0, float(np.max(np.abs(exact)))))
            worst = max(worst, rel)
            min_ord = min(min_ord, res.order)
        if worst > rtol or not min_ord >= min_order:
            raise ValidationError(
                f"{self!r}: derivative mismatch {worst:.3g} (order {min_ord:.3g})")
        return worst, min_ord

    def gradient(self, x):
        """Rows of partial derivatives for scalar ``f``: shape ``(..., arity)``."""
        x = np.asarray(x, dtype=float)
        cols = []
        for j in range(self.arity):
            e = np.zeros(self.arity)
            e[j] = 1.0
            cols.append(self.deriv(x, np.broadcast_to(e, x.shape))[..., 0])
        return np.stack(cols, axis=-1)

    def hessian_norm(self, x, h=1e-4):
        """Spectral norm of the FD Hessian of a scalar ``f`` at points ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        H = np.empty(x.shape[:-1] + (self.arity, self.arity))
        for j in range(self.arity):
            e = np.zeros(self.arity)
            e[j] = h
            H[..., :, j] = (self.gradient(x + e) - self.gradient(x - e)) / (2 * h)
        H = 0.5 * (H + np.swapaxes(H, -1, -2))
        return np.max(np.abs(np.linalg.eigvalsh(H)), axis=-1)


MANTISSA_BINS = 16
# skip a pair only when its bound is below the running max by this margin
PRUNE_MARGIN = 1.0 - 1e-12


@njit(cache=True)
def _holder_rows(nodes, values, lam, table, emin):
    # table[e - emin, b] = sqrt(lo) ** lam for the smallest dx in mantissa bin b
    # of binary exponent e; since sqrt and pow are monotone it bounds the
    # denominator from below and lets most pairs skip the pow call
    k = nodes.shape[0]
    rowmax = np.zeros(k)
    best = 0.0
    for i in range(k - 1):
        row = 0.0
        for j in range(i + 1, k):
            dx = 0.0
            for c in range(nodes.shape[1]):
                d = nodes[i, c] - nodes[j, c]
                dx += d * d
            dv = 0.0
            for c in range(values.shape[1]):
                d = values[i, c] - values[j, c]
                dv += d * d
            if dv == 0.0:
                continue
            num = math.sqrt(dv)
            m, e = math.frexp(dx)
            r = e - emin
            if 0 <= r < table.shape[0]:
                b = int((m - 0.5) * (2 * MANTISSA_BINS))
                if num <= best * table[r, b] * PRUNE_MARGIN:
                    continue
            q = num / math.sqrt(dx) ** lam
            if q > row:
                row = q
                if q > best:
                    best = q
        rowmax[i] = row
    return rowmax


def _pow_table(grid, lam):
    emin = math.frexp(min(grid.spacing) ** 2)[1] - 2
    emax = math.frexp(grid.diameter ** 2)[1] + 1
    mant = 0.5 + np.arange(MANTISSA_BINS) / (2 * MANTISSA_BINS)
    table = np.array([[math.sqrt(math.ldexp(m, e)) ** lam for m in mant]
                      for e in range(emin, emax + 1)])
    return table, emin


def holder_seminorm(f: SampledFunction, lam) -> float:
    """Largest ratio ``|f(x) - f(y)| / |x - y|**lam`` over distinct node pairs."""
    lam = _exponent(lam)
    nodes = np.ascontiguousarray(f.grid.nodes())
    values = np.ascontiguousarray(f.values)
    table, emin = _pow_table(f.grid, lam)
    rows = _holder_rows(nodes, values, lam, table, emin)
    best = 0.0
    for r in rows:  # fixed merge order keeps the result reproducible
        if r > best:
            best = float(r)
    return best


def sup_norm(f: SampledFunction) -> float:
    return float(np.max(np.sqrt(np.sum(f.values * f.values, axis=1))))


def holder_norm(f: SampledFunction, lam) -> float:
    return sup_norm(f) + holder_seminorm(f, lam)


def restrict(f: SampledFunction, sub: CornerGrid) -> SampledFunction:
    return SampledFunction(sub, f.values[f.grid.sub_indices(sub)])


def _as_box(box, m):
    lo, hi = box
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (m,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (m,))
    return lo, hi


def extend_by_zero(f: SampledFunction, support, super_grid: CornerGrid) -> SampledFunction:
    """Extend ``f``, which vanishes outside the box ``support``, by zero.

    ``support`` is a ``(lo, hi)`` pair that must sit strictly inside ``f``'s grid.
    """
    lo, hi = _as_box(support, f.grid.m)
    if np.any(lo <= np.asarray(f.grid.lo)) or np.any(hi >= np.asarray(f.grid.hi)):
        raise NotCompactlySupported("support box must lie strictly inside the grid")
    outside = ~f.grid.box_mask(lo, hi)
    nonzero = np.flatnonzero(outside & np.any(f.values != 0.0, axis=1))
    if nonzero.size:
        raise NotCompactlySupported("function is nonzero outside its support box",
                                    node=int(nonzero[0]))
    idx = super_grid.sub_indices(f.grid)
    out = np.zeros((super_grid.size, f.codim))
    out[idx] = f.values
    return SampledFunction(super_grid, out)


def multiply_cutoff(h: SampledFunction, f: SampledFunction) -> SampledFunction:
    if h.grid != f.grid:
        raise GridMismatch("cut-off and function live on different grids")
    if h.codim != 1:
        raise GridMismatch("cut-off must be scalar valued")
    return SampledFunction(f.grid, h.values * f.values)


def pushforward(f: SmoothFn, gamma: SampledFunction, sub: CornerGrid | None = None) -> SampledFunction:
    """Node-wise ``x -> f(x, gamma(x))`` on the sub-grid ``sub``."""
    sub = sub or gamma.grid
    idx = gamma.grid.sub_indices(sub)
    x = sub.nodes()
    arg = np.concatenate([x, gamma.values[idx]], axis=1)
    if arg.shape[1] != f.arity:
        raise DomainViolation(f"{f!r} expects {f.arity} inputs, got {arg.shape[1]}")
    try:
        out = f.eval(arg)
    except (ValueError, ArithmeticError) as exc:
        raise DomainViolation(str(exc)) from exc
    out = out.reshape(sub.size, -1)
    bad = np.flatnonzero(~np.all(np.isfinite(out), axis=1))
    if bad.size:
        raise DomainViolation(f"{f!r} undefined", node=int(bad[0]))
    return SampledFunction(sub, out)


@dataclass(frozen=True)
class GridMap:
    """Affine map ``x -> A x + b`` meant to permute lattice nodes."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        b = np.atleast_1d(np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.offset

    @classmethod
    def identity(cls, m):
        return cls(np.eye(m), np.zeros(m))

    @classmethod
    def reflection(cls, grid, axis):
        """Mirror one axis of ``grid`` onto itself."""
        A = np.eye(grid.m)
        A[axis, axis] = -1.0
        b = np.zeros(grid.m)
        b[axis] = grid.lo[axis] + grid.hi[axis]
        return cls(A, b)

    @classmethod
    def permutation(cls, perm):
        perm = list(perm)
        return cls(np.eye(len(perm))[perm], np.zeros(len(perm)))

    def node_map(self, source: CornerGrid, target: CornerGrid):
        """Index of ``target`` hit by each node of ``source``; must be a bijection."""
        idx = target.locate(self(source.nodes()))
        bad = np.flatnonzero(idx < 0)
        if bad.size:
            raise NotNodeAligned("map sends a node off the target lattice", node=int(bad[0]))
        if source.size == target.size and np.unique(idx).size != idx.size:
            raise NotNodeAligned("map is not injective on nodes")
        return idx


def pullback(theta: GridMap, gamma: SampledFunction, domain: CornerGrid | None = None) -> SampledFunction:
    """``gamma o theta`` on ``domain`` (default: ``gamma``'s own grid)."""
    domain = domain or gamma.grid
    return SampledFunction(domain, gamma.values[theta.node_map(domain, gamma.grid)])


def glue(pieces, target: CornerGrid) -> SampledFunction:
    """Assemble one function on ``target`` from pieces that agree on overlaps."""
    funcs = [p[1] if isinstance(p, tuple) else p for p in pieces]
    if not funcs:
        raise CoverageGap("no pieces to glue")
    codim = funcs[0].codim
    for i, fi in enumerate(funcs):
        xi = fi.grid.nodes()
        for fj in funcs[i + 1:]:
            idx = fj.grid.locate(xi)
            shared = np.flatnonzero(idx >= 0)
            diff = np.any(fi.values[shared] != fj.values[idx[shared]], axis=1)
            if np.any(diff):
                k = int(shared[np.argmax(diff)])
                raise OverlapConflict(f"pieces disagree at x={xi[k].tolist()}", node=k)
    out = np.full((target.size, codim), np.nan)
    covered = np.zeros(target.size, dtype=bool)
    tx = target.nodes()
    for f in funcs:
        idx = f.grid.locate(tx)
        take = (idx >= 0) & ~covered
        out[take] = f.values[idx[take]]
        covered |= take
    if not covered.all():
        k = int(np.flatnonzero(~covered)[0])
        raise CoverageGap(f"target node x={tx[k].tolist()} is not covered", node=k)
    return SampledFunction(target, out)


def _e(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _de(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a, b = _e(t), _e(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def smooth_step_deriv(t):
    t = np.asarray(t, dtype=float)
    a, b = _e(t), _e(1.0 - t)
    da, db = _de(t), _de(1.0 - t)
    return (da * b + a * db) / (a + b) ** 2


def bump_function(grid: CornerGrid, inner, outer):
    """Plateau function equal to 1 on box ``inner`` and 0 off box ``outer``.

    Returns the samples on ``grid`` and the closed form as a ``SmoothFn``.
    An inner face may coincide with an outer one only on the grid boundary.
    """
    klo, khi = _as_box(inner, grid.m)
    ulo, uhi = _as_box(outer, grid.m)
    glo, ghi = np.asarray(grid.lo), np.asarray(grid.hi)
    if np.any(klo > khi) or np.any(klo < ulo) or np.any(khi > uhi):
        raise BadNesting("inner box must lie inside the outer box")
    if np.any(ulo < glo) or np.any(uhi > ghi):
        raise BadNesting("outer box must lie inside the grid box")
    if np.any((klo == ulo) & (ulo > glo)) or np.any((khi == uhi) & (uhi < ghi)):
        raise BadNesting("inner box touches the outer boundary inside the grid")
    rise = np.where(klo > ulo, klo - ulo, np.inf)
    fall = np.where(uhi > khi, uhi - khi, np.inf)

    def factors(x):
        a = (x - ulo) / rise
        b = (uhi - x) / fall
        a = np.where(np.isinf(rise), 1.0, a)
        b = np.where(np.isinf(fall), 1.0, b)
        return a, b

    def ev(x):
        a, b = factors(x)
        return np.prod(smooth_step(a) * smooth_step(b), axis=-1, keepdims=True)

    def dv(x, h):
        a, b = factors(x)
        sa, sb = smooth_step(a), smooth_step(b)
        da = np.where(np.isinf(rise), 0.0, smooth_step_deriv(a) / rise)
        db = np.where(np.isinf(fall), 0.0, -smooth_step_deriv(b) / fall)
        g = sa * sb
        dg = (da * sb + sa * db) * h
        total = np.zeros(x.shape[:-1])
        for c in range(x.shape[-1]):
            others = np.prod(np.delete(g, c, axis=-1), axis=-1)
            total = total + dg[..., c] * others
        return total[..., None]

    fn = SmoothFn(grid.m, 1, ev, dv, name="bump")
    return SampledFunction(grid, fn.eval(grid.nodes())), fn


def _ball_samples(dim, radius, rng, directions=64, radii=17):
    dirs = [np.eye(dim), -np.eye(dim)]
    if dim > 1:
        r = rng.normal(size=(directions, dim))
        dirs.append(r / np.linalg.norm(r, axis=1, keepdims=True))
    dirs = np.concatenate(dirs)
    rs = np.linspace(0.0, radius, radii)
    return (rs[:, None, None] * dirs[None]).reshape(-1, dim)


def lipschitz_estimate_check(f: SmoothFn, eta: SampledFunction, gamma: SampledFunction,
                             lam, rng=None, scenario="") -> VerificationReport:
    """Mean-value bounds for ``eta -> f o eta`` on Hölder difference quotients.

    Checks ``|f o eta|_lam <= L * |eta|_lam`` and
    ``|f o eta - f o gamma|_lam <= G * (|eta - gamma|_inf + |eta - gamma|_lam)``
    where ``L`` is the sampled sup of ``|grad f|`` on the ball holding the
    values of ``eta``, and ``G = max(L', H * V)`` with ``L'``, ``H`` the sampled
    gradient and Hessian bounds on the enlarged ball and ``V`` the larger
    seminorm of ``eta`` and ``gamma``.
    """
    lam = _exponent(lam)
    rng = rng if rng is not None else np.random.default_rng(0)
    if eta.grid != gamma.grid:
        raise GridMismatch("eta and gamma live on different grids")
    diff = eta - gamma
    R = sup_norm(eta)
    delta = sup_norm(diff) + holder_seminorm(diff, lam)
    inner = np.concatenate([_ball_samples(f.arity, R, rng), eta.values])
    outer = np.concatenate([_ball_samples(f.arity, R + delta, rng), eta.values, gamma.values])
    L = float(np.max(np.linalg.norm(f.gradient(inner), axis=-1)))
    L_out = float(np.max(np.linalg.norm(f.gradient(outer), axis=-1)))
    H = float(np.max(f.hessian_norm(outer)))
    eta_semi = holder_seminorm(eta, lam)
    V = max(eta_semi, holder_seminorm(gamma, lam))
    G = max(L_out, H * V)
    f_eta = SampledFunction(eta.grid, f.eval(eta.values))
    f_gamma = SampledFunction(gamma.grid, f.eval(gamma.values))
    lhs1 = holder_seminorm(f_eta, lam)
    rhs1 = L * eta_semi
    lhs2 = holder_seminorm(f_eta - f_gamma, lam)
    rhs2 = G * delta
    excess = max(lhs1 - rhs1, lhs2 - rhs2)
    return VerificationReport(
        "mean_value_bounds", scenario, "bound", excess, target=0.0, tol=0.0,
        measured=[("lipschitz_lhs", lhs1), ("lipschitz_rhs", rhs1),
                  ("continuity_lhs", lhs2), ("continuity_rhs", rhs2),
                  ("L", L), ("G", G)])


def exponent_embedding_check(f: SampledFunction, lam, beta, scenario="") -> VerificationReport:
    """``|f|_beta <= max(1, diam**(lam - beta)) * |f|_lam`` for ``beta <= lam``."""
    lam, beta = _exponent(lam), _exponent(beta)
    if beta > lam:
        raise ValidationError("need beta <= lambda")
    s_lam = holder_seminorm(f, lam)
    s_beta = holder_seminorm(f, beta)
    const = max(1.0, f.grid.diameter ** (lam - beta))
    bound = const * s_lam
    # equality is attained in exact arithmetic; allow a few ulps of rounding
    return VerificationReport(
        "exponent_embedding", scenario, "bound", s_beta, target=bound, tol=8 * EPS * bound,
        measured=[("seminorm_lambda", s_lam), ("seminorm_beta", s_beta), ("constant", const)])


def pushforward_derivative_check(f: SmoothFn, gamma: SampledFunction, eta: SampledFunction,
                                 ts=(1e-3, 1e-4, 1e-5, 1e-6), min_order=0.9,
                                 scenario="") -> VerificationReport:
    """Difference quotients of ``gamma -> f o gamma`` converge to ``df o (gamma, eta)``.

    Reports the sup-norm error at each ``t`` and the observed order in ``t``;
    errors below the round-off level ``eps * |f| / t`` count as exact.
    """
    if eta.grid != gamma.grid:
        raise GridMismatch("gamma and eta live on different grids")
    g, e = gamma.values, eta.values
    base = f.eval(g)
    exact = f.deriv(g, e)
    errors, floors = [], []
    for t in ts:
        delta = (f.eval(g + t * e) - base) / t
        errors.append(float(np.max(np.abs(delta - exact))))
        scale = max(1.0, float(np.max(np.abs(base))))
        floors.append(max(ERROR_FLOOR, ROUNDOFF_FACTOR * EPS * scale / t))
    order = convergence_order(ts, errors, floors)
    return VerificationReport("pushforward_derivative", scenario, "order", max(errors),
                              target=min_order, order=order,
                              measured=[(f"err@{t:g}", err) for t, err in zip(ts, errors)])

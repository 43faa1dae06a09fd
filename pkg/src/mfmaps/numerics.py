"""Shared numerical machinery.

Finite-difference directional derivatives with convergence-order estimates,
Gauss-Legendre quadrature on [0, 1], the naive Hölder oracle and the
``VerificationReport`` record every check in the package emits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import EvalFailure, MfmapsError

EPS = np.finfo(float).eps
ERROR_FLOOR = 1e-13
# round-off of a central difference is about eps * |F| / h; 16 ulps of headroom
ROUNDOFF_FACTOR = 16.0
SMOOTH_GAP_ORDER = 0.5


@dataclass(frozen=True)
class FDConfig:
    steps: tuple = (1e-2, 1e-3, 1e-4)
    min_order: float = 1.8
    scheme: str = "central"

    def __post_init__(self):
        steps = tuple(float(h) for h in self.steps)
        object.__setattr__(self, "steps", steps)
        if len(steps) < 2:
            raise ValueError("FDConfig needs at least two steps")
        if any(h <= 0 for h in steps):
            raise ValueError("FD steps must be positive")
        if any(b >= a for a, b in zip(steps, steps[1:])):
            raise ValueError("FD steps must be strictly decreasing")
        if self.scheme != "central":
            raise ValueError(f"unsupported FD scheme {self.scheme!r}")


@dataclass
class FDResult:
    value: np.ndarray
    order: float
    steps: tuple
    estimates: list
    errors: list
    smooth: bool = True

    @property
    def exact(self):
        return math.isinf(self.order) and self.order > 0

    def passed(self, min_order=1.8):
        return bool(self.order >= min_order)


def _sup(a):
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def convergence_order(steps, errors, floors=ERROR_FLOOR):
    """Log-log slope of ``errors`` against ``steps``.

    Errors at or below their floor are treated as round-off plateaus and
    skipped; the slope is taken between the two smallest steps that remain.
    Returns ``inf`` when every error sits on the floor (exact up to round-off).
    """
    steps = [float(h) for h in steps]
    errors = [float(e) for e in errors]
    floors = np.broadcast_to(np.asarray(floors, dtype=float), (len(errors),))
    if any(math.isnan(e) for e in errors):
        return math.nan
    good = [i for i, e in enumerate(errors) if e > floors[i]]
    if not good:
        return math.inf
    if len(good) == 1:
        i = good[0]
        j = i + 1 if i + 1 < len(errors) else i - 1
        if j < 0:
            return math.nan
        ei, ej = errors[i], float(floors[j])
    else:
        i, j = good[-2], good[-1]
        ei, ej = errors[i], errors[j]
    a, b = (i, j) if steps[i] > steps[j] else (j, i)
    ea, eb = (ei, ej) if a == i else (ej, ei)
    return math.log(ea / eb) / math.log(steps[a] / steps[b])


def _safe_eval(F, x, step):
    try:
        return np.asarray(F(x), dtype=float)
    except MfmapsError as exc:
        raise EvalFailure(str(exc), node=exc.node, step=step) from exc
    except (ValueError, ArithmeticError, FloatingPointError) as exc:
        raise EvalFailure(str(exc), step=step) from exc


def fd_directional(F, x, direction, cfg=None, exact=None, chord=None):
    """Central-difference derivative of ``F`` at ``x`` along ``direction``.

    ``chord(a, b)`` replaces ``b - a`` for outputs living on a quotient such as
    the flat torus. With ``exact`` given, errors are measured against it;
    otherwise successive estimates are compared. A one-sided gap that does not
    shrink with the step means no derivative exists, and its slope (about 0)
    is reported as the order.
    """
    cfg = cfg or FDConfig()
    chord = chord or (lambda a, b: b - a)
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    f0 = _safe_eval(F, x, 0.0)
    scale = _sup(f0)
    estimates, gaps, gap_floors = [], [], []
    for h in cfg.steps:
        fp = _safe_eval(F, x + h * direction, h)
        fm = _safe_eval(F, x - h * direction, -h)
        scale = max(scale, _sup(fp), _sup(fm))
        forward = chord(f0, fp) / h
        backward = chord(fm, f0) / h
        estimates.append(chord(fm, fp) / (2 * h))
        gaps.append(_sup(forward - backward))
    floors = [max(ERROR_FLOOR, ROUNDOFF_FACTOR * EPS * scale / h) for h in cfg.steps]
    gap_floors = [2 * f for f in floors]

    h1, h2 = cfg.steps[-2], cfg.steps[-1]
    ratio = (h1 / h2) ** 2
    value = estimates[-1] + (estimates[-1] - estimates[-2]) / (ratio - 1.0)

    if exact is not None:
        exact = np.asarray(exact, dtype=float)
        errors = [_sup(d - exact) for d in estimates]
        err_steps, err_floors = cfg.steps, floors
    else:
        errors = [_sup(a - b) for a, b in zip(estimates, estimates[1:])]
        err_steps, err_floors = cfg.steps[:-1], floors[:-1]

    gap_order = convergence_order(cfg.steps, gaps, gap_floors)
    smooth = not (gap_order < SMOOTH_GAP_ORDER)
    if smooth:
        order = convergence_order(err_steps, errors, err_floors)
    else:
        order = gap_order
    return FDResult(value=value, order=order, steps=cfg.steps,
                    estimates=estimates, errors=errors, smooth=smooth)


def _legendre_rule(n, sweeps=3):
    """Gauss-Legendre nodes and weights on [-1, 1], Newton-polished in long double.

    numpy's rule is accurate to a few ulps, which adds up to ~1e-14 on
    high-degree monomials; polishing in extended precision (where the
    platform has it) brings nodes and weights to within an ulp.
    """
    x0, _ = np.polynomial.legendre.leggauss(n)
    x = x0.astype(np.longdouble)
    for i in range(sweeps + 1):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        if i < sweeps:
            x = x - p1 / dp
    return x, 2 / ((1 - x * x) * dp * dp)


class QuadratureRule:
    """Gauss-Legendre rule on [0, 1].

    Checked at construction to integrate every monomial up to degree
    ``2 * points - 1`` to 1e-14 relative accuracy.
    """

    kind = "gauss-legendre"

    def __init__(self, points=32):
        if points < 1:
            raise ValueError("quadrature needs at least one point")
        self.points = int(points)
        x, w = _legendre_rule(self.points)
        self.nodes = np.asarray(0.5 * (x + 1), dtype=float)
        self.weights = np.asarray(0.5 * w, dtype=float)
        for k in range(2 * self.points):
            approx = float(np.dot(self.weights, self.nodes ** k))
            exact = 1.0 / (k + 1)
            if abs(approx - exact) > 1e-14 * exact:
                raise ValueError(f"rule is not exact on s**{k}: {approx!r} vs {exact!r}")

    def integrate(self, g):
        """Integrate ``g(s)`` over [0, 1]; ``g`` may return arrays."""
        vals = [np.asarray(g(s), dtype=float) for s in self.nodes]
        total = self.weights[0] * vals[0]
        for w, v in zip(self.weights[1:], vals[1:]):
            total = total + w * v
        return total


def _jsonable(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class VerificationReport:
    """One named check.

    ``kind`` fixes how ``passed`` is derived from the stored numbers:

    * ``"error"``: ``value <= tol``
    * ``"bound"``: ``value <= target + tol``
    * ``"order"``: ``order >= target`` (``inf`` marks an exact derivative)

    Any recorded ``error`` message fails the check.
    """

    check: str
    scenario: str
    kind: str
    value: float
    target: float = 0.0
    tol: float = 0.0
    order: float | None = None
    measured: list = field(default_factory=list)
    error: str | None = None

    def __post_init__(self):
        if self.kind not in ("error", "bound", "order"):
            raise ValueError(f"unknown report kind {self.kind!r}")

    @property
    def passed(self):
        if self.error is not None:
            return False
        if self.kind == "error":
            return bool(self.value <= self.tol)
        if self.kind == "bound":
            return bool(self.value <= self.target + self.tol)
        return self.order is not None and bool(self.order >= self.target)

    def to_dict(self):
        return {
            "check": self.check,
            "scenario": self.scenario,
            "kind": self.kind,
            "value": _jsonable(self.value),
            "target": _jsonable(self.target),
            "tol": _jsonable(self.tol),
            "order": _jsonable(self.order),
            "measured": [[str(k), _jsonable(v)] for k, v in self.measured],
            "error": self.error,
            "pass": self.passed,
        }

    @classmethod
    def failure(cls, check, scenario, exc):
        return cls(check, scenario, "error", math.nan, tol=0.0,
                   error=f"{type(exc).__name__}: {exc}")


def fd_report(check, scenario, result: FDResult, min_order=1.8):
    measured = [(f"err@{h:g}", e) for h, e in zip(result.steps, result.errors)]
    return VerificationReport(check, scenario, "order",
                              value=max(result.errors) if result.errors else 0.0,
                              target=min_order, order=result.order, measured=measured)


def weak_integral_check(f, gamma, eta, t, rule=None, tol=1e-8, scenario=""):
    """Difference quotient of the superposition versus its integral form.

    Compares, node by node, ``(f(gamma + t*eta) - f(gamma)) / t`` with the
    quadrature of ``s -> df(gamma + s*t*eta, eta)`` over [0, 1].
    """
    if t == 0:
        raise ValueError("t must be nonzero")
    rule = rule or QuadratureRule()
    g = np.asarray(getattr(gamma, "values", gamma), dtype=float)
    e = np.asarray(getattr(eta, "values", eta), dtype=float)
    try:
        delta = (np.asarray(f.eval(g + t * e)) - np.asarray(f.eval(g))) / t
        integral = rule.integrate(lambda s: f.deriv(g + s * t * e, e))
    except MfmapsError as exc:
        raise EvalFailure(str(exc), node=exc.node) from exc
    diff = delta - integral
    diff = diff.reshape(diff.shape[0], -1) if diff.ndim > 1 else diff[:, None]
    sup = float(np.max(np.sqrt(np.sum(diff * diff, axis=1)))) if diff.size else 0.0
    return VerificationReport("weak_integral", scenario, "error", sup, tol=tol,
                              measured=[("t", t), ("points", rule.points)])


@njit(cache=True)
def _naive_holder(nodes, values, lam):
    k = nodes.shape[0]
    best = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            dx = 0.0
            for c in range(nodes.shape[1]):
                d = nodes[i, c] - nodes[j, c]
                dx += d * d
            dv = 0.0
            for c in range(values.shape[1]):
                d = values[i, c] - values[j, c]
                dv += d * d
            q = math.sqrt(dv) / math.sqrt(dx) ** lam
            if q > best:
                best = q
    return best


def oracle_holder(f, lam):
    """Hölder seminorm by a plain loop over all node pairs.

    Kept deliberately naive; it is the reference for ``holder_seminorm``.
    """
    lam = float(getattr(lam, "value", lam))
    nodes = np.ascontiguousarray(f.grid.nodes(), dtype=float)
    values = np.ascontiguousarray(np.asarray(f.values, dtype=float).reshape(nodes.shape[0], -1))
    return float(_naive_holder(nodes, values, lam))

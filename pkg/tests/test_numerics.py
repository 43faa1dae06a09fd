import math

import mpmath
import numpy as np
import pytest
from scipy.special import roots_legendre

from mfmaps.errors import EvalFailure, ValidationError
from mfmaps.holder import SmoothFn
from mfmaps.numerics import (FDConfig, QuadratureRule, VerificationReport, convergence_order,
                             fd_directional, weak_integral_check)


def test_quadrature_matches_scipy():
    rule = QuadratureRule(32)
    x, w = roots_legendre(32)
    # scipy's weights are good to ~1e-12 relative; see the mpmath test for the tight check
    assert np.allclose(rule.nodes, 0.5 * (x + 1), rtol=0, atol=4e-16)
    assert np.allclose(rule.weights, 0.5 * w, rtol=1e-12, atol=0)
    assert rule.integrate(np.exp) == pytest.approx(math.e - 1, rel=1e-15)


def test_quadrature_matches_mpmath():
    n = 32
    rule = QuadratureRule(n)
    with mpmath.workdps(30):
        for x, w in zip(rule.nodes, rule.weights):
            root = mpmath.findroot(lambda t: mpmath.legendre(n, t), 2 * mpmath.mpf(x) - 1)
            dp = mpmath.diff(lambda t: mpmath.legendre(n, t), root)
            weight = 1 / ((1 - root ** 2) * dp ** 2)
            assert abs(x - float((root + 1) / 2)) <= 2.3e-16
            assert abs(w - float(weight)) <= 2 * np.spacing(w)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 48])
def test_quadrature_exact_on_monomials(n):
    rule = QuadratureRule(n)
    for k in range(2 * n):
        assert abs(rule.integrate(lambda s: s ** k) - 1 / (k + 1)) <= 1e-14 / (k + 1)


def test_quadrature_vector_valued():
    rule = QuadratureRule(8)
    out = rule.integrate(lambda s: np.array([[s, s * s], [1.0, 0.0]]))
    assert np.allclose(out, [[0.5, 1 / 3], [1.0, 0.0]], atol=1e-15)
    with pytest.raises(ValueError):
        QuadratureRule(0)


def test_convergence_order_slopes():
    steps = (1e-1, 1e-2, 1e-3)
    assert convergence_order(steps, [h ** 2 for h in steps]) == pytest.approx(2.0)
    assert convergence_order(steps, [3 * h for h in steps]) == pytest.approx(1.0)
    assert convergence_order(steps, [0.0, 0.0, 0.0]) == math.inf
    assert math.isnan(convergence_order(steps, [1.0, math.nan, 1.0]))
    # a round-off plateau at the smallest step is skipped
    assert convergence_order(steps, [1e-2, 1e-4, 1e-15], floors=1e-12) == pytest.approx(2.0)


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FDConfig(steps=(1e-2,))
    with pytest.raises(ValueError):
        FDConfig(steps=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        FDConfig(steps=(1e-2, -1e-3))
    with pytest.raises(ValueError):
        FDConfig(scheme="forward")


def test_fd_smooth_function():
    res = fd_directional(np.sin, 0.7, 1.0, exact=math.cos(0.7))
    assert res.smooth and res.order >= 1.8
    assert res.value == pytest.approx(math.cos(0.7), abs=1e-10)


def test_fd_without_exact_compares_successive_estimates():
    res = fd_directional(lambda x: x ** 3, 1.0, 1.0)
    assert res.order >= 1.8
    assert res.value == pytest.approx(3.0, abs=1e-9)


def test_fd_linear_is_exact():
    res = fd_directional(lambda x: 4.0 * x + 1.0, 2.0, 1.0, exact=4.0)
    assert res.exact and res.passed()


def test_fd_flags_kink():
    res = fd_directional(abs, 0.0, 1.0)
    assert not res.smooth
    assert not res.passed(1.8)


def test_fd_chord_wraps():
    two_pi = 2 * math.pi
    chord = lambda a, b: np.mod(b - a + math.pi, two_pi) - math.pi
    res = fd_directional(lambda s: np.mod(two_pi - 1e-5 + 3 * s, two_pi), 0.0, 1.0,
                         exact=3.0, chord=chord)
    assert res.order >= 1.8 or res.exact


def test_fd_wraps_library_errors():
    def f(x):
        if x > 0.5:
            raise ValidationError("off the manifold", node=4)
        return x

    with pytest.raises(EvalFailure) as info:
        fd_directional(f, 0.495, 1.0)
    assert info.value.node == 4 and info.value.step == 0.01


def test_report_pass_rules():
    assert VerificationReport("c", "s", "error", 1e-13, tol=1e-12).passed
    assert not VerificationReport("c", "s", "error", math.nan, tol=1e-12).passed
    assert VerificationReport("c", "s", "bound", 1.0, target=1.0).passed
    assert not VerificationReport("c", "s", "bound", 1.1, target=1.0, tol=0.05).passed
    assert VerificationReport("c", "s", "order", 0.1, target=1.8, order=math.inf).passed
    assert not VerificationReport("c", "s", "order", 0.1, target=1.8, order=1.2).passed
    with pytest.raises(ValueError):
        VerificationReport("c", "s", "maybe", 0.0)


def test_report_serialization():
    r = VerificationReport("c", "s", "order", math.nan, target=1.8, order=math.inf,
                           measured=[("n", np.int64(3))])
    d = r.to_dict()
    assert d["order"] == "inf" and d["value"] == "nan"
    assert d["measured"] == [["n", 3]] and d["pass"] is True
    fail = VerificationReport.failure("c", "s", KeyError("x"))
    assert not fail.passed and fail.error.startswith("KeyError")


def test_weak_integral_on_cubic():
    f = SmoothFn(1, 1, lambda x: x ** 3, lambda x, h: 3 * x ** 2 * h)
    gamma = np.linspace(-1, 1, 9)[:, None]
    eta = np.cos(gamma)
    for t in (1.0, 1e-3, -0.5):
        # the difference quotient loses about eps / |t| to cancellation
        assert weak_integral_check(f, gamma, eta, t).value <= 1e-14 + 8 * 2.2e-16 / abs(t)
    with pytest.raises(ValueError):
        weak_integral_check(f, gamma, eta, 0.0)

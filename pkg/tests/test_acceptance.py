"""One test per acceptance criterion, each printing a single PASS/FAIL line.

Thresholds are written out here rather than read from the library defaults,
so loosening a default cannot make a criterion pass.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from mfmaps.holder import CornerGrid, SampledFunction, holder_seminorm
from mfmaps.suites import CHECKS, Context

from conftest import ACCEPTANCE_LINES

SEED = 7


def run_checks(suite, names, **ctx_kw):
    ctx = Context(seed=SEED, **ctx_kw)
    start = time.perf_counter()
    reports = []
    for c in CHECKS[suite]:
        if c.name in names:
            reports.extend(c.run(ctx, ctx.count(c.count)))
    return reports, time.perf_counter() - start


def pick(reports, check, scenario=None):
    out = [r for r in reports if r.check == check and (scenario is None or r.scenario == scenario)]
    assert out, (check, scenario)
    return out


def scenarios(report):
    return dict(report.measured).get("scenarios")


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_holder_oracle_equivalence():
    reports, elapsed = run_checks("holder", {"oracle_equivalence"})
    (rep,) = pick(reports, "oracle_equivalence")
    m = dict(rep.measured)
    g = CornerGrid([0], [1], [129])
    sqrt_semi = holder_seminorm(SampledFunction.from_callable(g, np.sqrt), 0.5)
    ok = (rep.error is None and rep.value == 0.0 and m["functions"] == 200
          and m["largest_grid"] == 10_000 and abs(sqrt_semi - 1.0) <= 1e-12 and elapsed < 10)
    record("Hölder oracle equivalence", ok,
           f"{m['functions']} functions up to {m['largest_grid']} nodes, max gap {rep.value:g}, "
           f"sqrt seminorm {sqrt_semi!r}, {elapsed:.2f}s < 10s")


def test_axiom_suite():
    names = {"pushforward_fixtures", "pullback_fixtures", "extension_isometry",
             "cutoff_product_rule", "glue_restrict", "bump_properties"}
    reports, elapsed = run_checks("axioms", names)
    ext = pick(reports, "extension_isometry")
    all_ok = all(r.passed for r in reports)
    worst_ext = max(r.value for r in ext)
    ok = all_ok and worst_ext <= 1e-12 and scenarios(ext[0]) >= 20 and elapsed < 10
    record("Axiom suite (PF)(PB)(GL)(MU)", ok,
           f"{sum(r.passed for r in reports)}/{len(reports)} invariants hold, "
           f"extension seminorm gap {worst_ext:g} <= 1e-12, {elapsed:.2f}s < 10s")


def test_derivative_identity_identity():
    reports, elapsed = run_checks("axioms", {"pushforward_derivative", "weak_integral"})
    (deriv,) = pick(reports, "pushforward_derivative")
    weak = pick(reports, "weak_integral")
    worst_weak = max(r.value for r in weak)
    ok = (deriv.error is None and scenarios(deriv) == 20 and deriv.order >= 0.9
          and all(r.error is None for r in weak) and worst_weak <= 1e-8 and elapsed < 30)
    record("Derivative identity and Δ(t)=I(t)", ok,
           f"order {deriv.order:.3f} >= 0.9 over 20 triples, weak-integral gap {worst_weak:.2e} "
           f"<= 1e-8, {elapsed:.2f}s < 30s")


def test_chart_suite():
    reports, elapsed = run_checks("charts", {"chart_round_trip", "transition_coherence"})
    targets = {"euclidean:2", "sphere2", "so3", "torus:2"}
    rt = pick(reports, "chart_round_trip")
    coh = pick(reports, "transition_coherence") + pick(reports, "transition_identity")
    cyc = pick(reports, "transition_cocycle")
    worst_rt = max(r.value for r in rt + coh)
    worst_cyc = max(r.value for r in cyc)
    ok = ({r.scenario for r in rt} == targets and {r.scenario for r in cyc} == targets
          and all(scenarios(r) == 100 for r in rt + coh + cyc)
          and all(r.error is None for r in reports)
          and worst_rt <= 1e-10 and worst_cyc <= 1e-9 and elapsed < 60)
    record("Chart suite", ok,
           f"4 targets x 100 scenarios, round trip/coherence {worst_rt:.2e} <= 1e-10, "
           f"cocycle {worst_cyc:.2e} <= 1e-9, {elapsed:.2f}s < 60s")


def test_frame_suite():
    reports, elapsed = run_checks("charts", {"frame_reconstruct"})
    (rec,) = pick(reports, "frame_reconstruct")
    (rej,) = pick(reports, "frame_incompatible_rejected")
    ok = (rec.error is None and scenarios(rec) == 50 and rec.value <= 1e-10
          and rej.passed and dict(rej.measured).get("raised") == "IncompatibleFrame" and elapsed < 10)
    record("Frame suite", ok,
           f"reconstruct error {rec.value:.2e} <= 1e-10 on 50 two-chart sphere sections, "
           f"mismatch rejected, {elapsed:.2f}s < 10s")


def test_tangent_suite():
    reports, elapsed = run_checks("tangent", {"normalization", "tangent_identify", "tangent_functor"})
    norm = pick(reports, "normalization")
    ident = [r for r in pick(reports, "tangent_identify") if scenarios(r)]
    func = pick(reports, "tangent_functor", "random-20")
    orders = [r.order for r in norm + ident + func]
    ok = (all(r.error is None for r in reports) and min(orders) >= 1.8
          and all(scenarios(r) == 20 for r in norm + ident + func) and elapsed < 60)
    record("Tangent suite", ok,
           f"normalization min order {min(r.order for r in norm):.3f}, identification "
           f"{min(r.order for r in ident):.3f}, functor {func[0].order:.3f} (all >= 1.8), "
           f"{elapsed:.2f}s < 60s")


def test_lie_group_suite():
    reports, elapsed = run_checks("liegroup", {"loop_group_axioms", "identity_chart_round_trip",
                                               "lie_affine_exact"})
    axioms = [r for name in ("loop_associativity", "loop_identity", "loop_inverse")
              for r in pick(reports, name)]
    (chart,) = pick(reports, "identity_chart_round_trip", "so3-50")
    (affine,) = pick(reports, "lie_affine_exact")
    worst = max(r.value for r in axioms)
    ok = (all(scenarios(r) == 50 for r in axioms) and worst <= 1e-12
          and scenarios(chart) == 50 and chart.value <= 1e-10 and affine.value == 0.0
          and all(r.passed for r in reports))
    record("Lie-group suite", ok,
           f"group axioms {worst:.2e} <= 1e-12 on 50 triples, identity chart {chart.value:.2e} "
           f"<= 1e-10, affine gap {affine.value:g} (exact), {elapsed:.2f}s")


def test_mean_value_suite():
    reports, elapsed = run_checks("holder", {"mean_value_bounds", "exponent_embedding"})
    (mv,) = pick(reports, "mean_value_bounds", "random-100")
    (emb,) = pick(reports, "exponent_embedding", "random-100")
    ok = (mv.error is None and scenarios(mv) == 100 and mv.value <= 0.0
          and emb.passed and scenarios(emb) == 100)
    record("Mean-value inequalities", ok,
           f"worst excess {mv.value:.2e} <= 0 on 100 fixtures, embedding excess "
           f"{emb.value:.2e} within rounding on 100 functions, {elapsed:.2f}s")


def test_determinism(tmp_path):
    outs, times = [], []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        start = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "mfmaps.cli", "run", "--suite", "all",
                               "--seed", str(SEED), "--out", str(path)],
                              capture_output=True, text=True)
        times.append(time.perf_counter() - start)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and max(times) < 300
    record("Determinism", ok,
           f"two runs byte-identical ({len(outs[0])} bytes), wall time {max(times):.1f}s < 300s")

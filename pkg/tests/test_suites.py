import json

import pytest

from mfmaps.errors import ConfigError
from mfmaps.suites import (CHECKS, COVERAGE, SUITES, Context, catalog, run_suite, suite_names)


@pytest.fixture(scope="module")
def all_reports():
    return run_suite("all", Context(seed=7))


def test_every_check_passes(all_reports):
    failed = [(r.check, r.scenario, r.error) for r in all_reports if not r.passed]
    assert not failed


def test_coverage_manifest_is_exercised(all_reports):
    seen = {r.check for r in all_reports}
    for module, invariants in COVERAGE.items():
        for invariant, names in invariants.items():
            missing = [n for n in names if n not in seen]
            assert not missing, (module, invariant, missing)
    assert set(COVERAGE) == {"manifold-core", "holder-spaces", "mapping-manifold",
                             "numerics-harness", "cli-runner"}


def test_reports_serialize(all_reports):
    text = json.dumps([r.to_dict() for r in all_reports])
    assert "NaN" not in text and "Infinity" not in text
    assert all_reports[-1].check == "report_determinism"


def test_catalog_counts():
    entries = {e["name"]: e for e in catalog()}
    assert list(entries) == suite_names()
    for name in SUITES:
        assert entries[name]["scenarios"] == sum(c.count for c in CHECKS[name])
        assert entries[name]["anchors"] == SUITES[name]
    assert entries["all"]["scenarios"] == sum(entries[n]["scenarios"] for n in SUITES)


def test_scenario_cap_and_seed():
    a = run_suite("liegroup", Context(seed=1, scenarios=2))
    b = run_suite("liegroup", Context(seed=1, scenarios=2))
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    assert all(r.passed for r in a)
    assert Context(scenarios=5).count(100) == 5 and Context().count(100) == 100


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("nope", Context())


def test_injection_is_isolated():
    reports = run_suite("charts", Context(seed=2, scenarios=2, inject=("broken_antipodal",)))
    failed = [r for r in reports if not r.passed]
    assert [r.check for r in failed] == ["chart_round_trip"]
    assert "OutsidePrime" in failed[0].error

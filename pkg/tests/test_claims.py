"""Property suites: registry, determinism, and small-scale passes."""

import pytest

from majlab.claims import (
    ALL_SUITES,
    STRUCTURAL_SUITES,
    run_claim_suites,
    weak_definition_sweep,
)
from majlab.errors import MajlabError


def test_registry_shape():
    assert len(STRUCTURAL_SUITES) == 8
    assert set(STRUCTURAL_SUITES) <= set(ALL_SUITES)
    assert len(ALL_SUITES) == len(set(ALL_SUITES))


def test_all_suites_pass_at_small_scale():
    reports = run_claim_suites(instances=300, seed=1)
    assert [r.name for r in reports] == list(ALL_SUITES)
    for report in reports:
        assert report.passed, report.summary_line()
        assert report.violations == 0
        assert report.examples == []
        assert 0 < report.satisfied <= report.instances
        assert "pass" in report.summary_line()
        if report.name in STRUCTURAL_SUITES:
            assert report.instances == 300  # sweeps may fix their own count


def test_single_suite_selection_and_determinism():
    first = run_claim_suites(["tau_within_budget"], instances=100, seed=7)
    again = run_claim_suites(["tau_within_budget"], instances=100, seed=7)
    assert len(first) == 1
    assert first[0].name == "tau_within_budget"
    assert (first[0].satisfied, first[0].violations) == (
        again[0].satisfied,
        again[0].violations,
    )


def test_unknown_suite_is_rejected():
    with pytest.raises(MajlabError):
        run_claim_suites(["no_such_suite"], instances=10, seed=0)


def test_weak_definition_sweep_small():
    report = weak_definition_sweep(max_height=2, k_max=5)
    assert report.passed
    assert report.violations == 0
    assert report.satisfied == report.instances > 0

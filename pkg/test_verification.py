"""
Tests for campaigns and the verification suites
"""

import numpy as np
import pytest

from verification import SUITES, run_campaign, run_report, run_suite


def test_campaign_is_ordered_and_reproducible():
    draw = lambda rng: float(rng.uniform())
    single = run_campaign(draw, seed=4, count=20, threads=1)
    pooled = run_campaign(draw, seed=4, count=20, threads=4)
    assert single == pooled
    assert len(set(single)) == 20
    assert run_campaign(draw, seed=5, count=20) != single


def test_unknown_suite(disc):
    with pytest.raises(ValueError):
        run_suite(disc, "everything")
    with pytest.raises(ValueError):
        run_suite(disc, "lie", count=0)


@pytest.mark.parametrize("suite", ["roots", "lambda"])
def test_structural_suites_pass_everywhere(labs, domain_name, suite):
    assert run_suite(labs[domain_name], suite).passed


def test_lie_suite(siegel):
    report = run_suite(siegel, "lie", seed=1, count=10)
    assert report.passed
    assert {c["name"] for c in report.checks} >= {"bracket_grading", "killing_negative_on_gc", "q_skew"}


def test_hc_suite(quadric):
    report = run_suite(quadric, "hc", seed=2, count=60)
    assert report.passed
    assert report.details["rank_r"] == 2


def test_diagram_suite_checks_landed_samples_on_every_domain(quadric, nonclassical):
    herm = run_suite(quadric, "diagram", seed=0, count=10)
    assert herm.passed
    assert "diagram_on_domain_samples" in {c["name"] for c in herm.checks}
    other = run_suite(nonclassical, "diagram", seed=0, count=10)
    assert [c["name"] for c in other.checks] == ["pi_inverts_iota", "diagram_on_domain_samples"]
    assert not other.details["hermitian_symmetric"]
    assert other.passed
    assert 0.0 <= other.details["landing_rate"] <= 1.0


def test_bound_suite_on_disc(disc):
    report = run_suite(disc, "bound", seed=3, count=2, steps=101)
    assert report.passed
    assert "disc_rejections_at_boundary" in {c["name"] for c in report.checks}
    assert len(report.details["traces"]) == 2


def test_affine_suite_stops_at_largest_family(disc, siegel):
    assert run_suite(disc, "affine", count=5).details["dims"] == [1]
    report = run_suite(siegel, "affine", count=5)
    assert report.details["dims"] == [1, 2, 3]
    assert report.passed


def test_report_records_every_suite(conic_lab):
    payload = run_report(conic_lab, seed=0, count=2)
    assert [s["suite"] for s in payload["suites"]] == list(SUITES)
    assert payload["passed"] is (payload["first_failure"] is None)
    assert np.isfinite(payload["suites"][0]["checks"][0]["value"])


@pytest.fixture
def conic_lab(labs):
    return labs["conic"]

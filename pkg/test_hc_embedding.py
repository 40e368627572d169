"""
Tests for the SL2 factorization, iota, the projection pi and Λ reports
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm

from errors import NotInCompactGroup, NotInPeriodDomain
from flag_nplus import FlagPoint, exp_nplus, random_domain_point
from hc_embedding import (check_diagram, group_point_from_filtration, hc_report, in_compact_group, iota_hc,
                          lambda_report, polar_decomposition, project_pi, random_compact, sl2_nplus_coordinate,
                          sl2_product_residual)
from hodge_core import subspace_distance
from lie_decomp import random_element

z_values = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@seed(1)
@settings(max_examples=60, deadline=None)
@given(z_values)
def test_sl2_three_factor_identity(disc, z):
    assert sl2_product_residual(disc.frame, z, 0) < 1e-9


@seed(2)
@settings(max_examples=40, deadline=None)
@given(z_values, st.integers(min_value=0, max_value=1))
def test_sl2_identity_on_each_frame_root(siegel, z, i):
    assert sl2_product_residual(siegel.frame, z, i) < 1e-9


@seed(3)
@settings(max_examples=40, deadline=None)
@given(z_values.filter(lambda z: abs(z) > 1e-6))
def test_sl2_coordinate_is_tanh(quadric, z):
    got = sl2_nplus_coordinate(quadric.frame, z, 0)
    assert_allclose(got, z / abs(z) * np.tanh(abs(z)), atol=1e-9)


def test_hc_report():
    report = hc_report([0.5, -0.5j])
    assert report.inside
    assert report.rank_r == 2
    assert_allclose(report.euclid_dist, np.sqrt(0.5))
    assert not hc_report([1.0]).inside


def test_random_compact_in_k(siegel):
    L = siegel.algebra
    rng = np.random.default_rng(0)
    for within in (True, False):
        k = random_compact(L, rng, within_stabilizer=within)
        assert in_compact_group(L, k)
    assert not in_compact_group(L, 2 * np.eye(4))


@pytest.mark.parametrize("name", ["disc", "siegel", "conic", "quadric", "nonclassical"])
def test_iota_coincidence(labs, name):
    lab = labs[name]
    rng = np.random.default_rng(9)
    for _ in range(5):
        t = rng.uniform(-2.5, 2.5, size=lab.frame.rank)
        corr = iota_hc(lab.frame, t, random_compact(lab.algebra, rng))
        assert corr.coincidence < 1e-8
        assert corr.report.sup_norm < 1
        assert_allclose(corr.report.lambda_coords, np.tanh(t))


def test_iota_defaults_to_identity(disc):
    corr = iota_hc(disc.frame, [0.4])
    assert_allclose(corr.k, np.eye(2))
    assert_allclose(disc.frame.lambda_coordinates(corr.Y), [np.tanh(0.4)], atol=1e-12)


def test_iota_argument_checks(siegel):
    with pytest.raises(ValueError):
        iota_hc(siegel.frame, [0.1])
    with pytest.raises(NotInCompactGroup):
        iota_hc(siegel.frame, [0.1, 0.2], k=2 * np.eye(4))


def test_group_point_represents_the_filtration(quadric):
    L = quadric.algebra
    spec = quadric.spec
    pt = random_domain_point(L, np.random.default_rng(4), spread=1.5)
    g = group_point_from_filtration(pt)
    assert np.isrealobj(g)
    assert_allclose(g.T @ spec.polarization @ g, spec.polarization, atol=1e-9)
    image = FlagPoint.from_group(spec, g)
    for f in spec.filtration_ranks[1:-1]:
        assert subspace_distance(image.basis()[:, :f], pt.basis()[:, :f]) < 1e-9


def test_polar_decomposition(quadric):
    L = quadric.algebra
    rng = np.random.default_rng(6)
    g = expm(random_element(L, "p0", rng, 1.2)) @ random_compact(L, rng, within_stabilizer=False)
    P, k, iterations = polar_decomposition(g)
    assert iterations <= 50
    assert_allclose(P @ k, g, atol=1e-10)
    assert_allclose(k @ k.T, np.eye(5), atol=1e-10)
    assert_allclose(P, P.T, atol=1e-12)
    assert np.linalg.eigvalsh(P).min() > 0


def test_pi_recovers_p0_logarithm(siegel):
    L = siegel.algebra
    X = random_element(L, "p0", np.random.default_rng(12), 1.0).real
    point = project_pi(FlagPoint.from_group(L.spec, expm(X)))
    assert_allclose(point.log, X, atol=1e-9)


def test_pi_outside_domain_raises(disc):
    pt = FlagPoint(disc.spec, np.array([[1, 0], [2.0, 1]], dtype=complex))
    with pytest.raises(NotInPeriodDomain):
        project_pi(pt)


def test_diagram_commutes_on_hermitian_domain(quadric):
    rng = np.random.default_rng(5)
    for _ in range(10):
        report = check_diagram(quadric.frame, random_domain_point(quadric.algebra, rng, spread=1.5))
        assert report.landed
        assert report.passed


def test_diagram_is_measured_on_nonclassical(nonclassical):
    report = check_diagram(nonclassical.frame, random_domain_point(nonclassical.algebra, np.random.default_rng(1)))
    if report.landed:
        assert report.residual >= 0
    else:
        assert report.residual is None and not report.passed


def test_lambda_report_inverts_iota(siegel):
    t = np.array([1.3, -0.4])
    corr = iota_hc(siegel.frame, t)
    report = lambda_report(siegel.frame, exp_nplus(siegel.algebra, corr.Y))
    assert_allclose(np.abs(report.lambda_coords), np.tanh([1.3, 0.4]), atol=1e-9)
    assert report.euclid_dist < np.sqrt(2)

"""
Tests for horizontal families, path traces, Psi and the boundedness summary
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import FamilyError, NotInPeriodDomain
from hodge_core import build_domain_spec
from lie_decomp import lie_algebra_basis
from vhs_harness import (PathTrace, boundedness_report, build_family, horizontal_path, psi_affine, trace_to_frame,
                         write_trace_csv)


def _nplus_matrix(L, coords):
    return np.tensordot(np.asarray(coords), L.basis[L.indices("n_plus")], axes=1)


@pytest.mark.parametrize("name,d", [("disc", 1), ("quadric", 1), ("quadric", 3), ("siegel", 3), ("nonclassical", 1)])
def test_build_family_commutes(labs, name, d):
    L = labs[name].algebra
    fam = build_family(L, d, seed=2)
    assert fam.dim == d
    gram = np.array([[L.inner(a, b) for b in fam.frame] for a in fam.frame])
    assert_allclose(gram, np.eye(d), atol=1e-10)
    for i in range(d):
        assert np.linalg.norm(np.where(L.shift == -1, 0, L.to_adapted(fam.frame[i]))) < 1e-10
        for j in range(d):
            assert np.linalg.norm(L.bracket(fam.frame[i], fam.frame[j])) < 1e-10


@pytest.mark.parametrize("name,d", [("disc", 2), ("nonclassical", 2), ("siegel", 4)])
def test_build_family_too_large(labs, name, d):
    with pytest.raises(FamilyError):
        build_family(labs[name].algebra, d, seed=0)


@pytest.mark.parametrize("name,d", [("disc", 1), ("siegel", 3), ("quadric", 2)])
def test_psi_is_affine_on_abelian_families(labs, name, d):
    fam = build_family(labs[name].algebra, d, seed=1)
    rng = np.random.default_rng(7)
    for _ in range(10):
        q = fam.sample_chart(rng)
        res = psi_affine(fam, q)
        assert_allclose(res.coords, q, atol=1e-10)
        assert_allclose(res.singular_values, np.ones(d), atol=1e-6)
        assert res.immersion


def test_psi_outside_domain(disc):
    fam = build_family(disc.algebra, 1)
    with pytest.raises(NotInPeriodDomain):
        psi_affine(fam, [100.0])


def test_disc_path_stays_in_disc(disc):
    trace = horizontal_path(disc.algebra, seed=3, steps=200, step_size=0.01, frame=disc.frame)
    assert len(trace) == 200
    assert np.all(np.diff(trace.times) > 0)
    assert min(trace.min_eig) > 0
    assert min(trace.min_minor) > 0
    assert np.nanmax(trace.pplus_dist) < 1
    assert max(trace.tangent_defect) < 1e-6


def test_constant_field_traces_tanh(disc):
    L, frame = disc.algebra, disc.frame
    e = frame.triples[0][0]
    trace = horizontal_path(L, seed=0, steps=201, step_size=0.02, frame=frame, field_kind="constant", direction=e)
    taus = [L.inner(_nplus_matrix(L, c), e) / L.inner(e, e) for c in trace.coords]
    assert_allclose(taus, np.tanh(trace.times), atol=1e-9)
    assert_allclose(trace.pplus_dist, np.tanh(trace.times), atol=1e-8)
    assert not trace.truncated


def test_zero_field_stays_at_base_point(quadric):
    trace = horizontal_path(quadric.algebra, seed=0, steps=20, frame=quadric.frame, field_kind="zero")
    assert_allclose(np.array(trace.coords), 0.0)
    report = boundedness_report(trace, quadric.frame)
    assert report.max_lambda_dist < 1e-12
    assert report.max_nplus_norm < 1e-12
    assert report.max_tangent_defect == 0.0
    assert report.within_bound


def test_unknown_field_kind(disc):
    with pytest.raises(ValueError):
        horizontal_path(disc.algebra, seed=0, steps=5, field_kind="swirl")


def test_unknown_field_kind_without_horizontal_directions():
    L = lie_algebra_basis(build_domain_spec(2, [2, 0, 2]))
    assert L.grade_indices(-1).size == 0
    with pytest.raises(ValueError):
        horizontal_path(L, seed=0, steps=5, field_kind="swirl")


@pytest.mark.parametrize("name", ["siegel", "quadric"])
def test_random_paths_are_bounded_and_horizontal(labs, name):
    lab = labs[name]
    for s in range(2):
        trace = horizontal_path(lab.algebra, seed=s, steps=101, frame=lab.frame)
        report = boundedness_report(trace, lab.frame, lab.config)
        assert report.within_bound
        assert report.max_lambda_dist <= np.sqrt(lab.frame.rank) + 1e-8
        assert report.max_tangent_defect < 1e-6
        assert report.min_eig > 0


def test_nonclassical_path_is_horizontal(nonclassical):
    trace = horizontal_path(nonclassical.algebra, seed=4, steps=60, frame=nonclassical.frame)
    assert max(trace.tangent_defect) < 1e-6
    assert min(trace.min_eig) > 0


def test_trace_frame_and_csv(disc, tmp_path):
    trace = horizontal_path(disc.algebra, seed=5, steps=40, frame=disc.frame)
    frame = trace_to_frame(trace)
    assert list(frame.columns) == ["t", "coord_0_re", "coord_0_im", "min_minor", "min_eig", "pplus_dist",
                                   "psi_re", "psi_im", "sv_min", "tangent_defect"]
    assert len(frame) == 40
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(trace, str(first))
    write_trace_csv(horizontal_path(disc.algebra, seed=5, steps=40, frame=disc.frame), str(second))
    assert first.read_bytes() == second.read_bytes()


def test_empty_trace_rejected(disc):
    with pytest.raises(ValueError):
        boundedness_report(PathTrace(), disc.frame)


@pytest.mark.slow
def test_bound_campaign_on_quadric(quadric):
    for s in range(10):
        trace = horizontal_path(quadric.algebra, seed=100 + s, steps=501, frame=quadric.frame)
        assert len(trace) == 501 or trace.truncated
        assert boundedness_report(trace, quadric.frame).max_lambda_dist <= np.sqrt(2) + 1e-8

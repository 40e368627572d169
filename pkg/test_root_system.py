"""
Tests for the root datum, Weyl normalization and the strongly orthogonal frame
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import EXPECTED
from errors import CartanError
from root_system import (cartan_subalgebra, frame_enlargement, joint_weights, restricted_spectrum,
                         root_decomposition, strongly_orthogonal, strongly_orthogonal_frame)


def test_cartan_rank_and_root_count(labs, domain_name):
    lab = labs[domain_name]
    rd = lab.frame.datum
    assert rd.rank == EXPECTED[domain_name][0]
    assert len(rd.roots) == lab.algebra.dim - rd.rank


def test_cartan_is_real_abelian_inside_v0(quadric):
    L = quadric.algebra
    h0 = cartan_subalgebra(L, seed=5)
    assert np.isrealobj(h0)
    for a in h0:
        assert L.skew_residual(a) < 1e-10
        off = np.where(L.shift == 0, 0, L.to_adapted(a))
        assert np.linalg.norm(off) < 1e-10
        for b in h0:
            assert np.linalg.norm(L.bracket(a, b)) < 1e-10


def test_roots_are_one_dimensional_and_pure(labs, domain_name):
    lab = labs[domain_name]
    L, rd = lab.algebra, lab.frame.datum
    for i, r in enumerate(rd.roots):
        assert rd.find(r.values) == i
        XA = L.to_adapted(r.vector)
        assert np.linalg.norm(np.where(L.shift == r.grade, 0, XA)) < 1e-9 * np.linalg.norm(XA)
        assert r.compact == (r.grade % 2 == 0)


def test_sl2_relations_after_normalization(labs, domain_name):
    lab = labs[domain_name]
    L, rd = lab.algebra, lab.frame.datum
    for r in rd.roots:
        e, f, h = r.vector, rd.roots[rd.find(-r.values)].vector, r.coroot
        assert_allclose(L.bracket(h, e), 2 * e, atol=1e-10 * np.linalg.norm(e))
        assert_allclose(L.bracket(h, f), -2 * f, atol=1e-10 * np.linalg.norm(f))
        assert_allclose(L.bracket(e, f), h, atol=1e-10 * np.linalg.norm(h))
        sign = -1 if r.compact else 1
        assert_allclose(f, sign * e.conj(), atol=1e-10 * np.linalg.norm(e))


def test_positive_roots_and_noncompact_count(labs, domain_name):
    rd = labs[domain_name].frame.datum
    assert 2 * len(rd.positive_roots()) == len(rd.roots)
    assert len(rd.noncompact_positive()) == EXPECTED[domain_name][2]


def test_frame_rank(labs, domain_name):
    frame = labs[domain_name].frame
    assert frame.rank == EXPECTED[domain_name][1]
    assert frame_enlargement(frame) is None


def test_frame_is_strongly_orthogonal_and_oriented(labs, domain_name):
    frame = labs[domain_name].frame
    L, rd = frame.algebra, frame.datum
    for i, a in enumerate(frame.roots):
        for b in frame.roots[i + 1:]:
            assert strongly_orthogonal(rd, a, b)
    for e, f, h in frame.triples:
        assert np.linalg.norm(np.where(L.shift < 0, 0, L.to_adapted(e))) < 1e-10
        assert_allclose(f, e.conj(), atol=1e-10)


def test_real_frame_in_p0(siegel):
    frame = siegel.frame
    L = frame.algebra
    for x, y in frame.real_frame:
        for v in (x, y):
            assert np.abs(v.imag).max() < 1e-10
            assert_allclose(v.real, v.real.T, atol=1e-10)
    xs = frame.A0_basis
    assert np.linalg.norm(L.bracket(xs[0], xs[1])) < 1e-10


def test_unnormalized_datum_rejected(disc):
    L = disc.algebra
    rd = root_decomposition(L, cartan_subalgebra(L))
    with pytest.raises(CartanError):
        strongly_orthogonal_frame(rd)


def test_disc_joint_weights(disc):
    w = joint_weights(disc.frame)
    assert sorted(w[:, 0].tolist()) == [-1, 1]


def test_joint_weights_are_integral(siegel):
    w = siegel.frame.joint_weights
    assert w.shape == (4, 2)
    assert sorted(map(tuple, np.abs(w).tolist())) == [(0, 1), (0, 1), (1, 0), (1, 0)]


@pytest.mark.parametrize("t", [(0.3, -1.2), (2.0, 0.5), (0.0, 1.1), (0.8, 0.8)])
def test_restricted_spectrum_recovers_frame_coordinates(siegel, t):
    frame = siegel.frame
    X = sum(ti * x for ti, x in zip(t, frame.A0_basis)).real
    k = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 4)))[0]
    got = restricted_spectrum(frame, k @ X @ k.T)
    assert_allclose(got, sorted(np.abs(t), reverse=True), atol=1e-9)


@pytest.mark.parametrize("t", [(0.4, 1.3), (1.7, -0.2)])
def test_restricted_spectrum_on_quadric(quadric, t):
    frame = quadric.frame
    X = sum(ti * x for ti, x in zip(t, frame.A0_basis)).real
    assert_allclose(restricted_spectrum(frame, X), sorted(np.abs(t), reverse=True), atol=1e-9)


def test_restricted_spectrum_of_zero(quadric):
    assert_allclose(restricted_spectrum(quadric.frame, np.zeros((5, 5))), [0.0, 0.0])

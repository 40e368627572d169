"""
Tests for domain specs, the base point and the Hodge-Riemann test
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from errors import DecompositionError, DomainSpecError, NotInPeriodDomain
from hodge_core import (HodgeStructure, build_domain_spec, check_hodge_riemann, decomposition_roundtrip,
                        domain_spec_from_dict, hermitian_gram, reference_structure, subspace_distance,
                        weil_operator)

SPECS = [(1, [1, 1]), (1, [2, 2]), (2, [1, 1, 1]), (2, [1, 3, 1]), (2, [2, 1, 2]), (3, [1, 1, 1, 1]), (2, [1, 19, 1])]

DISC = build_domain_spec(1, [1, 1])


def disc_point(tau: complex) -> HodgeStructure:
    """F¹ spanned by (1, i) + τ(1, −i), up to scale"""
    return HodgeStructure(DISC, DISC.adapted_basis @ np.array([[1, 0], [tau, 1]], dtype=complex))


def test_disc_polarization_is_standard_symplectic():
    assert_allclose(DISC.polarization, [[0, 1], [-1, 0]])
    assert DISC.total_dim == 2


def test_conic_signature():
    spec = build_domain_spec(2, [1, 1, 1])
    eig = np.linalg.eigvalsh(spec.polarization)
    assert (eig > 0).sum() == 1
    assert (eig < 0).sum() == 2


def test_large_weight_two_ranks():
    spec = build_domain_spec(2, [1, 19, 1])
    assert spec.total_dim == 21
    assert spec.filtration_ranks[:3] == (21, 20, 1)
    assert spec.polarization.shape == (21, 21)


@pytest.mark.parametrize("weight,hodge", SPECS)
def test_polarization_symmetry(weight, hodge):
    spec = build_domain_spec(weight, hodge)
    Q = spec.polarization
    sign = 1 if weight % 2 == 0 else -1
    assert np.isrealobj(Q)
    assert_allclose(Q.T, sign * Q)
    assert abs(np.linalg.det(Q)) > 0.5


@pytest.mark.parametrize("weight,hodge", [(1, [1, 2]), (2, [1, 2]), (1, [0, 0]), (2, [0, 2, 0]), (0, [2]), (1, [-1, -1])])
def test_invalid_specs_rejected(weight, hodge):
    with pytest.raises(DomainSpecError):
        build_domain_spec(weight, hodge)


@pytest.mark.parametrize("weight,hodge", SPECS)
def test_reference_structure_in_domain(weight, hodge):
    report = check_hodge_riemann(reference_structure(build_domain_spec(weight, hodge)))
    assert report.passed
    assert report.hr1_residual < 1e-12
    assert_allclose(report.min_eigenvalue, 1.0, atol=1e-12)


def test_disc_base_point_is_the_i_line():
    hs = reference_structure(DISC)
    assert subspace_distance(hs.filtration(1), np.array([[1], [1j]])) < 1e-12
    v = np.array([1, 1j])
    assert_allclose(1j * v @ DISC.polarization @ v.conj(), 2.0)


def test_conic_weil_eigenvalues():
    spec = build_domain_spec(2, [1, 1, 1])
    C = weil_operator(reference_structure(spec))
    E = spec.adapted_basis
    for k, expected in enumerate([-1, 1, -1]):
        assert_allclose(C @ E[:, k], expected * E[:, k], atol=1e-12)


@pytest.mark.parametrize("weight,hodge", SPECS[:6])
def test_weil_operator_square_and_reality(weight, hodge):
    spec = build_domain_spec(weight, hodge)
    C = weil_operator(reference_structure(spec))
    assert_allclose(C @ C, (-1) ** weight * np.eye(spec.total_dim), atol=1e-12)
    assert np.abs(C.imag).max() < 1e-12


@seed(3)
@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False))
def test_weil_operator_real_on_disc_points(tau):
    C = weil_operator(disc_point(tau))
    assert np.abs(C.imag).max() < 1e-10
    assert_allclose(C @ C, -np.eye(2), atol=1e-10)


def test_conjugate_line_fails_positivity():
    hs = HodgeStructure(DISC, np.array([[1, 1], [-1j, 1j]]))
    report = check_hodge_riemann(hs)
    assert report.hr1
    assert not report.hr2
    assert report.min_eigenvalue < 0


@pytest.mark.parametrize("tau,inside", [(0.5, True), (0.5j, True), (2.0, False), (-1.5j, False)])
def test_disc_criterion(tau, inside):
    assert check_hodge_riemann(disc_point(tau)).passed is inside


@seed(7)
@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False))
def test_disc_interior_passes(tau):
    report = check_hodge_riemann(disc_point(tau))
    assert report.passed
    assert_allclose(report.min_eigenvalue, (1 - abs(tau) ** 2) / (1 + abs(tau) ** 2), atol=1e-10)


@seed(7)
@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(min_magnitude=1.05, max_magnitude=20.0, allow_nan=False, allow_infinity=False))
def test_disc_exterior_fails(tau):
    assert not check_hodge_riemann(disc_point(tau)).passed


def test_singular_basis_rejected():
    with pytest.raises(DomainSpecError):
        check_hodge_riemann(HodgeStructure(DISC, np.array([[1, 2], [1j, 2j]])))


def test_hermitian_gram_is_identity_at_base_point():
    spec = build_domain_spec(2, [1, 3, 1])
    assert_allclose(hermitian_gram(reference_structure(spec)), np.eye(5), atol=1e-12)


def test_roundtrip_inside():
    hs = disc_point(0.5)
    rebuilt = decomposition_roundtrip(hs)
    assert subspace_distance(hs.filtration(1), rebuilt.filtration(1)) < 1e-10


def test_roundtrip_outside_raises_not_in_domain():
    with pytest.raises(NotInPeriodDomain) as info:
        decomposition_roundtrip(disc_point(2.0))
    assert not isinstance(info.value, DecompositionError)
    assert info.value.report is not None
    assert not info.value.report.hr2


@pytest.mark.parametrize("tau", [1.0, np.exp(0.7j)])
def test_roundtrip_on_boundary_raises_decomposition_error(tau):
    with pytest.raises(DecompositionError):
        decomposition_roundtrip(disc_point(tau))


def test_spec_dict_roundtrip():
    spec = build_domain_spec(2, [1, 3, 1])
    again = domain_spec_from_dict(spec.as_dict())
    assert again.hodge_numbers == spec.hodge_numbers
    assert_allclose(again.polarization, spec.polarization)


def test_tampered_polarization_rejected():
    payload = DISC.as_dict()
    payload["Q"][0][1] = [2.0, 0.0]
    with pytest.raises(DomainSpecError):
        domain_spec_from_dict(payload)


def test_subspace_distance():
    A = np.eye(3)[:, :2]
    assert subspace_distance(A, A @ np.array([[1, 2], [3, 4]])) < 1e-14
    assert_allclose(subspace_distance(A, np.eye(3)[:, 1:]), 1.0)
    assert subspace_distance(A, np.eye(3)[:, :1]) == 1.0

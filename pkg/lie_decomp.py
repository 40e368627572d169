"""
The Lie algebra of infinitesimal Q-isometries
Weight-zero Hodge grading, Weil/real-form involutions, Killing form and the
distinguished subspaces b, v0, n_plus, k, p, k0, p0, p_plus, g_c, g0
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import svd

from config import DEFAULT_CONFIG, LabConfig
from errors import NotInLieAlgebra, UnknownSubspace
from hodge_core import DomainSpec, HodgeStructure, reference_structure
from serialization import encode_matrix

logger = logging.getLogger(__name__)

COMPLEX_SUBSPACES = ("b", "n_plus", "k", "p", "p_plus")
REAL_SUBSPACES = ("v0", "k0", "p0", "g_c", "g0")
SUBSPACE_NAMES = COMPLEX_SUBSPACES + REAL_SUBSPACES


def _grade_selector(name: str):
    return {
        "b": lambda k: k >= 0,
        "n_plus": lambda k: k < 0,
        "k": lambda k: k % 2 == 0,
        "p": lambda k: k % 2 == 1,
        "p_plus": lambda k: k < 0 and k % 2 == 1,
    }[name]


@dataclass(frozen=True, eq=False)
class Subspace:
    name: str
    basis: np.ndarray
    real: bool
    parent: "GradedLieAlgebra"

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def contains(self, X: np.ndarray, tol: float = 1e-8) -> bool:
        """Orthogonal-projection residual test"""
        if self.dim == 0:
            return bool(np.linalg.norm(X) <= tol)
        L = self.parent
        G = np.array([[L.inner(a, b) for b in self.basis] for a in self.basis])
        rhs = np.array([L.inner(X, b) for b in self.basis])
        if self.real:
            G, rhs = G.real, rhs.real
        coeffs = np.linalg.solve(G.T, rhs)
        residual = X - np.tensordot(coeffs, self.basis, axes=1)
        return bool(np.linalg.norm(residual) <= tol * max(1.0, np.linalg.norm(X)))


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    """
    Basis of g in the real standard basis of H.

    Every basis element is pure of one grade k (maps H^{r,n-r} into
    H^{r+k,n-r-k}) and the basis is orthonormal for <X,Y> = -B(θX, τ0(Y)).
    killing_scale is the constant with B(X,Y) = killing_scale·tr(XY).
    """
    spec: DomainSpec
    basis: np.ndarray
    grades: np.ndarray
    killing_scale: float
    config: LabConfig = DEFAULT_CONFIG

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @cached_property
    def reference(self) -> HodgeStructure:
        return reference_structure(self.spec)

    @cached_property
    def adapted_type(self) -> np.ndarray:
        """p of each adapted column"""
        spec = self.spec
        return np.concatenate([[p] * spec.h(p) for p in range(spec.weight, -1, -1)]).astype(int)

    @cached_property
    def shift(self) -> np.ndarray:
        """shift[i, j] = p(i) - p(j): the grade carried by adapted entry (i, j)"""
        t = self.adapted_type
        return t[:, None] - t[None, :]

    @cached_property
    def weil(self) -> np.ndarray:
        """Weil operator of the base point"""
        E = self.spec.adapted_basis
        return (E * self.spec.weil_eigenvalues) @ E.conj().T

    def to_adapted(self, X: np.ndarray) -> np.ndarray:
        E = self.spec.adapted_basis
        return E.conj().T @ X @ E

    def from_adapted(self, X: np.ndarray) -> np.ndarray:
        E = self.spec.adapted_basis
        return E @ X @ E.conj().T

    def inner(self, X: np.ndarray, Y: np.ndarray) -> complex:
        return complex(self.killing_scale * np.vdot(Y, X))

    def norm(self, X: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(X, X).real, 0.0)))

    def coordinates(self, X: np.ndarray) -> np.ndarray:
        return self.killing_scale * np.einsum("kab,ab->k", self.basis.conj(), X)

    def element(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=complex), self.basis, axes=1)

    @staticmethod
    def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return X @ Y - Y @ X

    def skew_residual(self, X: np.ndarray) -> float:
        Q = self.spec.polarization
        return float(np.linalg.norm(Q @ X + X.T @ Q))

    def require_member(self, X: np.ndarray) -> None:
        res = self.skew_residual(X)
        if res > self.config.member_tol * max(1.0, float(np.linalg.norm(X))):
            raise NotInLieAlgebra(f"‖QX + XᵀQ‖ = {res:.3e} exceeds tolerance")

    def ad(self, X: np.ndarray) -> np.ndarray:
        """Matrix of ad X in the graded basis"""
        brackets = np.einsum("ab,kbc->kac", X, self.basis) - np.einsum("kab,bc->kac", self.basis, X)
        return self.killing_scale * np.einsum("jab,kab->jk", self.basis.conj(), brackets)

    def indices(self, name: str) -> np.ndarray:
        if name not in COMPLEX_SUBSPACES:
            raise UnknownSubspace(f"{name!r} is not a graded subspace")
        sel = _grade_selector(name)
        return np.array([i for i, k in enumerate(self.grades) if sel(int(k))], dtype=int)

    def grade_indices(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.grades == k)

    @cached_property
    def killing_gram(self) -> np.ndarray:
        return self.killing_scale * np.einsum("iab,jba->ij", self.basis, self.basis)

    @cached_property
    def _real_subspaces(self) -> Dict[str, np.ndarray]:
        return _build_real_subspaces(self)

    def __repr__(self) -> str:
        return f"GradedLieAlgebra(weight={self.spec.weight}, hodge={list(self.spec.hodge_numbers)}, dim={self.dim})"


def _null_space(M: np.ndarray, cutoff: float) -> np.ndarray:
    """Right null space of M; singular values at or below the absolute cutoff count as zero"""
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=M.dtype)
    _, s, vh = svd(M, full_matrices=True)
    rank = int(np.count_nonzero(s > cutoff))
    return vh[rank:].conj().T


def _unit_images(m: int, fn) -> np.ndarray:
    """Columns: fn applied to each real unit matrix, flattened"""
    cols = []
    for i in range(m):
        for j in range(m):
            U = np.zeros((m, m))
            U[i, j] = 1.0
            cols.append(np.asarray(fn(U)).ravel())
    return np.column_stack(cols)


def _realify(M: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(M):
        return np.vstack([M.real, M.imag])
    return M


def _build_real_subspaces(L: GradedLieAlgebra) -> Dict[str, np.ndarray]:
    m = L.spec.total_dim
    Q = L.spec.polarization
    C = L.weil.real
    off_zero = L.shift != 0

    skew = _unit_images(m, lambda X: Q @ X + X.T @ Q)
    commute = _unit_images(m, lambda X: C @ X - X @ C)
    anticommute = _unit_images(m, lambda X: C @ X + X @ C)
    grade_zero = _realify(_unit_images(m, lambda X: L.to_adapted(X)[off_zero]))

    cutoff = L.config.rank_tol * max(1.0, float(np.linalg.norm(Q, 2)))

    def solve(*constraints: np.ndarray) -> np.ndarray:
        N = _null_space(np.vstack(constraints), cutoff)
        mats = N.T.reshape(-1, m, m)
        return mats / np.sqrt(L.killing_scale)

    g0 = solve(skew)
    k0 = solve(skew, commute)
    p0 = solve(skew, anticommute)
    v0 = solve(skew, grade_zero)
    g_c = np.concatenate([k0, 1j * p0]) if p0.size else k0.astype(complex)
    return {"g0": g0, "k0": k0, "p0": p0, "v0": v0, "g_c": g_c}


def _graded_null_space(spec: DomainSpec, shift: np.ndarray, k: int, tol: float) -> List[np.ndarray]:
    """Frobenius-orthonormal basis of g^{k,-k} in adapted coordinates"""
    E = spec.adapted_basis
    QE = E.T @ spec.polarization @ E
    positions = list(zip(*np.nonzero(shift == k)))
    if not positions:
        return []
    m = spec.total_dim
    cols = []
    for i, j in positions:
        U = np.zeros((m, m), dtype=complex)
        U[i, j] = 1.0
        cols.append((U.T @ QE + QE @ U).ravel())
    # QE carries roundoff where it should vanish; the cutoff is absolute in units of |QE|
    N = _null_space(np.column_stack(cols), tol * max(1.0, float(np.linalg.norm(QE, 2))))
    out = []
    for c in N.T:
        X = np.zeros((m, m), dtype=complex)
        for (i, j), v in zip(positions, c):
            X[i, j] = v
        out.append(X)
    return out


def lie_algebra_basis(spec: DomainSpec, config: LabConfig = DEFAULT_CONFIG) -> GradedLieAlgebra:
    """
    Null space of X ↦ QX + XᵀQ, solved grade by grade so every basis
    element is pure, then rescaled to be orthonormal for -B(θ·, τ0·).
    """
    n = spec.weight
    types = np.concatenate([[p] * spec.h(p) for p in range(n, -1, -1)]).astype(int)
    shift = types[:, None] - types[None, :]
    E = spec.adapted_basis

    mats: List[np.ndarray] = []
    grades: List[int] = []
    for k in range(-n, n + 1):
        for X in _graded_null_space(spec, shift, k, config.rank_tol):
            mats.append(E @ X @ E.conj().T)
            grades.append(k)
    basis = np.array(mats)
    provisional = GradedLieAlgebra(spec, basis, np.array(grades), 1.0, config)

    # B is a multiple of the trace form; measure the multiple on one generic element
    rng = np.random.default_rng(0)
    X0 = provisional.element(rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats)))
    Y0 = X0.conj().T
    B = np.trace(provisional.ad(X0) @ provisional.ad(Y0))
    scale = float((B / np.trace(X0 @ Y0)).real)
    if scale <= 0:
        scale = 1.0
        logger.warning("⚠️ Killing form degenerate, falling back to the trace form")

    L = GradedLieAlgebra(spec, basis / np.sqrt(scale), np.array(grades), scale, config)
    expected = spec.total_dim * (spec.total_dim + (1 if n % 2 else -1)) // 2
    if L.dim != expected:
        logger.warning(f"⚠️ dim g = {L.dim}, expected {expected}")
    logger.debug(f"built g: dim {L.dim}, killing scale {scale:.6g}")
    return L


def grade_decompose(L: GradedLieAlgebra, X: np.ndarray) -> Dict[int, np.ndarray]:
    """Components X^{k,-k}, k = -n..n, summing to X"""
    L.require_member(X)
    XA = L.to_adapted(X)
    out = {}
    for k in range(-L.spec.weight, L.spec.weight + 1):
        out[k] = L.from_adapted(np.where(L.shift == k, XA, 0))
    return out


def apply_involution(L: GradedLieAlgebra, kind: str, X: np.ndarray) -> np.ndarray:
    """theta: (-1)^k on grade k; tau0: entrywise conjugation; tauc = theta ∘ tau0"""
    L.require_member(X)
    if kind == "tau0":
        return X.conj()
    if kind == "theta":
        return L.from_adapted(np.where(L.shift % 2 == 0, 1.0, -1.0) * L.to_adapted(X))
    if kind == "tauc":
        return apply_involution(L, "theta", X.conj())
    raise ValueError(f"unknown involution {kind!r}")


def killing_form(L: GradedLieAlgebra, X: np.ndarray, Y: np.ndarray) -> complex:
    """B(X, Y) = tr(ad X ∘ ad Y)"""
    return complex(np.trace(L.ad(X) @ L.ad(Y)))


def extract_subspace(L: GradedLieAlgebra, name: str) -> Subspace:
    if name in COMPLEX_SUBSPACES:
        return Subspace(name, L.basis[L.indices(name)], False, L)
    if name in REAL_SUBSPACES:
        return Subspace(name, L._real_subspaces[name], name != "g_c", L)
    raise UnknownSubspace(f"unknown subspace {name!r}; expected one of {', '.join(SUBSPACE_NAMES)}")


def is_hermitian_symmetric(L: GradedLieAlgebra) -> bool:
    """True when n_plus = p_plus (no even grade below zero)"""
    return not any(k < 0 and k % 2 == 0 for k in L.grades)


def random_element(L: GradedLieAlgebra, name: str, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Random element of a named subspace with <,>-norm equal to norm"""
    sub = extract_subspace(L, name)
    if sub.dim == 0:
        return np.zeros_like(L.basis[0])
    c = rng.standard_normal(sub.dim)
    if not sub.real:
        c = c + 1j * rng.standard_normal(sub.dim)
    X = np.tensordot(c, sub.basis, axes=1)
    size = L.norm(X)
    return X * (norm / size) if size > 0 else X


def centralizer(
    L: GradedLieAlgebra,
    span: np.ndarray,
    elements: Sequence[np.ndarray],
    real: bool = True,
    tol: Optional[float] = None,
) -> np.ndarray:
    """Basis of {Z ∈ span : [Z, x] = 0 for all x in elements}"""
    if span.shape[0] == 0:
        return span
    if len(elements) == 0:
        return span
    scale = max(np.linalg.norm(S) for S in span) * max(np.linalg.norm(x) for x in elements)
    if scale == 0:
        return span
    cols = []
    for S in span:
        cols.append(np.concatenate([L.bracket(S, x).ravel() for x in elements]))
    M = np.column_stack(cols)
    if real:
        M = _realify(M)
    # brackets that vanish come back as roundoff of order eps·scale
    N = _null_space(M, (tol or L.config.rank_tol * 10) * scale)
    if N.shape[1] == 0:
        return np.zeros((0,) + span.shape[1:], dtype=span.dtype)
    return np.tensordot(N.T, span, axes=1)


def export_graded_basis(L: GradedLieAlgebra) -> List[Dict]:
    return [{"grade": int(k), "matrix": encode_matrix(X)} for k, X in zip(L.grades, L.basis)]

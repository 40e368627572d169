"""
Big-cell coordinates on the compact dual
Block partition, block-LU membership test for N₊, log-coordinates in n_plus,
the D-membership test and the projections P₊ / P onto abelian subspaces
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm, svdvals

from config import DEFAULT_CONFIG, LabConfig
from errors import IndeterminateMembership, NotInBigCell, SubspaceError
from hodge_core import DomainSpec, HodgeRiemannReport, HodgeStructure, check_hodge_riemann
from lie_decomp import GradedLieAlgebra, random_element
from serialization import decode_matrix, encode_matrix, encode_vector

logger = logging.getLogger(__name__)


def block_partition(spec: DomainSpec) -> List[Tuple[int, int]]:
    """Row/column range of block α (α = 0 is H^{n,0})"""
    f, n = spec.filtration_ranks, spec.weight
    return [(f[n - a + 1], f[n - a]) for a in range(n + 1)]


def nilpotent_exp(N: np.ndarray, order: int) -> np.ndarray:
    """exp of a nilpotent matrix with N^{order+1} = 0"""
    out = np.eye(N.shape[0], dtype=complex)
    term = np.eye(N.shape[0], dtype=complex)
    for k in range(1, order + 1):
        term = term @ N / k
        out = out + term
    return out


def unipotent_log(L: np.ndarray, order: int) -> np.ndarray:
    """Mercator series Σ (−1)^{k+1}(L − I)^k / k, exact once (L − I)^{order+1} = 0"""
    N = L - np.eye(L.shape[0])
    out = np.zeros_like(N, dtype=complex)
    power = np.eye(L.shape[0], dtype=complex)
    for k in range(1, order + 1):
        power = power @ N
        out = out + ((-1) ** (k + 1)) * power / k
    return out


@dataclass(frozen=True, eq=False)
class FlagPoint:
    """Filtration spanned by the leading columns of adapted_basis @ matrix"""
    spec: DomainSpec
    matrix: np.ndarray

    @classmethod
    def from_group(cls, spec: DomainSpec, g: np.ndarray) -> "FlagPoint":
        """Image g·o of the base point, g acting on H in the standard basis"""
        E = spec.adapted_basis
        return cls(spec, E.conj().T @ g @ E)

    @classmethod
    def from_dict(cls, spec: DomainSpec, payload: Dict) -> "FlagPoint":
        return cls(spec, decode_matrix(payload["matrix"]))

    def basis(self) -> np.ndarray:
        return self.spec.adapted_basis @ self.matrix

    def hodge_structure(self, config: LabConfig = DEFAULT_CONFIG) -> HodgeStructure:
        return HodgeStructure(self.spec, self.basis(), config.rank_tol)

    def as_dict(self) -> Dict:
        return {"matrix": encode_matrix(self.matrix)}


@dataclass(frozen=True, eq=False)
class BlockLU:
    L: np.ndarray
    U: np.ndarray
    log_L: np.ndarray       # adapted coordinates
    min_minor: float


def _block_lu(spec: DomainSpec, A: np.ndarray, config: LabConfig) -> Tuple[Optional[np.ndarray], Optional[np.ndarray], float]:
    blocks = [(lo, hi) for lo, hi in block_partition(spec) if hi > lo]
    U = np.array(A, dtype=complex)
    Lm = np.eye(A.shape[0], dtype=complex)
    scale = float(svdvals(U).max())
    min_minor = np.inf
    for lo, hi in blocks:
        pivot = U[lo:hi, lo:hi]
        scale = max(scale, float(np.linalg.norm(U, 2)))
        measure = float(svdvals(pivot).min()) / scale
        min_minor = min(min_minor, measure)
        if measure < config.minor_tol:
            return None, None, min_minor
        if hi < A.shape[0]:
            factor = np.linalg.solve(pivot.T, U[hi:, lo:hi].T).T
            Lm[hi:, lo:hi] = factor
            U[hi:, :] -= factor @ U[lo:hi, :]
            U[hi:, lo:hi] = 0.0
    return Lm, U, min_minor


def nplus_membership_lu(pt: FlagPoint, config: LabConfig = DEFAULT_CONFIG) -> Optional[BlockLU]:
    """
    Unique factorization matrix = L·U (L block-lower unipotent, U block-upper)
    when every leading block minor is nonsingular; None when one vanishes.
    Minors inside the borderline band raise IndeterminateMembership.
    """
    s = svdvals(pt.matrix)
    if s.min() <= config.rank_tol * s.max():
        raise NotInBigCell("flag matrix is singular")
    Lm, U, min_minor = _block_lu(pt.spec, pt.matrix, config)
    if Lm is None:
        return None
    if min_minor < config.minor_band:
        raise IndeterminateMembership(f"leading block minor {min_minor:.3e} inside the borderline band", min_minor)
    return BlockLU(L=Lm, U=U, log_L=unipotent_log(Lm, pt.spec.weight), min_minor=min_minor)


def leading_minor_measure(pt: FlagPoint, config: LabConfig = DEFAULT_CONFIG) -> float:
    """Smallest normalized pivot singular value, defined for every nonsingular point"""
    return _block_lu(pt.spec, pt.matrix, config)[2]


def _require_lu(pt: Union[FlagPoint, BlockLU], config: LabConfig) -> BlockLU:
    if isinstance(pt, BlockLU):
        return pt
    lu = nplus_membership_lu(pt, config)
    if lu is None:
        raise NotInBigCell("point is not in the big cell N₊")
    return lu


def nplus_element(L: GradedLieAlgebra, pt: Union[FlagPoint, BlockLU]) -> np.ndarray:
    """log of the L factor as a matrix in the standard basis"""
    return L.from_adapted(_require_lu(pt, L.config).log_L)


def nplus_coordinates(L: GradedLieAlgebra, pt: Union[FlagPoint, BlockLU]) -> np.ndarray:
    """Coordinates of log L on the graded basis of n_plus"""
    return L.coordinates(nplus_element(L, pt))[L.indices("n_plus")]


def exp_nplus(L: GradedLieAlgebra, X: np.ndarray) -> FlagPoint:
    """exp(X)·o for X ∈ n_plus, terminating series"""
    return FlagPoint(L.spec, nilpotent_exp(L.to_adapted(X), L.spec.weight))


def in_period_domain(pt: Union[FlagPoint, BlockLU], spec: Optional[DomainSpec] = None,
                     config: LabConfig = DEFAULT_CONFIG) -> HodgeRiemannReport:
    """HR1'/HR2' evaluated on L·(reference basis)"""
    spec = spec or pt.spec
    lu = _require_lu(pt, config)
    return check_hodge_riemann(HodgeStructure(spec, spec.adapted_basis @ lu.L, config.rank_tol), config)


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projection of n_plus onto a subspace with <,>-orthonormal basis"""
    algebra: GradedLieAlgebra
    name: str
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def coordinates(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.algebra.inner(X, b) for b in self.basis], dtype=complex)

    def element(self, coords: Sequence[complex]) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=complex), self.basis, axes=1)

    def project(self, X: np.ndarray) -> np.ndarray:
        _require_nplus(self.algebra, X)
        return self.element(self.coordinates(X))

    def lift(self, pt: Union[FlagPoint, BlockLU]) -> FlagPoint:
        """exp ∘ projection ∘ log on the big cell"""
        return exp_nplus(self.algebra, self.project(nplus_element(self.algebra, pt)))


def _require_nplus(L: GradedLieAlgebra, X: np.ndarray) -> None:
    XA = L.to_adapted(X)
    outside = float(np.linalg.norm(np.where(L.shift < 0, 0, XA)))
    if outside > L.config.member_tol * max(1.0, float(np.linalg.norm(X))):
        raise SubspaceError(f"element has a b-component of norm {outside:.3e}")


def _orthonormalize(L: GradedLieAlgebra, mats: Sequence[np.ndarray]) -> np.ndarray:
    out: List[np.ndarray] = []
    for X in mats:
        Y = np.array(X, dtype=complex)
        for b in out:
            Y = Y - L.inner(Y, b) * b
        size = L.norm(Y)
        if size <= 1e-8 * max(1.0, L.norm(np.asarray(X))):
            raise SubspaceError("frame is linearly dependent")
        out.append(Y / size)
    return np.array(out)


def subspace_projector(L: GradedLieAlgebra, target: Union[str, Sequence[np.ndarray]]) -> Projector:
    """p_plus / n_plus, or an explicit abelian frame inside g^{-1,1}"""
    if isinstance(target, str):
        if target not in ("p_plus", "n_plus"):
            raise SubspaceError(f"{target!r} is not a subspace of n_plus")
        return Projector(L, target, L.basis[L.indices(target)])
    mats = [np.asarray(X, dtype=complex) for X in target]
    if not mats:
        raise SubspaceError("empty frame")
    for X in mats:
        L.require_member(X)
        off = float(np.linalg.norm(np.where(L.shift == -1, 0, L.to_adapted(X))))
        if off > L.config.member_tol * max(1.0, float(np.linalg.norm(X))):
            raise SubspaceError("frame element is not inside g^{-1,1}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.linalg.norm(L.bracket(mats[i], mats[j])) > 1e-10 * max(1.0, np.linalg.norm(mats[i]) * np.linalg.norm(mats[j])):
                raise SubspaceError("frame is not abelian")
    return Projector(L, "a", _orthonormalize(L, mats))


def project_subspace(L: GradedLieAlgebra, X: np.ndarray, target: Union[str, Sequence[np.ndarray]] = "p_plus") -> np.ndarray:
    return subspace_projector(L, target).project(X)


def pplus_lift(L: GradedLieAlgebra, pt: Union[FlagPoint, BlockLU]) -> FlagPoint:
    """P₊ = exp ∘ p₊ ∘ log"""
    return subspace_projector(L, "p_plus").lift(pt)


def random_domain_point(L: GradedLieAlgebra, rng: np.random.Generator, spread: float = 1.0) -> FlagPoint:
    """exp(X)·o with X ∈ p0 of random direction and norm uniform in [0, spread)"""
    X = random_element(L, "p0", rng, norm=spread * rng.uniform())
    return FlagPoint.from_group(L.spec, expm(X))


def membership_report(L: GradedLieAlgebra, pt: FlagPoint) -> Dict:
    """{"in_nplus", "min_abs_minor", "in_D", "min_eig", "nplus_coords"}"""
    config = L.config
    report = {"in_nplus": False, "min_abs_minor": leading_minor_measure(pt, config),
              "in_D": False, "min_eig": None, "nplus_coords": []}
    try:
        lu = nplus_membership_lu(pt, config)
    except IndeterminateMembership as e:
        report["indeterminate"] = True
        logger.warning(f"⚠️ {e}")
        return report
    if lu is None:
        return report
    hr = in_period_domain(lu, pt.spec, config)
    report.update(
        in_nplus=True,
        in_D=hr.passed,
        min_eig=hr.min_eigenvalue,
        nplus_coords=encode_vector(nplus_coordinates(L, lu)),
    )
    return report

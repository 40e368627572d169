"""
Harish-Chandra realization at desk scale
SL2 factorization, the tanh correspondence iota, the projection pi onto
G_R/K by polar decomposition, the P₊ diagram check and Λ-frame reports
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import cholesky, expm, orth, svd

from config import DEFAULT_CONFIG, LabConfig
from errors import NotInBigCell, NotInCompactGroup, NotInPeriodDomain, PolarNonConvergence
from flag_nplus import FlagPoint, in_period_domain, nplus_element, nplus_membership_lu, pplus_lift
from hodge_core import HodgeStructure, check_hodge_riemann, subspace_distance, weil_operator
from lie_decomp import GradedLieAlgebra, random_element
from root_system import SOFrame, restricted_spectrum
from serialization import encode_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SymmetricSpacePoint:
    """Coset gK represented by its polar part exp(X), X ∈ p0"""
    representative: np.ndarray
    polar: np.ndarray
    log: np.ndarray
    compact_part: np.ndarray
    iterations: int = 0

    def distance(self, other: "SymmetricSpacePoint") -> float:
        return float(np.linalg.norm(self.log - other.log) / (1.0 + np.linalg.norm(self.log)))


@dataclass
class HCReport:
    lambda_coords: np.ndarray
    sup_norm: float
    euclid_dist: float
    inside: bool
    rank_r: int

    def as_dict(self) -> Dict:
        return {
            "lambda_coords": encode_vector(self.lambda_coords),
            "sup_norm": self.sup_norm,
            "euclid_dist": self.euclid_dist,
            "inside": self.inside,
            "rank_r": self.rank_r,
        }


def hc_report(lam: Sequence[complex]) -> HCReport:
    lam = np.asarray(lam, dtype=complex)
    sup = float(np.abs(lam).max()) if lam.size else 0.0
    return HCReport(
        lambda_coords=lam,
        sup_norm=sup,
        euclid_dist=float(np.linalg.norm(lam)),
        inside=sup < 1.0,
        rank_r=int(lam.size),
    )


# ---------------------------------------------------------------- SL2 ----

def sl2_factorization(frame: SOFrame, z: complex, i: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """exp((z/|z|)tanh|z| e_i), exp(−log cosh|z| h_i), exp((z̄/|z|)tanh|z| f_i)"""
    e, f, h = frame.triples[i]
    r = abs(z)
    if r == 0:
        eye = np.eye(e.shape[0], dtype=complex)
        return eye, eye.copy(), eye.copy()
    u = z / r
    t = np.tanh(r)
    return expm(u * t * e), expm(-np.log(np.cosh(r)) * h), expm(np.conj(u) * t * f)


def sl2_product_residual(frame: SOFrame, z: complex, i: int) -> float:
    """Relative distance between the three-factor product and exp(a·x_i + b·y_i)"""
    x, y = frame.real_frame[i]
    target = expm(z.real * x + z.imag * y)
    A, B, C = sl2_factorization(frame, z, i)
    return float(np.linalg.norm(A @ B @ C - target) / np.linalg.norm(target))


def sl2_nplus_coordinate(frame: SOFrame, z: complex, i: int) -> complex:
    """Coefficient on e_i of the N₊ coordinate of the product (equals (z/|z|)tanh|z|)"""
    L = frame.algebra
    A, B, C = sl2_factorization(frame, z, i)
    X = nplus_element(L, FlagPoint.from_group(L.spec, A @ B @ C))
    e = frame.triples[i][0]
    return complex(L.inner(X, e) / L.inner(e, e))


# ------------------------------------------------------------- K, iota ----

def in_compact_group(L: GradedLieAlgebra, k: np.ndarray, tol: Optional[float] = None) -> bool:
    """k preserves Q and the base Hermitian form (identity in the standard basis) and is real"""
    tol = tol or L.config.k_tol
    Q = L.spec.polarization
    k = np.asarray(k)
    eye = np.eye(k.shape[0])
    return bool(
        np.abs(np.imag(k)).max() <= tol
        and np.linalg.norm(k.T @ Q @ k - Q) <= tol * max(1.0, np.linalg.norm(Q))
        and np.linalg.norm(k.conj().T @ k - eye) <= tol
    )


def random_compact(L: GradedLieAlgebra, rng: np.random.Generator, within_stabilizer: bool = True,
                   spread: float = np.pi) -> np.ndarray:
    """exp of a random element of v0 (default) or of k0"""
    name = "v0" if within_stabilizer else "k0"
    return expm(random_element(L, name, rng, norm=spread * rng.uniform())).real


@dataclass(frozen=True, eq=False)
class HCCorrespondence:
    X: np.ndarray
    Y: np.ndarray
    k: np.ndarray
    t: np.ndarray
    coincidence: float              # subspace distance between exp(X)·o and exp(Y)·o
    report: HCReport


def _flag_distance(spec, g1: np.ndarray, g2: np.ndarray) -> float:
    E = spec.adapted_basis
    B1, B2 = g1 @ E, g2 @ E
    return max(
        subspace_distance(B1[:, :f], B2[:, :f])
        for f in spec.filtration_ranks[1:-1] if 0 < f < spec.total_dim
    ) if spec.weight > 0 else 0.0


def iota_hc(frame: SOFrame, t: Sequence[float], k: Optional[np.ndarray] = None) -> HCCorrespondence:
    """
    X = Σ t_i Ad(k⁻¹)x_i ∈ p0 and Y = Σ tanh(t_i) Ad(k⁻¹)e_i ∈ p₊;
    exp(X)·o and exp(Y)·o agree whenever k fixes o.
    """
    L = frame.algebra
    t = np.asarray(t, dtype=float)
    if t.shape != (frame.rank,):
        raise ValueError(f"expected {frame.rank} parameters, got {t.shape}")
    m = L.spec.total_dim
    k = np.eye(m) if k is None else np.asarray(k)
    if not in_compact_group(L, k):
        raise NotInCompactGroup("k does not preserve Q and the base Hermitian form")
    kinv = k.conj().T
    X = sum((ti * (kinv @ x @ k) for ti, x in zip(t, frame.A0_basis)), np.zeros((m, m), dtype=complex))
    Y = sum((np.tanh(ti) * (kinv @ e @ k) for ti, (e, _, _) in zip(t, frame.triples)), np.zeros((m, m), dtype=complex))
    coincidence = _flag_distance(L.spec, expm(X), expm(Y))
    return HCCorrespondence(X=X.real, Y=Y, k=k, t=t, coincidence=coincidence, report=hc_report(np.tanh(t)))


# ------------------------------------------------------------ pi, polar ----

def _as_hodge(pt: Union[FlagPoint, HodgeStructure], config: LabConfig) -> HodgeStructure:
    if isinstance(pt, HodgeStructure):
        return pt
    return pt.hodge_structure(config)


def group_point_from_filtration(pt: Union[FlagPoint, HodgeStructure], config: LabConfig = DEFAULT_CONFIG) -> np.ndarray:
    """
    Real g ∈ G_R with g·o = pt: conj-compatible bases of the Hodge decomposition
    orthonormal for the point's Hermitian form, mapped onto the base point's.
    """
    hs = _as_hodge(pt, config)
    report = check_hodge_riemann(hs, config)
    if not report.passed:
        raise NotInPeriodDomain("point is not in D", report)
    spec = hs.spec
    n, m = spec.weight, spec.total_dim
    Q = spec.polarization
    C = weil_operator(hs)

    def gram(W: np.ndarray) -> np.ndarray:
        G = (C @ W).T @ Q @ W.conj()
        return (G + G.conj().T) / 2

    blocks: Dict[int, np.ndarray] = {}
    for p in range(n, -1, -1):
        q = n - p
        if p < q or spec.h(p) == 0:
            continue
        W = hs.decomposition[p]
        if p == q:
            R = orth(np.hstack([W.real, W.imag]))
            if R.shape[1] != W.shape[1]:
                U, _, _ = svd(np.hstack([W.real, W.imag]), full_matrices=False)
                R = U[:, : W.shape[1]]
            G = gram(R.astype(complex)).real
            blocks[p] = (R @ np.linalg.inv(cholesky(G))).astype(complex)
        else:
            Ru = cholesky(gram(W))
            blocks[p] = W @ np.linalg.inv(Ru).conj()
            blocks[q] = blocks[p].conj()

    W = np.hstack([blocks[p] for p in range(n, -1, -1) if spec.h(p) > 0])
    g = W @ spec.adapted_basis.conj().T
    imag = float(np.abs(g.imag).max())
    if imag > 1e-8 * max(1.0, float(np.abs(g).max())):
        logger.warning(f"⚠️ group point has imaginary part {imag:.2e}")
    g = g.real
    drift = float(np.linalg.norm(g.T @ Q @ g - Q))
    if drift > 1e-8 * max(1.0, float(np.linalg.norm(g)) ** 2):
        logger.warning(f"⚠️ group point preserves Q only to {drift:.2e}")
    return g


def polar_decomposition(g: np.ndarray, config: LabConfig = DEFAULT_CONFIG) -> Tuple[np.ndarray, np.ndarray, int]:
    """g = P·k with P symmetric positive definite, k orthogonal; scaled Newton iteration"""
    U = np.array(g, dtype=float)
    prev = np.inf
    for it in range(1, config.polar_max_iter + 1):
        inv_t = np.linalg.inv(U).T
        gamma = np.sqrt(np.linalg.norm(inv_t) / np.linalg.norm(U))
        nxt = 0.5 * (gamma * U + inv_t / gamma)
        delta = float(np.linalg.norm(nxt - U))
        U = nxt
        size = float(np.linalg.norm(U))
        if delta <= config.polar_tol * size:
            break
        # roundoff floor for ill-conditioned g
        if it > 3 and delta >= prev and delta < 1e-6 * size:
            break
        prev = delta
    else:
        raise PolarNonConvergence(f"polar iteration did not converge in {config.polar_max_iter} steps")
    P = g @ U.T
    return (P + P.T) / 2, U, it


def symmetric_point(g: np.ndarray, config: LabConfig = DEFAULT_CONFIG) -> SymmetricSpacePoint:
    P, k, iterations = polar_decomposition(g, config)
    w, V = np.linalg.eigh(P)
    if w.min() <= 0:
        raise PolarNonConvergence("polar part is not positive definite")
    X = (V * np.log(w)) @ V.T
    return SymmetricSpacePoint(representative=g, polar=P, log=X, compact_part=k, iterations=iterations)


def project_pi(pt: Union[FlagPoint, HodgeStructure], config: LabConfig = DEFAULT_CONFIG) -> SymmetricSpacePoint:
    """pi: D → G_R/K"""
    return symmetric_point(group_point_from_filtration(pt, config), config)


# ---------------------------------------------------------- diagram ----

@dataclass
class DiagramReport:
    landed: bool
    residual: Optional[float]
    passed: bool
    min_eig_pplus: Optional[float] = None

    def as_dict(self) -> Dict:
        return {"landed": self.landed, "residual": self.residual, "passed": self.passed,
                "min_eig_pplus": self.min_eig_pplus}


def check_diagram(frame: SOFrame, pt: FlagPoint) -> DiagramReport:
    """Compare pi(pt) with pi₊(P₊(pt)); pi₊ inverts iota on exp(p₊)∩D"""
    L = frame.algebra
    config = L.config
    lu = nplus_membership_lu(pt, config)
    if lu is None:
        raise NotInBigCell("point is not in N₊")
    base = project_pi(pt, config)
    image = pplus_lift(L, lu)
    hr = in_period_domain(image, config=config)
    if not hr.passed:
        logger.debug(f"P₊ image left D (min eigenvalue {hr.min_eigenvalue:.3e})")
        return DiagramReport(landed=False, residual=None, passed=False, min_eig_pplus=hr.min_eigenvalue)
    residual = base.distance(project_pi(image, config))
    return DiagramReport(landed=True, residual=residual, passed=residual < config.diagram_tol,
                         min_eig_pplus=hr.min_eigenvalue)


def lambda_report(frame: SOFrame, pt: FlagPoint) -> HCReport:
    """Λ-frame report of a point of exp(p₊)∩D via its pi-image"""
    X = project_pi(pt, frame.algebra.config).log
    return hc_report(np.tanh(restricted_spectrum(frame, X)).astype(complex))

"""
Polarized Hodge structures
Domain specs, the canonical base point and the Hodge-Riemann membership test
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import orth, svd, svdvals

from config import DEFAULT_CONFIG, LabConfig
from errors import DecompositionError, DomainSpecError, NotInPeriodDomain
from serialization import decode_matrix, encode_matrix

logger = logging.getLogger(__name__)

_I_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def i_power(k: int) -> complex:
    """Exact (√−1)^k for integer k"""
    return _I_POWERS[k % 4]


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Type of a polarized Hodge structure plus its canonical polarization"""
    weight: int
    hodge_numbers: Tuple[int, ...]
    polarization: np.ndarray
    adapted_basis: np.ndarray = field(repr=False)

    @property
    def total_dim(self) -> int:
        return int(sum(self.hodge_numbers))

    @cached_property
    def filtration_ranks(self) -> Tuple[int, ...]:
        """f^k for k = 0..n+1"""
        n = self.weight
        return tuple(int(sum(self.hodge_numbers[: n - k + 1])) for k in range(n + 2))

    def h(self, p: int) -> int:
        """h^{p, n-p}"""
        return self.hodge_numbers[self.weight - p]

    def block_range(self, p: int) -> Tuple[int, int]:
        """Column range of H^{p,n-p} inside an adapted basis"""
        f = self.filtration_ranks
        return f[p + 1], f[p]

    @cached_property
    def weil_eigenvalues(self) -> np.ndarray:
        """(√−1)^{2p−n} for every adapted column"""
        n = self.weight
        vals: List[complex] = []
        for p in range(n, -1, -1):
            vals.extend([i_power(2 * p - n)] * self.h(p))
        return np.array(vals, dtype=complex)

    def as_dict(self) -> Dict:
        return {
            "weight": self.weight,
            "hodge_numbers": list(self.hodge_numbers),
            "Q": encode_matrix(self.polarization),
        }


def build_domain_spec(weight: int, hodge_numbers: Sequence[int]) -> DomainSpec:
    """
    Build the spec together with its canonical Q.

    The adapted basis is fixed first: H^{p,q} and H^{q,p} (p > q) share a pair
    of real standard vectors a, b through the columns (a ± ib)/√2, middle
    columns are standard vectors. Q is then the form that makes this basis
    satisfy both Hodge-Riemann relations with unit Hermitian form.
    """
    n = int(weight)
    hodge = tuple(int(h) for h in hodge_numbers)
    if n < 0:
        raise DomainSpecError("weight must be nonnegative")
    if len(hodge) != n + 1:
        raise DomainSpecError(f"weight {n} needs {n + 1} Hodge numbers, got {len(hodge)}")
    if any(h < 0 for h in hodge):
        raise DomainSpecError("Hodge numbers must be nonnegative")
    if hodge != hodge[::-1]:
        raise DomainSpecError(f"Hodge numbers {list(hodge)} are not symmetric")
    m = sum(hodge)
    if m == 0:
        raise DomainSpecError("total dimension is zero")
    if m < 2:
        raise DomainSpecError("total dimension must be at least 2")
    if n % 2 == 0 and m <= 2:
        # so(1), so(2): no semisimple part to work with
        raise DomainSpecError(f"orthogonal algebra of dimension {m} is not semisimple")

    Q = np.zeros((m, m))
    blocks: Dict[int, List[np.ndarray]] = {p: [] for p in range(n + 1)}
    idx = 0
    s2 = np.sqrt(2.0)
    for p in range(n, n // 2, -1):
        q = n - p
        if p == q:
            continue
        c = i_power(n - 2 * p)
        for _ in range(hodge[n - p]):
            a, b = idx, idx + 1
            idx += 2
            va = np.zeros(m, dtype=complex)
            va[a], va[b] = 1 / s2, 1j / s2
            blocks[p].append(va)
            blocks[q].append(va.conj())
            if n % 2 == 0:
                Q[a, a] = Q[b, b] = c.real
            else:
                Q[a, b] = (-c / 1j).real
                Q[b, a] = (c / 1j).real
    if n % 2 == 0:
        for _ in range(hodge[n // 2]):
            v = np.zeros(m, dtype=complex)
            v[idx] = 1.0
            Q[idx, idx] = 1.0
            blocks[n // 2].append(v)
            idx += 1

    columns = [v for p in range(n, -1, -1) for v in blocks[p]]
    basis = np.column_stack(columns)
    spec = DomainSpec(weight=n, hodge_numbers=hodge, polarization=Q, adapted_basis=basis)
    logger.debug(f"built domain weight={n} hodge={list(hodge)} m={m}")
    return spec


def domain_spec_from_dict(payload: Dict) -> DomainSpec:
    """Reload a serialized spec; the stored Q must match the canonical one"""
    try:
        spec = build_domain_spec(payload["weight"], payload["hodge_numbers"])
    except KeyError as e:
        raise DomainSpecError(f"missing field {e}") from e
    if "Q" in payload:
        stored = decode_matrix(payload["Q"])
        if stored.shape != spec.polarization.shape or not np.allclose(stored, spec.polarization, atol=1e-12):
            raise DomainSpecError("stored polarization does not match the canonical form")
    return spec


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Sine of the largest principal angle between two column spans (1.0 if dimensions differ)"""
    QA, QB = orth(np.atleast_2d(A)), orth(np.atleast_2d(B))
    if QA.shape[1] != QB.shape[1]:
        return 1.0
    if QA.shape[1] == 0:
        return 0.0
    residual = QB - QA @ (QA.conj().T @ QB)
    return float(svdvals(residual).max())


def _intersection(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of span(A) ∩ span(B)"""
    QA, QB = orth(A), orth(B)
    M = np.hstack([QA, -QB])
    _, s, Vh = svd(M)
    s_full = np.zeros(M.shape[1])
    s_full[: len(s)] = s
    scale = max(1.0, float(s_full.max()))
    null_rows = Vh[s_full <= tol * scale]
    if null_rows.shape[0] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return orth(QA @ null_rows[:, : QA.shape[1]].conj().T)


@dataclass(frozen=True, eq=False)
class HodgeStructure:
    """A point of the compact dual given by an adapted basis"""
    spec: DomainSpec
    basis_matrix: np.ndarray
    tol: float = DEFAULT_CONFIG.rank_tol

    def filtration(self, k: int) -> np.ndarray:
        """Columns spanning F^k"""
        k = max(0, min(k, self.spec.weight + 1))
        return self.basis_matrix[:, : self.spec.filtration_ranks[k]]

    @cached_property
    def decomposition(self) -> Dict[int, np.ndarray]:
        """H^{p,q} = F^p ∩ conj(F^q), orthonormal columns per p"""
        n = self.spec.weight
        blocks: Dict[int, np.ndarray] = {}
        for p in range(n, -1, -1):
            h = self.spec.h(p)
            if h == 0:
                blocks[p] = np.zeros((self.spec.total_dim, 0), dtype=complex)
                continue
            W = _intersection(self.filtration(p), self.filtration(n - p).conj(), self.tol)
            if W.shape[1] != h:
                raise DecompositionError(
                    f"dim F^{p} ∩ conj(F^{n - p}) = {W.shape[1]}, expected h^{{{p},{n - p}}} = {h}"
                )
            blocks[p] = W
        stacked = np.hstack([blocks[p] for p in range(n, -1, -1)])
        s = svdvals(stacked)
        if s.min() <= self.tol * s.max():
            raise DecompositionError("Hodge subspaces do not form a direct sum")
        return blocks

    @cached_property
    def decomposition_basis(self) -> np.ndarray:
        n = self.spec.weight
        return np.hstack([self.decomposition[p] for p in range(n, -1, -1)])


def reference_structure(spec: DomainSpec) -> HodgeStructure:
    """Canonical base point o"""
    return HodgeStructure(spec, spec.adapted_basis.copy())


def weil_operator(hs: HodgeStructure) -> np.ndarray:
    """C = (√−1)^{2p−n} on H^{p,n−p}, in the real standard basis"""
    W = hs.decomposition_basis
    return W @ np.diag(hs.spec.weil_eigenvalues) @ np.linalg.inv(W)


def hermitian_gram(hs: HodgeStructure) -> np.ndarray:
    """Matrix of (u, v) = Q(Cu, v̄) on the decomposition basis"""
    W = hs.decomposition_basis
    CW = weil_operator(hs) @ W
    G = CW.T @ hs.spec.polarization @ W.conj()
    return (G + G.conj().T) / 2


@dataclass
class HodgeRiemannReport:
    in_compact_dual_ok: bool
    hr1: bool
    hr2: bool
    min_eigenvalue: float
    hr1_residual: float

    @property
    def passed(self) -> bool:
        return self.in_compact_dual_ok and self.hr1 and self.hr2

    def as_dict(self) -> Dict:
        return {
            "in_compact_dual_ok": self.in_compact_dual_ok,
            "hr1": self.hr1,
            "hr2": self.hr2,
            "min_eigenvalue": self.min_eigenvalue,
            "hr1_residual": self.hr1_residual,
        }


def check_hodge_riemann(hs: HodgeStructure, config: LabConfig = DEFAULT_CONFIG) -> HodgeRiemannReport:
    """Evaluate HR1' (isotropy) and HR2' (positivity) for a filtration"""
    spec = hs.spec
    s = svdvals(hs.basis_matrix)
    if s.min() <= config.rank_tol * s.max():
        raise DomainSpecError("basis matrix is singular")

    n = spec.weight
    Q = spec.polarization
    residual = 0.0
    for i in range(1, n + 1):
        A, B = hs.filtration(i), hs.filtration(n - i + 1)
        if A.shape[1] == 0 or B.shape[1] == 0:
            continue
        residual = max(residual, float(np.abs(orth(A).T @ Q @ orth(B)).max()))
    hr1 = residual <= config.rank_tol * max(1.0, float(np.abs(Q).max()))

    try:
        min_eig = float(np.linalg.eigvalsh(hermitian_gram(hs)).min())
    except DecompositionError:
        # the Hermitian form degenerates exactly where the decomposition does
        min_eig = 0.0
    hr2 = min_eig > config.rank_tol
    return HodgeRiemannReport(
        in_compact_dual_ok=hr1,
        hr1=hr1,
        hr2=hr2,
        min_eigenvalue=min_eig,
        hr1_residual=residual,
    )


def decomposition_roundtrip(hs: HodgeStructure, config: LabConfig = DEFAULT_CONFIG) -> HodgeStructure:
    """Rebuild F^k = ⊕_{r≥k} H^{r,n−r} from the Hodge decomposition"""
    try:
        blocks = hs.decomposition
    except DecompositionError:
        logger.debug("decomposition failed: point left D")
        raise
    report = check_hodge_riemann(hs, config)
    if not report.passed:
        raise NotInPeriodDomain("filtration fails the Hodge-Riemann relations", report)

    spec = hs.spec
    rebuilt = HodgeStructure(spec, np.hstack([blocks[p] for p in range(spec.weight, -1, -1)]), hs.tol)
    for k in range(1, spec.weight + 1):
        dist = subspace_distance(hs.filtration(k), rebuilt.filtration(k))
        if dist > max(config.rank_tol, 1e-9):
            raise DecompositionError(f"rebuilt F^{k} differs by {dist:.3e}")
    return rebuilt

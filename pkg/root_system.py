"""
Root data of g relative to a compact Cartan subalgebra inside v0

    cartan_subalgebra -> root_decomposition -> weyl_normalize
        -> positive_and_classify -> strongly_orthogonal_frame

The frame carries the sl2 triples (e_i, f_i, h_i) of a maximal set of
strongly orthogonal noncompact positive roots, oriented so that e_i ∈ n_plus.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import CartanError, ConjugationFlagError, FrameMaximalityError, RestrictedSpectrumError, RootClusterError
from lie_decomp import GradedLieAlgebra, centralizer, extract_subspace
from serialization import encode_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Root:
    values: np.ndarray          # φ(h_1), ..., φ(h_l)
    vector: np.ndarray          # e_φ
    grade: int
    compact: bool
    positive: Optional[bool] = None
    coroot: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class RootDatum:
    algebra: GradedLieAlgebra
    cartan_basis: np.ndarray    # h_i ∈ h_R = √−1·h0 (Hermitian matrices)
    roots: Tuple[Root, ...]
    normalized: bool = False
    ordered: bool = False

    @property
    def rank(self) -> int:
        return int(self.cartan_basis.shape[0])

    @cached_property
    def value_matrix(self) -> np.ndarray:
        return np.array([r.values for r in self.roots]).reshape(len(self.roots), self.rank)

    def find(self, values: np.ndarray, tol: Optional[float] = None) -> Optional[int]:
        """Index of the root with the given values, or None"""
        tol = tol or 10 * self.algebra.config.cluster_tol
        if not self.roots:
            return None
        dist = np.abs(self.value_matrix - np.asarray(values)[None, :]).max(axis=1)
        i = int(np.argmin(dist))
        return i if dist[i] <= tol else None

    def positive_roots(self) -> List[Root]:
        return [r for r in self.roots if r.positive]

    def noncompact_positive(self) -> List[Root]:
        return [r for r in self.roots if r.positive and not r.compact]


def _rotation_torus(L: GradedLieAlgebra) -> np.ndarray:
    """Plane rotations of the conj-paired adapted basis; a maximal torus of v0"""
    spec = L.spec
    E = spec.adapted_basis
    m, n = spec.total_dim, spec.weight
    gens = []
    for p in range(n, n // 2, -1):
        if 2 * p == n:
            continue
        lo, hi = spec.block_range(p)
        for col in range(lo, hi):
            a = int(np.argmax(np.abs(E[:, col].real)))
            b = int(np.argmax(np.abs(E[:, col].imag)))
            R = np.zeros((m, m))
            R[b, a], R[a, b] = 1.0, -1.0
            gens.append(R)
    if n % 2 == 0:
        lo, hi = spec.block_range(n // 2)
        mids = [int(np.argmax(np.abs(E[:, c]))) for c in range(lo, hi)]
        for a, b in zip(mids[0::2], mids[1::2]):
            R = np.zeros((m, m))
            R[b, a], R[a, b] = 1.0, -1.0
            gens.append(R)
    gens = np.array(gens).reshape(-1, m, m)
    return gens / np.sqrt(L.killing_scale * 2)


def _is_abelian(L: GradedLieAlgebra, mats: np.ndarray, tol: float) -> bool:
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.linalg.norm(L.bracket(mats[i], mats[j])) > tol * max(1.0, np.linalg.norm(mats[i]) * np.linalg.norm(mats[j])):
                return False
    return True


def _verify_cartan(L: GradedLieAlgebra, h0: np.ndarray) -> bool:
    if h0.shape[0] == 0:
        return False
    cent = centralizer(L, L.basis, list(h0), real=False)
    return cent.shape[0] == h0.shape[0]


def cartan_subalgebra(L: GradedLieAlgebra, seed: int = 0) -> np.ndarray:
    """
    Maximal abelian subalgebra h0 of v0 whose complexification is Cartan in g.
    Centralizer iteration from a random element of v0, with the rotation
    torus as fallback.
    """
    tol = L.config.member_tol
    rng = np.random.default_rng(seed)
    current = extract_subspace(L, "v0").basis
    for _ in range(max(1, current.shape[0])):
        if _is_abelian(L, current, tol):
            break
        x = np.tensordot(rng.standard_normal(current.shape[0]), current, axes=1)
        current = centralizer(L, current, [x], real=True)
    if _is_abelian(L, current, tol) and _verify_cartan(L, current):
        q, _ = np.linalg.qr(current.reshape(current.shape[0], -1).T)
        h0 = q.T.reshape(current.shape) / np.sqrt(L.killing_scale)
        logger.debug(f"cartan subalgebra of dimension {h0.shape[0]} from centralizer iteration")
        return h0.real
    logger.warning("⚠️ centralizer iteration did not stabilize, using the rotation torus")
    torus = _rotation_torus(L)
    if not _verify_cartan(L, torus):
        raise CartanError("neither centralizer iteration nor the rotation torus gave a Cartan subalgebra")
    return torus


def root_decomposition(L: GradedLieAlgebra, cartan: np.ndarray, seed: int = 0) -> RootDatum:
    """Simultaneous eigen-decomposition of ad(h_i), grade block by grade block"""
    tol = L.config.cluster_tol
    hs = 1j * np.asarray(cartan)
    l = hs.shape[0]
    ads = np.array([L.ad(h) for h in hs])
    weights = np.random.default_rng(seed).uniform(0.5, 1.5, size=l)
    generic = np.tensordot(weights, ads, axes=1)

    found: List[Tuple[np.ndarray, np.ndarray, int]] = []
    zero_count = 0
    for k in sorted(set(int(g) for g in L.grades)):
        idx = L.grade_indices(k)
        block = generic[np.ix_(idx, idx)]
        _, vecs = np.linalg.eigh((block + block.conj().T) / 2)
        for v in vecs.T:
            values = np.array([np.vdot(v, a[np.ix_(idx, idx)] @ v).real for a in ads])
            coords = np.zeros(L.dim, dtype=complex)
            coords[idx] = v
            if np.abs(values).max() < tol:
                zero_count += 1
                continue
            found.append((values, coords, k))

    if zero_count != l:
        raise RootClusterError(
            f"zero-weight space has dimension {zero_count}, Cartan has {l}",
            {"zero_count": zero_count, "rank": l},
        )

    roots: List[Root] = []
    for values, coords, k in found:
        e = L.element(coords)
        resid = max(np.linalg.norm(L.bracket(h, e) - phi * e) for h, phi in zip(hs, values))
        if resid > 1e-6:
            raise RootClusterError(f"root vector is not a joint eigenvector (residual {resid:.2e})")
        roots.append(Root(values=values, vector=e, grade=k, compact=(k % 2 == 0)))

    if roots:
        V = np.array([r.values for r in roots])
        D = np.abs(V[:, None, :] - V[None, :, :]).max(axis=2)
        np.fill_diagonal(D, np.inf)
        gap = float(D.min())
        if gap < 100 * tol:
            raise RootClusterError(
                f"distinct roots closer than 100× cluster tolerance (min gap {gap:.2e})",
                {"min_gap": gap, "tolerance": tol, "root_count": len(roots)},
            )
        for r in roots:
            if np.abs(V + r.values[None, :]).max(axis=1).min() > 10 * tol:
                raise RootClusterError("root set is not symmetric under φ ↦ −φ")

    if len(roots) != L.dim - l:
        raise RootClusterError(f"found {len(roots)} roots, expected {L.dim - l}")
    logger.debug(f"root decomposition: rank {l}, {len(roots)} roots")
    return RootDatum(algebra=L, cartan_basis=hs, roots=tuple(roots))


def weyl_normalize(rd: RootDatum) -> RootDatum:
    """
    Rescale so that [e_φ, e_−φ] = h_φ with φ(h_φ) = 2 and
    τ0(e_φ) = −e_−φ (compact), τ0(e_φ) = e_−φ (noncompact).
    """
    L = rd.algebra
    roots = list(rd.roots)
    done = [False] * len(roots)
    for i, root in enumerate(roots):
        if done[i]:
            continue
        j = rd.find(-root.values)
        if j is None:
            raise RootClusterError(f"no partner for root {np.round(root.values, 6)}")
        partner = roots[j]
        s = -1.0 if root.compact else 1.0
        e = root.vector
        f = s * e.conj()
        overlap = abs(L.inner(f, partner.vector)) / (L.norm(f) * L.norm(partner.vector))
        if overlap < 1 - 1e-6:
            raise ConjugationFlagError(f"τ0(e_φ) is not proportional to e_−φ (overlap {overlap:.3e})")
        H = L.bracket(e, f)
        lam = L.inner(L.bracket(H, e), e).real / L.inner(e, e).real
        if lam <= 1e-9:
            kind = "compact" if root.compact else "noncompact"
            raise ConjugationFlagError(f"{kind} root gives φ([e, ±τ0 e]) = {lam:.3e} ≤ 0")
        a = np.sqrt(2.0 / lam)
        e, f, H = a * e, a * f, a * a * H
        roots[i] = replace(root, vector=e, coroot=H)
        roots[j] = replace(partner, vector=f, coroot=-H)
        done[i] = done[j] = True
    return replace(rd, roots=tuple(roots), normalized=True)


def _lex_key(values: np.ndarray, tol: float, order: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(np.round(values[i] / tol)) for i in order)


def positive_and_classify(rd: RootDatum, order_basis: Optional[Sequence[int]] = None) -> RootDatum:
    """Lexicographic positivity on (φ(h_1), ..., φ(h_l)); compact iff e_φ ∈ k"""
    tol = rd.algebra.config.cluster_tol
    order = list(order_basis) if order_basis is not None else list(range(rd.rank))
    roots = []
    for root in rd.roots:
        lead = next((root.values[i] for i in order if abs(root.values[i]) > tol), None)
        if lead is None:
            raise CartanError("a root vanishes on every Cartan basis element")
        roots.append(replace(root, positive=bool(lead > 0), compact=(root.grade % 2 == 0)))
    n_pos = sum(r.positive for r in roots)
    if 2 * n_pos != len(roots):
        raise CartanError(f"{n_pos} positive roots out of {len(roots)}")
    return replace(rd, roots=tuple(roots), ordered=True)


@dataclass(frozen=True, eq=False)
class SOFrame:
    datum: RootDatum
    roots: Tuple[np.ndarray, ...]                          # φ_i values after orientation
    triples: Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], ...]  # (e_i, f_i, h_i)
    selection: str = "largest"

    @property
    def algebra(self) -> GradedLieAlgebra:
        return self.datum.algebra

    @property
    def rank(self) -> int:
        return len(self.triples)

    @cached_property
    def real_frame(self) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
        """(x_i, y_i) = (e_i + f_i, √−1 (e_i − f_i))"""
        return tuple((e + f, 1j * (e - f)) for e, f, _ in self.triples)

    @property
    def A0_basis(self) -> List[np.ndarray]:
        return [x for x, _ in self.real_frame]

    @property
    def Ac_basis(self) -> List[np.ndarray]:
        return [y for _, y in self.real_frame]

    @cached_property
    def joint_weights(self) -> np.ndarray:
        return joint_weights(self)

    def lambda_coordinates(self, Y: np.ndarray) -> np.ndarray:
        """Coefficients of Y on e_1, ..., e_r (e_i are mutually orthogonal)"""
        L = self.algebra
        return np.array([L.inner(Y, e) / L.inner(e, e) for e, _, _ in self.triples])

    def as_dict(self) -> Dict:
        return {
            "rank_r": self.rank,
            "selection": self.selection,
            "roots": [list(map(float, r)) for r in self.roots],
            "e": [encode_matrix(e) for e, _, _ in self.triples],
            "f": [encode_matrix(f) for _, f, _ in self.triples],
            "h": [encode_matrix(h) for _, _, h in self.triples],
        }


def strongly_orthogonal(rd: RootDatum, phi: np.ndarray, psi: np.ndarray) -> bool:
    """φ ± ψ is neither zero nor a root"""
    tol = 10 * rd.algebra.config.cluster_tol
    for v in (phi + psi, phi - psi):
        if np.abs(v).max() <= tol or rd.find(v) is not None:
            return False
    return True


def _greedy(rd: RootDatum, candidates: List[Root]) -> List[Root]:
    chosen: List[Root] = []
    for root in candidates:
        if all(strongly_orthogonal(rd, root.values, c.values) for c in chosen):
            chosen.append(root)
    return chosen


def _frame_from(rd: RootDatum, chosen: List[Root], selection: str) -> SOFrame:
    roots, triples = [], []
    for root in chosen:
        j = rd.find(-root.values)
        e, f, h = root.vector, rd.roots[j].vector, root.coroot
        values = root.values
        if root.grade > 0:
            # orient e into n_plus
            e, f, h, values = f, e, -h, -values
        roots.append(values)
        triples.append((e, f, h))
    return SOFrame(datum=rd, roots=tuple(roots), triples=tuple(triples), selection=selection)


def frame_enlargement(frame: SOFrame) -> Optional[np.ndarray]:
    """An element of the p0-centralizer of A0 outside A0, or None when A0 is maximal"""
    L = frame.algebra
    p0 = extract_subspace(L, "p0").basis
    xs = [x.real for x in frame.A0_basis]
    cent = centralizer(L, p0, xs, real=True)
    if cent.shape[0] <= frame.rank:
        return None
    span = np.array(xs).reshape(len(xs), -1).T if xs else np.zeros((p0[0].size, 0))
    for Z in cent:
        z = Z.ravel()
        if span.shape[1]:
            z = z - span @ np.linalg.lstsq(span, z, rcond=None)[0]
        if np.linalg.norm(z) > 1e-6 * max(1.0, np.linalg.norm(Z)):
            return z.reshape(Z.shape)
    return None


def strongly_orthogonal_frame(rd: RootDatum) -> SOFrame:
    """
    Greedy choice of strongly orthogonal noncompact positive roots,
    largest first, certified maximal by the centralizer of A0 in p0.
    """
    if not (rd.normalized and rd.ordered):
        raise CartanError("root datum must be normalized and ordered first")
    tol = rd.algebra.config.cluster_tol
    order = list(range(rd.rank))
    candidates = sorted(rd.noncompact_positive(), key=lambda r: _lex_key(r.values, tol, order), reverse=True)

    enlargement = None
    for selection, pool in (("largest", candidates), ("smallest", candidates[::-1])):
        frame = _frame_from(rd, _greedy(rd, pool), selection)
        enlargement = frame_enlargement(frame)
        if enlargement is None:
            if selection != "largest":
                logger.warning(f"⚠️ largest-first selection was not maximal, used {selection}-first")
            logger.debug(f"strongly orthogonal frame of rank {frame.rank}")
            return frame
    raise FrameMaximalityError("A0 is not maximal abelian in p0", enlargement)


def build_frame(L: GradedLieAlgebra, seed: int = 0) -> SOFrame:
    """Full pipeline from the algebra to the strongly orthogonal frame"""
    cartan = cartan_subalgebra(L, seed)
    rd = positive_and_classify(weyl_normalize(root_decomposition(L, cartan, seed)))
    return strongly_orthogonal_frame(rd)


def joint_weights(frame: SOFrame) -> np.ndarray:
    """Integer weights (μ_1(v), ..., μ_r(v)) of h_1..h_r on the simultaneous eigenbasis of H"""
    hs = [h for _, _, h in frame.triples]
    m = frame.algebra.spec.total_dim
    if not hs:
        return np.zeros((m, 0), dtype=int)
    rng = np.random.default_rng(1)
    generic = sum(w * h for w, h in zip(rng.uniform(0.5, 1.5, len(hs)), hs))
    _, V = np.linalg.eigh((generic + generic.conj().T) / 2)
    mu = np.array([[np.vdot(v, h @ v).real for h in hs] for v in V.T])
    rounded = np.round(mu)
    if np.abs(mu - rounded).max() > 1e-6:
        logger.warning(f"⚠️ non-integral sl2 weights (max deviation {np.abs(mu - rounded).max():.2e})")
    return rounded.astype(int)


def restricted_spectrum(frame: SOFrame, X: np.ndarray, restarts: int = 24, max_iter: int = 60) -> np.ndarray:
    """
    |t_1| ≥ ... ≥ |t_r| with X ∈ Ad(K)(Σ t_i x_i), read off the spectrum of X.

    The spectrum of Σ t_i x_i is {<t, μ(v)>} over the joint weights μ, so t
    solves a matching least-squares problem; alternate between matching
    sorted values and solving the linear system.
    """
    r = frame.rank
    if r == 0:
        return np.zeros(0)
    M = frame.joint_weights.astype(float)
    s = np.sort(np.linalg.eigvalsh((X + X.conj().T) / 2))
    scale = float(np.abs(s).max())
    if scale < 1e-14:
        return np.zeros(r)
    rng = np.random.default_rng(0)
    best_res, best_t = np.inf, None
    for _ in range(restarts):
        t = rng.standard_normal(r) * scale
        perm = None
        for _ in range(max_iter):
            order = np.argsort(M @ t, kind="stable")
            if perm is not None and np.array_equal(order, perm):
                break
            perm = order
            t = np.linalg.lstsq(M[order], s, rcond=None)[0]
        res = float(np.linalg.norm(np.sort(M @ t) - s))
        if res < best_res:
            best_res, best_t = res, t
        if best_res < 1e-12 * (1 + scale):
            break
    if best_res > 1e-8 * (1 + np.linalg.norm(s)):
        raise RestrictedSpectrumError(f"spectrum does not match any Σ t_i x_i (residual {best_res:.2e})")
    return np.sort(np.abs(best_t))[::-1]

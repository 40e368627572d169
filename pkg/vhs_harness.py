"""
Synthetic variations of Hodge structure
Abelian horizontal families, Griffiths-horizontal paths, the affine map
Psi = P ∘ (period map) and the boundedness summary of a path trace
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import expm, svdvals

from config import DEFAULT_CONFIG, LabConfig
from errors import FamilyError, IndeterminateMembership, NotInPeriodDomain
from flag_nplus import (FlagPoint, Projector, exp_nplus, in_period_domain, nplus_coordinates, nplus_element,
                        nplus_membership_lu, pplus_lift, subspace_projector)
from hc_embedding import lambda_report, symmetric_point
from lie_decomp import GradedLieAlgebra, centralizer, is_hermitian_symmetric
from root_system import SOFrame, restricted_spectrum

logger = logging.getLogger(__name__)

FIELD_KINDS = ("random", "constant", "zero")


@dataclass(frozen=True, eq=False)
class HorizontalFamily:
    """q ↦ exp(Σ q_i ξ_i)·o for a commuting orthonormal frame of g^{-1,1}"""
    algebra: GradedLieAlgebra
    frame: np.ndarray
    chart_radius: float = 0.3

    @property
    def dim(self) -> int:
        return int(self.frame.shape[0])

    @property
    def projector(self) -> Projector:
        return subspace_projector(self.algebra, list(self.frame))

    def generator(self, q: Sequence[complex]) -> np.ndarray:
        return np.tensordot(np.asarray(q, dtype=complex), self.frame, axes=1)

    def point(self, q: Sequence[complex]) -> FlagPoint:
        return exp_nplus(self.algebra, self.generator(q))

    def sample_chart(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform point of the polydisc chart |q_i| < chart_radius"""
        r = self.chart_radius * np.sqrt(rng.uniform(size=self.dim))
        return r * np.exp(2j * np.pi * rng.uniform(size=self.dim))


def build_family(L: GradedLieAlgebra, d: int, seed: int = 0, chart_radius: float = 0.3,
                 attempts: int = 8) -> HorizontalFamily:
    """Greedy commuting extension over random elements of g^{-1,1}"""
    horizontal = L.basis[L.grade_indices(-1)]
    if d < 1 or d > horizontal.shape[0]:
        raise FamilyError(f"requested d={d}, g^{{-1,1}} has dimension {horizontal.shape[0]}")
    rng = np.random.default_rng(seed)
    frame: List[np.ndarray] = []
    while len(frame) < d:
        commutant = centralizer(L, horizontal, frame, real=False) if frame else horizontal
        found = None
        for _ in range(attempts):
            c = rng.standard_normal(commutant.shape[0]) + 1j * rng.standard_normal(commutant.shape[0])
            Z = np.tensordot(c, commutant, axes=1)
            for xi in frame:
                Z = Z - L.inner(Z, xi) * xi
            size = L.norm(Z)
            if size > 1e-8 * np.linalg.norm(c):
                found = Z / size
                break
        if found is None:
            raise FamilyError(f"no commuting extension beyond d={len(frame)}")
        frame.append(found)
    for i in range(d):
        for j in range(i + 1, d):
            if np.linalg.norm(L.bracket(frame[i], frame[j])) > 1e-10:
                raise FamilyError("greedy frame lost commutativity")
    logger.debug(f"abelian horizontal family of dimension {d}")
    return HorizontalFamily(L, np.array(frame), chart_radius)


@dataclass
class PsiResult:
    point: FlagPoint
    coords: np.ndarray
    singular_values: np.ndarray
    immersion: bool


def psi_coordinates(fam: HorizontalFamily, q: Sequence[complex], config: LabConfig = DEFAULT_CONFIG) -> np.ndarray:
    """a-coordinates of Psi(q) = exp(proj_a(log L(q)))"""
    L = fam.algebra
    pt = fam.point(q)
    lu = nplus_membership_lu(pt, config)
    if lu is None:
        raise NotInPeriodDomain("family left the big cell")
    hr = in_period_domain(lu, pt.spec, config)
    if not hr.passed:
        raise NotInPeriodDomain("family point is outside D", hr)
    return fam.projector.coordinates(nplus_element(L, lu))


def psi_affine(fam: HorizontalFamily, q: Sequence[complex], config: LabConfig = DEFAULT_CONFIG) -> PsiResult:
    """Psi(q) and the singular values of its central-difference Jacobian"""
    q = np.asarray(q, dtype=complex)
    coords = psi_coordinates(fam, q, config)
    h = config.fd_step * max(1.0, float(np.abs(q).max()))
    J = np.zeros((fam.dim, fam.dim), dtype=complex)
    for j in range(fam.dim):
        dq = np.zeros(fam.dim, dtype=complex)
        dq[j] = h
        J[:, j] = (psi_coordinates(fam, q + dq, config) - psi_coordinates(fam, q - dq, config)) / (2 * h)
    sv = svdvals(J)
    return PsiResult(
        point=fam.projector.lift(fam.point(q)),
        coords=coords,
        singular_values=sv,
        immersion=bool(sv.min() > config.immersion_tol),
    )


# ----------------------------------------------------------- paths ----

@dataclass
class PathTrace:
    times: List[float] = field(default_factory=list)
    coords: List[np.ndarray] = field(default_factory=list)
    min_minor: List[float] = field(default_factory=list)
    min_eig: List[float] = field(default_factory=list)
    pplus_dist: List[float] = field(default_factory=list)
    psi: List[complex] = field(default_factory=list)
    speed: List[float] = field(default_factory=list)
    tangent_defect: List[float] = field(default_factory=list)
    rejection_radii: List[float] = field(default_factory=list)   # |log L| of the last accepted sample
    truncated: bool = False
    rank_r: int = 0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def sv_min(self) -> np.ndarray:
        """|dPsi/dt| relative to the horizontal speed"""
        if len(self.times) < 2:
            return np.zeros(len(self.times))
        dpsi = np.abs(np.gradient(np.array(self.psi), np.array(self.times)))
        speed = np.array(self.speed)
        return np.divide(dpsi, speed, out=np.zeros_like(dpsi), where=speed > 0)


def _horizontal_field(L: GradedLieAlgebra, kind: str, rng: np.random.Generator,
                      direction: Optional[np.ndarray]) -> Callable[[float], np.ndarray]:
    """v(t) ∈ g^{-1,1}"""
    if kind not in FIELD_KINDS:
        raise ValueError(f"unknown field kind {kind!r}; expected one of {', '.join(FIELD_KINDS)}")
    basis = L.basis[L.grade_indices(-1)]
    m = L.spec.total_dim
    if kind == "zero" or basis.shape[0] == 0:
        return lambda t: np.zeros((m, m), dtype=complex)
    if kind == "constant":
        if direction is None:
            c = rng.standard_normal(basis.shape[0]) + 1j * rng.standard_normal(basis.shape[0])
            direction = np.tensordot(c / np.linalg.norm(c), basis, axes=1)
        v0 = np.asarray(direction, dtype=complex)
        return lambda t: v0
    d = basis.shape[0]
    a = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2 * d)
    b = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2 * d)
    omega = rng.uniform(0.5, 2.0, size=d)
    return lambda t: np.tensordot(a * np.cos(omega * t) + b * np.sin(omega * t), basis, axes=1)


def _dexpinv(theta: np.ndarray, w: np.ndarray) -> np.ndarray:
    """dexp⁻¹ for left-invariant flows, truncated at the order a 4-stage scheme needs"""
    c1 = theta @ w - w @ theta
    c2 = theta @ c1 - c1 @ theta
    return w + 0.5 * c1 + c2 / 12.0


def _rkmk4_step(g: np.ndarray, t: float, h: float, w: Callable[[float], np.ndarray]) -> np.ndarray:
    """One Runge–Kutta–Munthe-Kaas step of ġ = g·w(t) on G_R"""
    k1 = h * w(t)
    k2 = h * _dexpinv(k1 / 2, w(t + h / 2))
    k3 = h * _dexpinv(k2 / 2, w(t + h / 2))
    k4 = h * _dexpinv(k3, w(t + h))
    theta = (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return g @ expm(theta)


def _tangent_defect(L: GradedLieAlgebra, g: np.ndarray, base_L: np.ndarray, w: np.ndarray, delta: float,
                    config: LabConfig) -> float:
    """
    Non-g^{-1,1} part of L⁻¹·dL/dt from a central difference of probe points
    g·exp(±δ w), relative to the g^{-1,1} part.
    """
    lus = []
    for s in (1.0, -1.0):
        try:
            lu = nplus_membership_lu(FlagPoint.from_group(L.spec, g @ expm(s * delta * w)), config)
        except IndeterminateMembership:
            lu = None
        if lu is None:
            return float("inf")
        lus.append(lu.L)
    xi = np.linalg.solve(base_L, (lus[0] - lus[1]) / (2 * delta))
    horizontal = float(np.linalg.norm(np.where(L.shift == -1, xi, 0)))
    other = float(np.linalg.norm(np.where(L.shift == -1, 0, xi)))
    if horizontal == 0.0:
        return 0.0 if other == 0.0 else float("inf")
    return other / horizontal


def _lambda_distance(L: GradedLieAlgebra, frame: SOFrame, lu, g: np.ndarray, hermitian: bool) -> float:
    if hermitian:
        # P₊ is the identity; g itself represents pi of the point
        t = restricted_spectrum(frame, symmetric_point(g, L.config).log)
        return float(np.linalg.norm(np.tanh(t)))
    image = pplus_lift(L, lu)
    if not in_period_domain(image, config=L.config).passed:
        return float("nan")
    return lambda_report(frame, image).euclid_dist


def horizontal_path(
    L: GradedLieAlgebra,
    seed: int,
    steps: int,
    step_size: float = 0.01,
    frame: Optional[SOFrame] = None,
    field_kind: str = "random",
    direction: Optional[np.ndarray] = None,
) -> PathTrace:
    """
    Integrate the G_R-translated horizontal field ġ = g·(v(t) + τ0 v(t)) and
    record the path g(t)·o in n_plus coordinates; `steps` counts recorded
    samples, the base point included. Every recorded sample is
    recertified in N₊ ∩ D; a step that leaves is rejected and halved, and the
    trace is truncated once the step falls below the floor.
    """
    if steps < 1:
        raise ValueError("a path needs at least one sample")
    config = L.config
    rng = np.random.default_rng(seed)
    v = _horizontal_field(L, field_kind, rng, direction)

    def w(t: float) -> np.ndarray:
        vt = v(t)
        return (vt + vt.conj()).real

    hermitian = is_hermitian_symmetric(L)
    v_start = v(0.0)
    a_dir = v_start / L.norm(v_start) if L.norm(v_start) > 0 else None
    trace = PathTrace(rank_r=frame.rank if frame else 0)

    def record(t: float, g: np.ndarray, lu, hr) -> None:
        X = nplus_element(L, lu)
        trace.times.append(t)
        trace.coords.append(nplus_coordinates(L, lu))
        trace.min_minor.append(lu.min_minor)
        trace.min_eig.append(hr.min_eigenvalue)
        trace.psi.append(complex(L.inner(X, a_dir)) if a_dir is not None else 0j)
        trace.speed.append(L.norm(v(t)))
        trace.tangent_defect.append(_tangent_defect(L, g, lu.L, w(t), config.tangent_probe, config))
        trace.pplus_dist.append(_lambda_distance(L, frame, lu, g, hermitian) if frame is not None else float("nan"))

    g = np.eye(L.spec.total_dim)
    lu0 = nplus_membership_lu(FlagPoint.from_group(L.spec, g), config)
    record(0.0, g, lu0, in_period_domain(lu0, L.spec, config))
    last_radius = 0.0

    t, h, accepted = 0.0, step_size, 0
    while len(trace) < steps:
        g_new = _rkmk4_step(g, t, h, w)
        pt = FlagPoint.from_group(L.spec, g_new)
        try:
            lu = nplus_membership_lu(pt, config)
        except IndeterminateMembership:
            lu = None
        hr = in_period_domain(lu, L.spec, config) if lu is not None else None
        if hr is None or not hr.passed:
            trace.rejection_radii.append(last_radius)
            h /= 2
            if h < config.step_floor:
                trace.truncated = True
                logger.info(f"⚠️ step collapse at t={t:.6f}; trace truncated after {accepted} steps")
                break
            continue
        t += h
        g = g_new
        accepted += 1
        record(t, g, lu, hr)
        last_radius = float(np.linalg.norm(lu.log_L))
        h = min(step_size, 2 * h)
    logger.debug(f"path: {len(trace)} samples, {len(trace.rejection_radii)} rejections")
    return trace


def trace_to_frame(trace: PathTrace) -> pd.DataFrame:
    """Columns t, coord_<i>_re/_im, min_minor, min_eig, pplus_dist, psi_re, psi_im, sv_min, tangent_defect"""
    coords = np.array(trace.coords, dtype=complex).reshape(len(trace), -1)
    data: Dict[str, np.ndarray] = {"t": np.array(trace.times)}
    for i in range(coords.shape[1]):
        data[f"coord_{i}_re"] = coords[:, i].real
        data[f"coord_{i}_im"] = coords[:, i].imag
    psi = np.array(trace.psi, dtype=complex)
    data.update(
        min_minor=np.array(trace.min_minor),
        min_eig=np.array(trace.min_eig),
        pplus_dist=np.array(trace.pplus_dist),
        psi_re=psi.real,
        psi_im=psi.imag,
        sv_min=trace.sv_min,
        tangent_defect=np.array(trace.tangent_defect),
    )
    return pd.DataFrame(data)


def write_trace_csv(trace: PathTrace, path: str) -> None:
    trace_to_frame(trace).to_csv(path, index=False, float_format="%.12e")


@dataclass
class BoundednessReport:
    samples: int
    max_nplus_norm: float
    max_lambda_dist: float
    sqrt_r: float
    within_bound: bool
    landed: int
    truncated: bool
    rejections: int
    max_tangent_defect: float
    min_minor: float
    min_eig: float

    def as_dict(self) -> Dict:
        return dict(self.__dict__)


def boundedness_report(trace: PathTrace, frame: SOFrame, config: LabConfig = DEFAULT_CONFIG) -> BoundednessReport:
    """Max n_plus norm, max Λ-frame distance of P₊ images and the √r check"""
    if len(trace) == 0:
        raise ValueError("empty trace")
    dist = np.array(trace.pplus_dist, dtype=float)
    landed = ~np.isnan(dist)
    sqrt_r = float(np.sqrt(frame.rank))
    max_dist = float(dist[landed].max()) if landed.any() else 0.0
    return BoundednessReport(
        samples=len(trace),
        max_nplus_norm=float(max(np.linalg.norm(c) for c in trace.coords)),
        max_lambda_dist=max_dist,
        sqrt_r=sqrt_r,
        within_bound=bool(max_dist <= sqrt_r + config.bound_tol),
        landed=int(landed.sum()),
        truncated=trace.truncated,
        rejections=len(trace.rejection_radii),
        max_tangent_defect=float(np.max(trace.tangent_defect)),
        min_minor=float(np.min(trace.min_minor)),
        min_eig=float(np.min(trace.min_eig)),
    )

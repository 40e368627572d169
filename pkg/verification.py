"""
Verification suites
Each suite samples one family of invariants on a domain and returns a
report dict {"suite", "domain", "checks", "passed", ...}; campaigns run
through a thread pool with per-sample seeds spawned from the run seed.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np

from config import DEFAULT_CONFIG, LabConfig
from errors import FamilyError, PeriodLabError
from flag_nplus import exp_nplus, random_domain_point
from hc_embedding import (check_diagram, iota_hc, project_pi, random_compact, sl2_nplus_coordinate,
                          sl2_product_residual)
from hodge_core import DomainSpec
from lie_decomp import (GradedLieAlgebra, apply_involution, extract_subspace, grade_decompose, is_hermitian_symmetric,
                        killing_form, lie_algebra_basis, random_element)
from root_system import SOFrame, build_frame, frame_enlargement, strongly_orthogonal
from vhs_harness import boundedness_report, build_family, horizontal_path, psi_affine

logger = logging.getLogger(__name__)

T = TypeVar("T")

SUITES = ("lie", "roots", "lambda", "hc", "diagram", "bound", "affine")


@dataclass(eq=False)
class DomainLab:
    """Lazily built algebra and frame of one domain"""
    spec: DomainSpec
    config: LabConfig = DEFAULT_CONFIG
    seed: int = 0

    @cached_property
    def algebra(self) -> GradedLieAlgebra:
        return lie_algebra_basis(self.spec, self.config)

    @cached_property
    def frame(self) -> SOFrame:
        return build_frame(self.algebra, self.seed)

    @property
    def label(self) -> str:
        return f"({self.spec.weight}, {list(self.spec.hodge_numbers)})"


def run_campaign(task: Callable[[np.random.Generator], T], seed: int, count: int, threads: int = 1) -> List[T]:
    """task(rng) for count independent generators; results in submission order"""
    children = np.random.SeedSequence(seed).spawn(count)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda ss: task(np.random.default_rng(ss)), children))


def _check(name: str, value: float, threshold: float, passed: Optional[bool] = None, **extra) -> Dict:
    ok = value < threshold if passed is None else passed
    return {"name": name, "value": float(value), "threshold": float(threshold), "passed": bool(ok), **extra}


@dataclass
class SuiteReport:
    suite: str
    domain: str
    checks: List[Dict] = field(default_factory=list)
    details: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def add(self, name: str, value: float, threshold: float, passed: Optional[bool] = None, **extra) -> None:
        self.checks.append(_check(name, value, threshold, passed, **extra))

    def as_dict(self) -> Dict:
        return {"suite": self.suite, "domain": self.domain, "passed": self.passed,
                "checks": self.checks, **self.details}


# ------------------------------------------------------------------ lie ----

def lie_suite(lab: DomainLab, seed: int = 0, count: int = 100) -> SuiteReport:
    L, config = lab.algebra, lab.config
    report = SuiteReport("lie", lab.label)
    m = lab.spec.total_dim
    expected = m * (m + (1 if lab.spec.weight % 2 else -1)) // 2
    report.add("dimension", abs(L.dim - expected), 0.5, dim=L.dim, expected=expected)
    report.add("q_skew", max(L.skew_residual(X) for X in L.basis), config.member_tol)

    def bracket_sample(rng: np.random.Generator) -> Dict[str, float]:
        i, j = rng.integers(L.dim, size=2)
        Z = L.bracket(L.basis[i], L.basis[j])
        k = int(L.grades[i] + L.grades[j])
        parts = grade_decompose(L, Z)
        off = np.sqrt(sum(np.linalg.norm(P) ** 2 for g, P in parts.items() if g != k))
        X = L.element(rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim))
        Y = L.element(rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim))
        scale = max(1.0, np.linalg.norm(X) * np.linalg.norm(Y))
        theta = lambda A: apply_involution(L, "theta", A)
        tau0 = lambda A: apply_involution(L, "tau0", A)
        tauc = lambda A: apply_involution(L, "tauc", A)
        involutive = max(np.linalg.norm(f(f(X)) - X) for f in (theta, tau0, tauc)) / np.linalg.norm(X)
        commuting = np.linalg.norm(theta(tau0(X)) - tau0(theta(X))) / np.linalg.norm(X)
        homomorphism = np.linalg.norm(theta(L.bracket(X, Y)) - L.bracket(theta(X), theta(Y))) / scale
        return {"grading": float(off), "involutive": float(involutive),
                "commuting": float(commuting), "homomorphism": float(homomorphism)}

    samples = run_campaign(bracket_sample, seed, count, config.threads)
    for key in ("grading", "involutive", "commuting", "homomorphism"):
        report.add(f"bracket_{key}" if key == "grading" else f"involution_{key}",
                   max(s[key] for s in samples), config.member_tol)

    gc = extract_subspace(L, "g_c").basis
    gram = L.killing_scale * np.einsum("iab,jba->ij", gc, gc)
    gram = (gram + gram.conj().T) / 2
    top = float(np.linalg.eigvalsh(gram).max()) if gram.size else -1.0
    report.add("killing_negative_on_gc", top, -config.member_tol, dim_gc=int(gc.shape[0]))

    rng = np.random.default_rng(seed)
    X, Y = random_element(L, "g0", rng), random_element(L, "g0", rng)
    trace_form = L.killing_scale * np.trace(X @ Y)
    report.add("killing_trace_form", abs(killing_form(L, X, Y) - trace_form), config.member_tol * max(1.0, abs(trace_form)))
    report.details["hermitian_symmetric"] = is_hermitian_symmetric(L)
    return report


# ---------------------------------------------------------------- roots ----

def roots_suite(lab: DomainLab, seed: int = 0, count: int = 0) -> SuiteReport:
    L = lab.algebra
    report = SuiteReport("roots", lab.label)
    rd = lab.frame.datum
    report.add("root_count", abs(len(rd.roots) - (L.dim - rd.rank)), 0.5,
               roots=len(rd.roots), cartan_rank=rd.rank)
    distinct = sum(rd.find(r.values) == i for i, r in enumerate(rd.roots))
    report.add("root_spaces_one_dimensional", len(rd.roots) - distinct, 0.5)

    pure = 0.0
    for r in rd.roots:
        XA = L.to_adapted(r.vector)
        pure = max(pure, float(np.linalg.norm(np.where(L.shift == r.grade, 0, XA)) / np.linalg.norm(XA)))
    report.add("pure_type", pure, L.config.member_tol)

    sl2 = 0.0
    for r in rd.roots:
        j = rd.find(-r.values)
        e, f, h = r.vector, rd.roots[j].vector, r.coroot
        sl2 = max(sl2,
                  float(np.linalg.norm(L.bracket(h, e) - 2 * e) / np.linalg.norm(e)),
                  float(np.linalg.norm(L.bracket(h, f) + 2 * f) / np.linalg.norm(f)),
                  float(np.linalg.norm(L.bracket(e, f) - h) / np.linalg.norm(h)))
    report.add("sl2_relations", sl2, 1e-10)
    positive = len(rd.positive_roots())
    report.add("half_positive", abs(2 * positive - len(rd.roots)), 0.5)
    report.details.update(
        positive=positive,
        noncompact_positive=len(rd.noncompact_positive()),
        compact_roots=sum(r.compact for r in rd.roots),
    )
    return report


# --------------------------------------------------------------- lambda ----

def lambda_suite(lab: DomainLab, seed: int = 0, count: int = 0) -> SuiteReport:
    frame = lab.frame
    rd = frame.datum
    report = SuiteReport("lambda", lab.label)
    pairs = [(a, b) for i, a in enumerate(frame.roots) for b in frame.roots[i + 1:]]
    report.add("strongly_orthogonal", sum(not strongly_orthogonal(rd, a, b) for a, b in pairs), 0.5)
    enlargement = frame_enlargement(frame)
    report.add("a0_maximal", 0.0 if enlargement is None else 1.0, 0.5)
    report.add("noncompact_frame", sum(rd.roots[rd.find(v)].compact for v in frame.roots), 0.5)
    report.details.update(rank_r=frame.rank, selection=frame.selection,
                          joint_weights=frame.joint_weights.tolist())
    return report


# ------------------------------------------------------------------- hc ----

def hc_suite(lab: DomainLab, seed: int = 0, count: int = 1000) -> SuiteReport:
    frame, L, config = lab.frame, lab.algebra, lab.config
    report = SuiteReport("hc", lab.label)

    def sample(rng: np.random.Generator) -> Dict[str, float]:
        i = int(rng.integers(frame.rank))
        z = 3.0 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        coord = sl2_nplus_coordinate(frame, z, i)
        expected = z / abs(z) * np.tanh(abs(z)) if z else 0j
        t = rng.uniform(-3.0, 3.0, size=frame.rank)
        corr = iota_hc(frame, t, random_compact(L, rng))
        return {
            "product": sl2_product_residual(frame, z, i),
            "coordinate": float(abs(coord - expected)),
            "coincidence": corr.coincidence,
            "sup_norm": corr.report.sup_norm,
        }

    samples = run_campaign(sample, seed, count, config.threads)
    report.add("sl2_product", max(s["product"] for s in samples), 1e-9)
    report.add("sl2_tanh_coordinate", max(s["coordinate"] for s in samples), 1e-9)
    report.add("iota_coincidence", max(s["coincidence"] for s in samples), 1e-8)
    report.add("lambda_sup_norm", max(s["sup_norm"] for s in samples), 1.0)
    report.details.update(samples=count, rank_r=frame.rank)
    return report


# -------------------------------------------------------------- diagram ----

def diagram_suite(lab: DomainLab, seed: int = 0, count: int = 100) -> SuiteReport:
    frame, L, config = lab.frame, lab.algebra, lab.config
    hermitian = is_hermitian_symmetric(L)
    report = SuiteReport("diagram", lab.label)

    def sample(rng: np.random.Generator) -> Dict:
        general = check_diagram(frame, random_domain_point(L, rng, spread=1.5))
        # on exp(p₊)∩D, pi must invert iota
        corr = iota_hc(frame, rng.uniform(-2.0, 2.0, size=frame.rank))
        log = project_pi(exp_nplus(L, corr.Y), config).log
        inverse = float(np.linalg.norm(log - corr.X) / (1.0 + np.linalg.norm(corr.X)))
        return {"general": general, "pplus": inverse}

    samples = run_campaign(sample, seed, count, config.threads)
    landed = [s["general"] for s in samples if s["general"].landed]
    general_max = max((d.residual for d in landed), default=0.0)
    report.add("pi_inverts_iota", max(s["pplus"] for s in samples), config.diagram_tol)
    report.add("diagram_on_domain_samples", general_max, config.diagram_tol, landed=len(landed))
    if not landed:
        logger.info(f"⚠️ {lab.label}: no P₊ image landed in D; diagram check is vacuous")
    report.details.update(
        hermitian_symmetric=hermitian,
        landing_rate=len(landed) / max(1, len(samples)),
        measured_max_residual=general_max,
        samples=count,
    )
    return report


# ---------------------------------------------------------------- bound ----

def bound_suite(lab: DomainLab, seed: int = 0, count: int = 10, steps: int = 501,
                step_size: float = 0.01) -> SuiteReport:
    frame, L, config = lab.frame, lab.algebra, lab.config
    report = SuiteReport("bound", lab.label)
    seeds = np.random.SeedSequence(seed).generate_state(count)

    def trace(s: int):
        path = horizontal_path(L, int(s), steps, step_size, frame=frame)
        return path, boundedness_report(path, frame, config)

    with ThreadPoolExecutor(max_workers=max(1, config.threads)) as pool:
        results = list(pool.map(trace, seeds))
    summaries = [b for _, b in results]
    sqrt_r = float(np.sqrt(frame.rank))
    report.add("lambda_distance", max(b.max_lambda_dist for b in summaries), sqrt_r + config.bound_tol)
    report.add("tangent_defect", max(b.max_tangent_defect for b in summaries), config.tangent_tol)
    report.add("minor_positive", min(b.min_minor for b in summaries), 0.0,
               passed=all(b.min_minor > 0 for b in summaries))
    report.add("hodge_riemann_positive", min(b.min_eig for b in summaries), 0.0,
               passed=all(b.min_eig > 0 for b in summaries))
    if lab.spec.total_dim == 2:
        radii = [r for path, _ in results for r in path.rejection_radii]
        report.add("disc_rejections_at_boundary", min(radii, default=1.0), 1 - 1e-3,
                   passed=all(r > 1 - 1e-3 for r in radii), rejections=len(radii))
    report.details.update(
        traces=[b.as_dict() for b in summaries],
        sqrt_r=sqrt_r,
        hermitian_symmetric=is_hermitian_symmetric(L),
    )
    return report


# --------------------------------------------------------------- affine ----

def affine_suite(lab: DomainLab, seed: int = 0, count: int = 100, dims: Sequence[int] = (1, 2, 3)) -> SuiteReport:
    L, config = lab.algebra, lab.config
    report = SuiteReport("affine", lab.label)
    reached = []
    for d in dims:
        try:
            fam = build_family(L, d, seed)
        except FamilyError as e:
            logger.info(f"⚠️ {lab.label}: {e}")
            break
        reached.append(d)

        def sample(rng: np.random.Generator) -> Dict[str, float]:
            q = fam.sample_chart(rng)
            res = psi_affine(fam, q, config)
            return {"sv_min": float(res.singular_values.min()), "coords": float(np.abs(res.coords - q).max())}

        samples = run_campaign(sample, seed + d, count, config.threads)
        report.add(f"immersion_d{d}", -min(s["sv_min"] for s in samples), -config.immersion_tol,
                   sv_min=min(s["sv_min"] for s in samples))
        report.add(f"psi_coordinates_d{d}", max(s["coords"] for s in samples), 1e-10)
    report.add("family_built", 0.0 if reached else 1.0, 0.5)
    report.details["dims"] = reached
    return report


SUITE_RUNNERS: Dict[str, Callable[..., SuiteReport]] = {
    "lie": lie_suite,
    "roots": roots_suite,
    "lambda": lambda_suite,
    "hc": hc_suite,
    "diagram": diagram_suite,
    "bound": bound_suite,
    "affine": affine_suite,
}


def run_suite(lab: DomainLab, suite: str, seed: int = 0, count: Optional[int] = None, **kwargs) -> SuiteReport:
    if suite not in SUITE_RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    if count is not None and count < 1:
        raise ValueError("count must be at least 1")
    runner = SUITE_RUNNERS[suite]
    if count is not None:
        kwargs["count"] = count
    report = runner(lab, seed=seed, **kwargs)
    marker = "✅" if report.passed else "❌"
    logger.info(f"{marker} {suite} suite on {lab.label}: {sum(c['passed'] for c in report.checks)}/{len(report.checks)} checks")
    return report


def run_report(lab: DomainLab, seed: int = 0, count: Optional[int] = None) -> Dict:
    """Every suite in order; a suite that raises is recorded as a failed stage"""
    stages = []
    first_failure = None
    for suite in SUITES:
        try:
            stage = run_suite(lab, suite, seed, count).as_dict()
        except PeriodLabError as e:
            logger.error(f"❌ {suite} suite raised: {e}")
            stage = {"suite": suite, "domain": lab.label, "passed": False, "error": str(e), "checks": []}
        if not stage["passed"] and first_failure is None:
            first_failure = suite
        stages.append(stage)
    return {
        "domain": lab.spec.as_dict(),
        "seed": seed,
        "suites": stages,
        "first_failure": first_failure,
        "passed": first_failure is None,
    }

"""
pdlab command line
Build period domains, compute root data and Λ frames, sample D, run the
verification suites and emit path traces and reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import logging
import sys
from dataclasses import fields
from typing import Dict, List, Optional

import numpy as np

from config import LabConfig, load_config
from errors import PeriodLabError
from flag_nplus import in_period_domain, membership_report, pplus_lift, random_domain_point
from hc_embedding import check_diagram, lambda_report
from hodge_core import DomainSpec, build_domain_spec, domain_spec_from_dict
from lie_decomp import export_graded_basis, is_hermitian_symmetric
from serialization import dumps, encode_vector, read_json, write_json
from verification import SUITES, DomainLab, run_campaign, run_report, run_suite
from vhs_harness import FIELD_KINDS, boundedness_report, build_family, horizontal_path, psi_affine, write_trace_csv

logger = logging.getLogger(__name__)

TOLERANCE_FIELDS = [f.name for f in fields(LabConfig) if f.name not in ("threads", "polar_max_iter")]


def _parse_hodge(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Hodge numbers must be comma-separated integers, got {text!r}")


def _emit(payload, out: Optional[str]) -> None:
    if out:
        write_json(out, payload)
        logger.info(f"✅ Wrote {out}")
    else:
        print(dumps(payload))


def _load_spec(args) -> DomainSpec:
    if getattr(args, "domain", None):
        return domain_spec_from_dict(read_json(args.domain))
    if args.weight is None or args.hodge is None:
        raise PeriodLabError("either --domain or both --weight and --hodge are required")
    return build_domain_spec(args.weight, args.hodge)


def _config(args) -> LabConfig:
    config = load_config(args.env_file)
    overrides = {name: getattr(args, f"tol_{name}") for name in TOLERANCE_FIELDS}
    overrides["threads"] = args.threads
    return config.with_overrides(overrides)


def _lab(args) -> DomainLab:
    return DomainLab(_load_spec(args), _config(args), args.seed)


# ------------------------------------------------------------ commands ----

def cmd_domain(args) -> int:
    spec = build_domain_spec(args.weight, args.hodge)
    payload = spec.as_dict()
    payload["filtration_ranks"] = list(spec.filtration_ranks)
    if args.with_basis:
        lab = DomainLab(spec, _config(args))
        payload["graded_basis"] = export_graded_basis(lab.algebra)
    if args.out:
        write_json(args.out, payload)
        # reload must reproduce the spec
        domain_spec_from_dict(read_json(args.out))
        logger.info(f"✅ Domain m={spec.total_dim}, f={list(spec.filtration_ranks)} written to {args.out}")
    else:
        print(dumps(payload))
    return 0


def cmd_roots(args) -> int:
    lab = _lab(args)
    rd = lab.frame.datum
    payload = {
        "domain": lab.spec.as_dict(),
        "dim_g": lab.algebra.dim,
        "cartan_rank": rd.rank,
        "roots": [
            {"values": [float(v) for v in r.values], "grade": r.grade, "compact": r.compact, "positive": r.positive}
            for r in rd.roots
        ],
        "noncompact_positive": len(rd.noncompact_positive()),
    }
    _emit(payload, args.out)
    return 0


def cmd_lambda(args) -> int:
    lab = _lab(args)
    report = run_suite(lab, "lambda", args.seed)
    payload = {**lab.frame.as_dict(), "report": report.as_dict()}
    _emit(payload, args.out)
    return 0 if report.passed else 1


def cmd_sample(args) -> int:
    lab = _lab(args)
    L, frame = lab.algebra, lab.frame

    def sample(rng: np.random.Generator) -> Dict:
        pt = random_domain_point(L, rng, spread=args.spread)
        record = membership_report(L, pt)
        diagram = check_diagram(frame, pt)
        record["diagram"] = diagram.as_dict()
        if diagram.landed:
            record["lambda"] = lambda_report(frame, pplus_lift(L, pt)).as_dict()
        return record

    samples = run_campaign(sample, args.seed, args.count, lab.config.threads)
    payload = {"domain": lab.spec.as_dict(), "hermitian_symmetric": is_hermitian_symmetric(L),
               "seed": args.seed, "samples": samples}
    _emit(payload, args.out)
    return 0 if all(s["in_D"] for s in samples) else 1


def cmd_verify(args) -> int:
    lab = _lab(args)
    report = run_suite(lab, args.suite, args.seed, args.count)
    _emit({"seed": args.seed, **report.as_dict()}, args.out)
    return 0 if report.passed else 1


def cmd_path(args) -> int:
    lab = _lab(args)
    L = lab.algebra
    direction = None
    if args.field == "constant":
        # along the first frame root vector the coordinate is tanh t
        direction = lab.frame.triples[0][0]
    trace = horizontal_path(L, args.seed, args.steps, args.step_size, frame=lab.frame,
                            field_kind=args.field, direction=direction)
    write_trace_csv(trace, args.out)
    summary = boundedness_report(trace, lab.frame, lab.config)
    if args.summary:
        write_json(args.summary, summary.as_dict())
    marker = "⚠️" if trace.truncated else "✅"
    logger.info(f"{marker} {len(trace)} samples written to {args.out}")
    return 0 if summary.within_bound and summary.max_tangent_defect < lab.config.tangent_tol else 1


def cmd_affine(args) -> int:
    lab = _lab(args)
    fam = build_family(lab.algebra, args.dim, args.seed)

    def sample(rng: np.random.Generator) -> Dict:
        q = fam.sample_chart(rng)
        res = psi_affine(fam, q, lab.config)
        return {
            "q": encode_vector(q),
            "coords": encode_vector(res.coords),
            "singular_values": [float(s) for s in res.singular_values],
            "immersion": res.immersion,
            "in_D": in_period_domain(res.point, config=lab.config).passed,
        }

    samples = run_campaign(sample, args.seed, args.count, lab.config.threads)
    _emit({"domain": lab.spec.as_dict(), "dim": fam.dim, "samples": samples}, args.out)
    return 0 if all(s["immersion"] for s in samples) else 1


def cmd_report(args) -> int:
    """Every suite, one combined JSON; the exit code follows the first failing suite"""
    lab = _lab(args)
    payload = run_report(lab, args.seed, args.count)
    _emit(payload, args.out)
    if payload["passed"]:
        logger.info(f"✅ All suites passed on {lab.label}")
        return 0
    logger.error(f"❌ First failing suite on {lab.label}: {payload['first_failure']}")
    return 1


# -------------------------------------------------------------- parser ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="campaign workers (default PDLAB_THREADS or 1)")
    common.add_argument("--env-file", default=None, help="dotenv file with PDLAB_* settings")
    for name in TOLERANCE_FIELDS:
        common.add_argument(f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}", type=float, default=None)

    domain_args = argparse.ArgumentParser(add_help=False)
    domain_args.add_argument("--domain", help="domain JSON written by `pdlab domain`")
    domain_args.add_argument("--weight", type=int)
    domain_args.add_argument("--hodge", type=_parse_hodge, help="comma-separated Hodge numbers, e.g. 1,3,1")

    parser = argparse.ArgumentParser(prog="pdlab", description="Period-domain numerical laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("domain", parents=[common], help="build a domain and write its JSON")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--hodge", type=_parse_hodge, required=True)
    p.add_argument("--with-basis", action="store_true", help="include the graded basis of g")
    p.add_argument("--out")
    p.set_defaults(func=cmd_domain)

    p = sub.add_parser("roots", parents=[common, domain_args], help="root datum of g")
    p.add_argument("--out")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("lambda", parents=[common, domain_args], help="strongly orthogonal frame")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("sample", parents=[common, domain_args], help="random points of D")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", parents=[common, domain_args], help="run one verification suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("path", parents=[common, domain_args], help="horizontal path trace as CSV")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--step-size", type=float, default=0.01)
    p.add_argument("--field", choices=FIELD_KINDS, default="random")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="boundedness summary JSON")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("affine", parents=[common, domain_args], help="Psi and its Jacobian on a family chart")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_affine)

    p = sub.add_parser("report", parents=[common, domain_args], help="every suite, one JSON")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return args.func(args)
    except (PeriodLabError, ValueError, OSError) as e:
        logger.error(f"❌ {e}")
        print(dumps({"success": False, "error": str(e)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())

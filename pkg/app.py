# app.py
import argparse
import json
import logging
import os
import sys
import uuid
from typing import List, Optional

from pydantic import BaseModel, ValidationError

# --- Ensure src folder is on sys.path ---
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

from classifier import classify_corollary, classify_theorem  # noqa: E402
from errors import (  # noqa: E402
    DomainError,
    GoldenMissing,
    PrecisionError,
    QuadratureError,
    VerificationMismatch,
)
from golden import GOLDEN_PATH, bootstrap_golden, verify_golden  # noqa: E402
from hausdorff_density import (  # noqa: E402
    closed_form_moment,
    density_moment_quadrature,
    is_negative_near,
    negativity_witness,
    positivity_certificate,
    sample_density,
    weight_spec_of,
)
from moment_core import ModuleParams, roots_of, tensor_moment_bruteforce, tensor_moment_closed  # noqa: E402
from numeric import REAL_TOL, WORKING_DPS, format_scalar, parse_scalar, to_real  # noqa: E402
from output.emitters import emitter_for_path, get_emitter, write_density_csv  # noqa: E402
from reports import (  # noqa: E402
    DensityReport,
    MomentsReport,
    PositivityEntry,
    QuadratureCheck,
    RootsReport,
    VerdictReport,
    WitnessEntry,
    WitnessReport,
)
from scan import DEFAULT_JOBS, DEFAULT_WINDOW, RunConfig, parse_grid, run_scan  # noqa: E402
from witness_search import DEFAULT_M_CAP, DEFAULT_N_CAP, search_witness  # noqa: E402

# ----------------------------
# Config via environment variables
# ----------------------------
LOG_LEVEL = os.environ.get("BERGMAN_LOG_LEVEL", "WARNING").upper()
MOMENT_CHECK_TOL = 1e-8
QUADRATURE_ORDERS = 20

logger = logging.getLogger(__name__)


# ----------------------------
# Helpers
# ----------------------------
def _params(args: argparse.Namespace) -> ModuleParams:
    s1 = parse_scalar(args.s1, "s1")
    s2 = parse_scalar(args.s2, "s2")
    params = ModuleParams.of(s1, s2, mode=args.mode, dps=args.dps)
    if args.tol != params.tol:
        params = ModuleParams(params.s1, params.s2, dps=params.dps, tol=args.tol)
    return params


def _emit(report: BaseModel) -> None:
    print(report.model_dump_json(indent=2))


# ----------------------------
# Commands
# ----------------------------
def cmd_classify(args: argparse.Namespace) -> int:
    """Full verdict report for one parameter pair."""
    params = _params(args)
    verdict = classify_corollary(params)
    theorem = classify_theorem(verdict.roots, params.tol)
    if not theorem.same_decision(verdict):
        logger.error("Root-location and sum/product rules disagree for %s", params.label())
    _emit(VerdictReport.from_verdict(params, verdict, theorem))
    return 0


def cmd_roots(args: argparse.Namespace) -> int:
    params = _params(args)
    _emit(RootsReport.from_roots(params, roots_of(params)))
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    params = _params(args)
    closed = [tensor_moment_closed(params, n) for n in range(args.count)]
    oracle = [tensor_moment_bruteforce(params, n) for n in range(args.count)]
    agrees = all(
        c.value == o.value if c.exact else abs(c.value - o.value) <= c.error_bound + o.error_bound
        for c, o in zip(closed, oracle)
    )
    _emit(MomentsReport(s1=format_scalar(params.s1), s2=format_scalar(params.s2),
                        moments=[format_scalar(c.value) for c in closed], oracle_agrees=agrees))
    return 0


def cmd_witness(args: argparse.Namespace) -> int:
    params = _params(args)
    search = search_witness(params, args.m_cap, args.n_cap, context={"run_id": str(uuid.uuid4())})
    _emit(WitnessReport(
        run_id=search.run_id,
        s1=format_scalar(params.s1),
        s2=format_scalar(params.s2),
        subnormal=search.verdict.subnormal,
        branch=search.verdict.branch.value,
        rule_fired=search.verdict.rule_fired,
        m_cap=search.m_cap,
        n_cap=search.n_cap,
        dps=search.dps,
        status="found" if search.found else "none within caps",
        difference=WitnessEntry.from_witness(search.difference) if search.difference else None,
        density=WitnessEntry.from_witness(search.density) if search.density else None,
        density_stable=search.density_stable,
    ))
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    """Representing density: quadrature check, then positivity or a negativity witness."""
    params = _params(args)
    verdict = classify_corollary(params)
    spec = weight_spec_of(params)
    checks = []
    for n in range(args.orders + 1):
        quad = density_moment_quadrature(spec, n, tol=args.quad_tol)
        closed = closed_form_moment(spec, n)
        error = abs(quad - closed)
        checks.append(QuadratureCheck(
            n=n,
            quadrature=format_scalar(quad, 15),
            closed_form=format_scalar(closed, 15),
            abs_error=format_scalar(error, 3),
            within_tol=bool(error <= max(MOMENT_CHECK_TOL, MOMENT_CHECK_TOL * abs(closed))),
        ))
        if n == 0 and abs(closed - to_real(tensor_moment_closed(params, 0).value, spec.ctx)) > MOMENT_CHECK_TOL:
            logger.error("Density mass %s differs from the first tensor moment", format_scalar(closed, 15))

    report = DensityReport(s1=format_scalar(params.s1), s2=format_scalar(params.s2),
                           total_mass=format_scalar(closed_form_moment(spec, 0), 20),
                           quadrature=checks, **DensityReport.spec_fields(spec))
    if verdict.subnormal:
        report.positivity = PositivityEntry.from_report(positivity_certificate(spec, args.grid_density))
    else:
        witness = negativity_witness(spec)
        if witness is not None:
            report.witness = WitnessEntry.from_witness(witness)
            report.witness_stable = is_negative_near(spec, witness.t)

    if args.out:
        write_density_csv(sample_density(spec, args.grid_density), args.out)
    _emit(report)
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    """Region scan over a rational grid; writes JSON, CSV or SVG."""
    s1_axis, s2_axis = parse_grid(args.grid)
    fmt = args.format or (emitter_for_path(args.out).suffix.lstrip(".") if args.out else "json")
    config = RunConfig(s1_axis=s1_axis, s2_axis=s2_axis, m_cap=args.m_cap, n_cap=args.n_cap,
                       tol=args.tol, format=fmt, mode=args.mode, jobs=args.jobs, dps=args.dps,
                       witnesses=args.witnesses)
    records = run_scan(config, context={"run_id": str(uuid.uuid4())})
    emitter = get_emitter(config.format)
    if args.out:
        result = emitter.write(records, args.out)
        result["subnormal"] = sum(r.subnormal for r in records)
        print(json.dumps(result, sort_keys=True))
    else:
        sys.stdout.write(emitter.render(records))
    return 0


def cmd_golden(args: argparse.Namespace) -> int:
    context = {"run_id": str(uuid.uuid4())}
    if args.bootstrap:
        bootstrap_golden(args.path, context=context)
    summary = verify_golden(args.path, context=context)
    print(json.dumps({"path": summary.path, "summary": summary.line(), "passed": summary.passed,
                      "failed": summary.failed}, indent=2, sort_keys=True))
    summary.raise_for_failures()
    return 0


# ----------------------------
# Parser
# ----------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("rational", "real"), default="rational",
                        help="exact rationals (default) or high-precision reals")
    common.add_argument("--tol", type=float, default=REAL_TOL, help="boundary tolerance in real mode")
    common.add_argument("--dps", type=int, default=WORKING_DPS, help="decimal digits in real mode")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("s1", help="first Bergman parameter, e.g. 15, 3/2 or 1.5")
    pair.add_argument("s2", help="second Bergman parameter")

    caps = argparse.ArgumentParser(add_help=False)
    caps.add_argument("--m-cap", type=int, default=DEFAULT_M_CAP, help="largest difference order")
    caps.add_argument("--n-cap", type=int, default=DEFAULT_N_CAP, help="largest offset")

    ap = argparse.ArgumentParser(prog="app.py", description="Subnormality of tensor products of Bergman modules")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common, pair], help="decide subnormality").set_defaults(func=cmd_classify)
    sub.add_parser("roots", parents=[common, pair], help="roots of the reciprocal-moment cubic").set_defaults(
        func=cmd_roots)

    p = sub.add_parser("moments", parents=[common, pair], help="tensor moments with the convolution oracle")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_moments)

    sub.add_parser("witness", parents=[common, pair, caps], help="search for a non-subnormality witness").set_defaults(
        func=cmd_witness)

    p = sub.add_parser("density", parents=[common, pair], help="representing density checks")
    p.add_argument("--orders", type=int, default=QUADRATURE_ORDERS, help="check moments n = 0..orders")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.add_argument("--grid-density", type=int, default=50, help="samples per decade")
    p.add_argument("--out", default=None, help="write sampled density CSV (t, w(t))")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("scan", parents=[common, caps], help="region scan of the (s1, s2) quadrant")
    p.add_argument("--grid", default=DEFAULT_WINDOW, help="x0:x1:step[,y0:y1:step]")
    p.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=DEFAULT_JOBS)
    p.add_argument("--witnesses", action="store_true", help="also search witnesses at non-subnormal points")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("golden", parents=[common], help="verify the reference suite")
    p.add_argument("--bootstrap", action="store_true", help="derive and write the golden file first")
    p.add_argument("--path", default=GOLDEN_PATH)
    p.set_defaults(func=cmd_golden)
    return ap


def _configure_logging(verbose: int) -> None:
    level = {0: LOG_LEVEL, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(level=level, format="%(asctime)s [%(levelname)s] %(message)s", stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (PrecisionError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (VerificationMismatch, GoldenMissing) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        logger.exception("I/O failure")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

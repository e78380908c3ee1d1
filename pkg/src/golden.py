"""
Reference suite over six (s1, s2) pairs: roots, verdicts and difference
witnesses, stored in a deterministic JSON golden file and re-derived on demand.
"""
import json
import logging
import os
import uuid
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel

from classifier import classify_corollary, classify_theorem
from cm_engine import smallest_failing_order
from errors import DomainError, GoldenMissing, VerificationMismatch
from moment_core import ModuleParams, roots_of
from numeric import format_scalar, is_complex, real_context, to_complex, to_real
from output.emitters import atomic_write
from reports import SCHEMA_VERSION
from witness_search import scan_differences

# --------------------------------------------
# Configurable constants
# --------------------------------------------
PROJECT_ROOT = Path(__file__).resolve().parents[1]
GOLDEN_PATH = os.environ.get("BERGMAN_GOLDEN_PATH", str(PROJECT_ROOT / "golden" / "reference_cases.json"))
GOLDEN_M_CAP = 100
GOLDEN_N_CAP = 10
ROOT_DIGITS = 30

logger = logging.getLogger(__name__)

REFERENCE_CASES: Tuple[Tuple[str, Fraction, Fraction], ...] = (
    ("1,1", Fraction(1), Fraction(1)),
    ("15,10", Fraction(15), Fraction(10)),
    ("3/2,25", Fraction(3, 2), Fraction(25)),
    ("6,6", Fraction(6), Fraction(6)),
    ("8,12", Fraction(8), Fraction(12)),
    ("2,2", Fraction(2), Fraction(2)),
)

# alpha1 (the + branch) and alpha2 for each case
_KNOWN_ROOTS: Dict[str, Callable[[Any], Tuple[Any, Any]]] = {
    "1,1": lambda ctx: (ctx.mpf(-2), ctx.mpf(-3)),
    "15,10": lambda ctx: (ctx.mpf(2) / 5, ctx.mpf(1) / 10),
    "3/2,25": lambda ctx: (2 * (-7 + 2 * ctx.sqrt(6)) / 25, 2 * (-7 - 2 * ctx.sqrt(6)) / 25),
    "6,6": lambda ctx: (ctx.mpc(0, 1 / ctx.sqrt(6)), ctx.mpc(0, -1 / ctx.sqrt(6))),
    "8,12": lambda ctx: (ctx.mpc(3, ctx.sqrt(7)) / 16, ctx.mpc(3, -ctx.sqrt(7)) / 16),
    "2,2": lambda ctx: (ctx.mpc(-1, 1 / ctx.sqrt(2)), ctx.mpc(-1, -1 / ctx.sqrt(2))),
}
_KNOWN_SUBNORMAL = {"1,1": True, "15,10": False, "3/2,25": True, "6,6": False, "8,12": False, "2,2": True}
_KNOWN_ORDER_AT_ZERO = {"15,10": 75, "6,6": 73, "8,12": 73}


class GoldenSummary(BaseModel):
    path: str
    run_id: str
    passed: List[str] = []
    failed: Dict[str, str] = {}

    @property
    def ok(self) -> bool:
        return not self.failed

    @property
    def total(self) -> int:
        return len(self.passed) + len(self.failed)

    def line(self) -> str:
        return f"{len(self.passed)}/{self.total} pass"

    def raise_for_failures(self) -> None:
        if self.failed:
            detail = "; ".join(f"({k}) {v}" for k, v in sorted(self.failed.items()))
            raise VerificationMismatch(sorted(self.failed), detail)


def _derive_case(label: str, s1: Fraction, s2: Fraction, m_cap: int, n_cap: int,
                 context: Dict[str, str]) -> Dict[str, Any]:
    params = ModuleParams(s1, s2)
    verdict = classify_corollary(params)
    theorem = classify_theorem(verdict.roots)
    witness = scan_differences(params, m_cap, n_cap, context=context)
    logger.info("[Golden %s] (%s): %s, witness %s", context["run_id"], label,
                "subnormal" if verdict.subnormal else "not subnormal",
                witness.summary() if witness else "none within caps")
    return {
        "s1": str(s1),
        "s2": str(s2),
        "gamma": format_scalar(params.gamma),
        "disc": format_scalar(params.disc),
        "roots": [format_scalar(r, ROOT_DIGITS) for r in verdict.roots.roots],
        "root_branch": verdict.roots.branch.value,
        "branch": verdict.branch.value,
        "subnormal": verdict.subnormal,
        "rule_fired": verdict.rule_fired,
        "theorem_agrees": theorem.same_decision(verdict),
        "witness": None if witness is None else {
            "m": witness.m,
            "n": witness.n,
            "value": format_scalar(to_real(witness.value), 20),
        },
    }


def derive_golden(m_cap: int = GOLDEN_M_CAP, n_cap: int = GOLDEN_N_CAP,
                  *, context: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """Recompute every reference fact from scratch, in exact arithmetic."""
    context = context or {"run_id": str(uuid.uuid4())}
    cases = {label: _derive_case(label, s1, s2, m_cap, n_cap, context) for label, s1, s2 in REFERENCE_CASES}
    return {"schema_version": SCHEMA_VERSION, "m_cap": m_cap, "n_cap": n_cap, "cases": cases}


def render_golden(golden: Dict[str, Any]) -> str:
    return json.dumps(golden, indent=2, sort_keys=True) + "\n"


def check_known_facts(golden: Dict[str, Any]) -> Dict[str, str]:
    """Compare derived facts with the published ones; returns failures by case."""
    failures: Dict[str, str] = {}
    for label, s1, s2 in REFERENCE_CASES:
        case = golden["cases"].get(label)
        if case is None:
            failures[label] = "case missing"
            continue
        problems = []
        roots = roots_of(ModuleParams(s1, s2))
        ctx = real_context()
        expected = _KNOWN_ROOTS[label](ctx)
        for got, want in zip((roots.alpha1, roots.alpha2), expected):
            got = to_complex(got, ctx) if is_complex(got) else to_real(got, ctx)
            if not ctx.almosteq(got, want, rel_eps=1e-12, abs_eps=1e-12):
                problems.append(f"root {format_scalar(got)} != {format_scalar(want)}")
        if case["subnormal"] != _KNOWN_SUBNORMAL[label]:
            problems.append(f"verdict subnormal={case['subnormal']}")
        if not case["theorem_agrees"]:
            problems.append("root-location and sum/product rules disagree")
        if _KNOWN_SUBNORMAL[label] and case["witness"] is not None:
            problems.append("witness found for a subnormal case")
        if not _KNOWN_SUBNORMAL[label] and case["witness"] is None:
            problems.append("no witness within caps")
        if label in _KNOWN_ORDER_AT_ZERO:
            order = smallest_failing_order(ModuleParams(s1, s2), GOLDEN_M_CAP, 0)
            if order != _KNOWN_ORDER_AT_ZERO[label]:
                problems.append(f"smallest failing order at n=0 is {order}, expected {_KNOWN_ORDER_AT_ZERO[label]}")
        if problems:
            failures[label] = "; ".join(problems)
    return failures


def bootstrap_golden(path: str = GOLDEN_PATH, *, context: Optional[Dict[str, str]] = None) -> str:
    """Derive the golden file and write it, refusing when any published fact is not reproduced."""
    context = context or {"run_id": str(uuid.uuid4())}
    logger.info("[Golden %s] Bootstrapping %s", context["run_id"], path)
    golden = derive_golden(context=context)
    failures = check_known_facts(golden)
    if failures:
        logger.error("[Golden %s] Refusing to write %s: %s", context["run_id"], path, failures)
        raise VerificationMismatch(sorted(failures), "; ".join(failures.values()))
    atomic_write(path, render_golden(golden))
    return path


def load_golden(path: str = GOLDEN_PATH) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise GoldenMissing(path)
    with open(path, encoding="utf-8") as f:
        golden = json.load(f)
    if golden.get("schema_version") != SCHEMA_VERSION:
        raise DomainError(f"{path}: unsupported schema_version {golden.get('schema_version')!r}")
    return golden


def verify_golden(path: str = GOLDEN_PATH, *, context: Optional[Dict[str, str]] = None) -> GoldenSummary:
    """Re-derive every case with the stored caps and compare field by field."""
    context = context or {"run_id": str(uuid.uuid4())}
    stored = load_golden(path)
    derived = derive_golden(stored.get("m_cap", GOLDEN_M_CAP), stored.get("n_cap", GOLDEN_N_CAP), context=context)
    summary = GoldenSummary(path=path, run_id=context["run_id"])

    for label, _, _ in REFERENCE_CASES:
        want = stored.get("cases", {}).get(label)
        got = derived["cases"][label]
        if want is None:
            summary.failed[label] = "case missing from golden file"
            continue
        diffs = [f"{key} differs: stored {want.get(key)!r}, derived {got[key]!r}"
                 for key in sorted(got) if want.get(key) != got[key]]
        if diffs:
            summary.failed[label] = "; ".join(diffs)
        else:
            summary.passed.append(label)

    for label in sorted(stored.get("cases", {})):
        if label not in derived["cases"]:
            summary.failed[label] = "unknown case in golden file"

    if summary.ok:
        logger.info("[Golden %s] %s", context["run_id"], summary.line())
    else:
        logger.error("[Golden %s] %s; failing: %s", context["run_id"], summary.line(), ", ".join(sorted(summary.failed)))
    return summary

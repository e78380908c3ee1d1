"""
Subnormality of the module tensor product of two weighted Bergman modules.

Two equivalent deciders are provided and are expected to agree everywhere:

* :func:`classify_theorem` reads only the root locations of the cubic p:
  with real roots the module is subnormal iff every root has negative real
  part; with a complex pair it is subnormal iff Re(alpha1) <= -1.
* :func:`classify_corollary` reads only S = s1 + s2 and P = s1 s2:
  if (3S - P)^2 >= 24P it is subnormal iff 3S > P, otherwise iff S >= P.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from moment_core import FIXED_ROOT, ModuleParams, RootBranch, RootSet, roots_of
from numeric import REAL_TOL, compare

logger = logging.getLogger(__name__)

RULE_REAL_SUBNORMAL = "real-roots: 3s > p"
RULE_REAL_NOT = "real-roots: 3s <= p"
RULE_COMPLEX_SUBNORMAL = "complex-roots: s >= p"
RULE_COMPLEX_NOT = "complex-roots: s < p"
RULE_THEOREM_REAL_IN = "real-roots: all roots in Re < 0"
RULE_THEOREM_REAL_OUT = "real-roots: a root with Re >= 0"
RULE_THEOREM_COMPLEX_IN = "complex-roots: Re(alpha) <= -1"
RULE_THEOREM_COMPLEX_OUT = "complex-roots: Re(alpha) > -1"
RULE_SHORTCUT_SUBNORMAL = "shortcut: s >= p"
RULE_SHORTCUT_NOT = "shortcut: 3s <= p"


class VerdictBranch(str, Enum):
    REAL_ROOTS = "RealRootsCase"
    COMPLEX_ROOT = "ComplexRootCase"


@dataclass(frozen=True)
class Verdict:
    subnormal: bool
    branch: VerdictBranch
    rule_fired: str
    roots: RootSet
    boundary_flag: bool = False
    tolerance: Optional[float] = None
    params: Optional[ModuleParams] = None

    def same_decision(self, other: "Verdict") -> bool:
        return self.subnormal == other.subnormal and self.branch == other.branch


def _branch_of(roots: RootSet) -> VerdictBranch:
    if roots.branch is RootBranch.COMPLEX_PAIR:
        return VerdictBranch.COMPLEX_ROOT
    return VerdictBranch.REAL_ROOTS


def _tolerance(params_or_roots: Any, exact: bool) -> Optional[float]:
    return None if exact else getattr(params_or_roots, "tol", REAL_TOL)


def classify_corollary(params: ModuleParams) -> Verdict:
    """
    Decide from the sum and product. The inequality is strict in the
    real-root branch and non-strict in the complex branch.
    """
    roots = roots_of(params)
    s, p = params.sum_s, params.prod_p
    branch = _branch_of(roots)

    if branch is VerdictBranch.REAL_ROOTS:
        sign, near = compare(3 * s, p, params.tol)
        subnormal = sign > 0
        rule = RULE_REAL_SUBNORMAL if subnormal else RULE_REAL_NOT
    else:
        sign, near = compare(s, p, params.tol)
        subnormal = sign >= 0
        rule = RULE_COMPLEX_SUBNORMAL if subnormal else RULE_COMPLEX_NOT

    boundary = sign == 0 or near or roots.disc == 0 or roots.boundary_sensitive
    return Verdict(subnormal, branch, rule, roots, boundary_flag=bool(boundary),
                   tolerance=_tolerance(params, params.exact), params=params)


def classify_theorem(roots: RootSet, tol: float = REAL_TOL) -> Verdict:
    """Decide from the root locations alone."""
    branch = _branch_of(roots)
    if branch is VerdictBranch.REAL_ROOTS:
        subnormal = roots.roots_below(Fraction(0), tol)
        rule = RULE_THEOREM_REAL_IN if subnormal else RULE_THEOREM_REAL_OUT
        sign, near = compare(roots.alpha1, 0, tol)
    else:
        sign, near = compare(roots.a, FIXED_ROOT, tol)
        subnormal = sign <= 0
        rule = RULE_THEOREM_COMPLEX_IN if subnormal else RULE_THEOREM_COMPLEX_OUT
    boundary = sign == 0 or near or roots.boundary_sensitive
    return Verdict(subnormal, branch, rule, roots, boundary_flag=bool(boundary),
                   tolerance=None if roots.exact else tol)


def quick_decide(params: ModuleParams) -> Optional[Verdict]:
    """Sufficient conditions: S >= P is always subnormal, 3S <= P never is."""
    s, p = params.sum_s, params.prod_p
    if compare(s, p, params.tol)[0] >= 0:
        verdict = classify_corollary(params)
        return Verdict(True, verdict.branch, RULE_SHORTCUT_SUBNORMAL, verdict.roots,
                       verdict.boundary_flag, verdict.tolerance, params)
    if compare(3 * s, p, params.tol)[0] <= 0:
        verdict = classify_corollary(params)
        return Verdict(False, verdict.branch, RULE_SHORTCUT_NOT, verdict.roots,
                       verdict.boundary_flag, verdict.tolerance, params)
    return None


def diagonal_special_case(s: Any) -> Verdict:
    """
    The module tensored with itself: always subnormal for s <= 2, never
    for s >= 6. On the diagonal the verdict flips exactly at s = 2.
    """
    return classify_corollary(ModuleParams(s, s))

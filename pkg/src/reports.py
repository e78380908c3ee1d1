"""
Serializable report models. Every scalar is rendered through
``numeric.format_scalar`` so rationals stay exact ("2/5") and reals carry a
fixed number of significant digits.
"""
from typing import Any, List, Optional

from pydantic import BaseModel

from cm_engine import Witness
from classifier import Verdict
from hausdorff_density import PositivityReport, WeightSpec
from moment_core import ModuleParams, RootSet, cubic_of
from numeric import format_scalar

SCHEMA_VERSION = 1
CSV_COLUMNS = ("s1", "s2", "gamma", "disc", "branch", "subnormal", "rule_fired")

fmt = format_scalar


def _roots(roots: RootSet) -> List[str]:
    return [fmt(r) for r in roots.roots]


class VerdictReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    s1: str
    s2: str
    mode: str
    sum_s: str
    prod_p: str
    gamma: str
    disc: str
    branch: str
    root_branch: str
    subnormal: bool
    rule_fired: str
    roots: List[str]
    boundary_flag: bool
    tolerance: Optional[float] = None
    theorem_agrees: bool = True

    @classmethod
    def from_verdict(cls, params: ModuleParams, verdict: Verdict, theorem: Optional[Verdict] = None) -> "VerdictReport":
        return cls(
            s1=fmt(params.s1),
            s2=fmt(params.s2),
            mode=params.mode,
            sum_s=fmt(params.sum_s),
            prod_p=fmt(params.prod_p),
            gamma=fmt(params.gamma),
            disc=fmt(params.disc),
            branch=verdict.branch.value,
            root_branch=verdict.roots.branch.value,
            subnormal=verdict.subnormal,
            rule_fired=verdict.rule_fired,
            roots=_roots(verdict.roots),
            boundary_flag=verdict.boundary_flag,
            tolerance=verdict.tolerance,
            theorem_agrees=theorem is None or theorem.same_decision(verdict),
        )


class RootsReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    s1: str
    s2: str
    roots: List[str]
    root_branch: str
    rational_roots: bool
    boundary_sensitive: bool
    coefficients: List[str]
    scale: str
    vieta_sum: str
    vieta_product: str
    real_part: Optional[str] = None
    imag_part: Optional[str] = None

    @classmethod
    def from_roots(cls, params: ModuleParams, roots: RootSet) -> "RootsReport":
        total, product = roots.vieta()
        cubic = cubic_of(params)
        return cls(
            s1=fmt(params.s1),
            s2=fmt(params.s2),
            roots=_roots(roots),
            root_branch=roots.branch.value,
            rational_roots=roots.rational_roots,
            boundary_sensitive=roots.boundary_sensitive,
            coefficients=[fmt(c) for c in cubic.coefficients],
            scale=fmt(cubic.scale),
            vieta_sum=fmt(total),
            vieta_product=fmt(product),
            real_part=fmt(roots.a) if roots.b is not None else None,
            imag_part=fmt(roots.b) if roots.b is not None else None,
        )


class MomentsReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    s1: str
    s2: str
    moments: List[str]
    oracle_agrees: bool


class WitnessEntry(BaseModel):
    kind: str
    value: str
    m: Optional[int] = None
    n: Optional[int] = None
    t: Optional[str] = None
    certified: bool = True
    summary: str

    @classmethod
    def from_witness(cls, witness: Witness) -> "WitnessEntry":
        return cls(
            kind=witness.kind.value,
            value=fmt(witness.value, 20),
            m=witness.m,
            n=witness.n,
            t=fmt(witness.t, 20) if witness.t is not None else None,
            certified=witness.certified,
            summary=witness.summary(),
        )


class WitnessReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    run_id: str
    s1: str
    s2: str
    subnormal: bool
    branch: str
    rule_fired: str
    m_cap: int
    n_cap: int
    dps: Optional[int] = None
    status: str
    difference: Optional[WitnessEntry] = None
    density: Optional[WitnessEntry] = None
    density_stable: Optional[bool] = None


class QuadratureCheck(BaseModel):
    n: int
    quadrature: str
    closed_form: str
    abs_error: str
    within_tol: bool


class PositivityEntry(BaseModel):
    min_value: str
    argmin: str
    points: int
    contradiction: bool

    @classmethod
    def from_report(cls, report: PositivityReport) -> "PositivityEntry":
        return cls(
            min_value=fmt(report.min_value, 12),
            argmin=fmt(report.argmin, 12),
            points=report.points,
            contradiction=report.contradiction,
        )


class DensityReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    s1: str
    s2: str
    case_tag: str
    scale: str
    theta: Optional[str] = None
    total_mass: str
    quadrature: List[QuadratureCheck] = []
    positivity: Optional[PositivityEntry] = None
    witness: Optional[WitnessEntry] = None
    witness_stable: Optional[bool] = None

    @staticmethod
    def spec_fields(spec: WeightSpec) -> dict:
        return {
            "case_tag": spec.case_tag.value,
            "scale": fmt(spec.scale),
            "theta": fmt(spec.theta) if spec.theta is not None else None,
        }


class ScanRecord(BaseModel):
    """One grid point of a region scan. Only the CSV_COLUMNS are written to CSV."""

    s1: str
    s2: str
    gamma: str
    disc: str
    branch: str
    subnormal: bool
    rule_fired: str
    roots: List[str]
    boundary_flag: bool = False
    witness: Optional[str] = None

    @classmethod
    def from_verdict(cls, params: ModuleParams, verdict: Verdict, witness: Optional[Any] = None,
                     s1: Optional[str] = None, s2: Optional[str] = None) -> "ScanRecord":
        return cls(
            s1=s1 or fmt(params.s1),
            s2=s2 or fmt(params.s2),
            gamma=fmt(params.gamma),
            disc=fmt(params.disc),
            branch=verdict.branch.value,
            subnormal=verdict.subnormal,
            rule_fired=verdict.rule_fired,
            roots=_roots(verdict.roots),
            boundary_flag=verdict.boundary_flag,
            witness=witness.summary() if witness is not None else None,
        )

    def csv_row(self) -> List[str]:
        return [self.s1, self.s2, self.gamma, self.disc, self.branch, str(self.subnormal).lower(), self.rule_fired]

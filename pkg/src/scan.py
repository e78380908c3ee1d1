"""
Region scans of the (s1, s2) quadrant and the analytic boundary curves
separating the subnormal and non-subnormal regions.
"""
import logging
import math
import os
import uuid
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from classifier import Verdict, classify_corollary, classify_theorem
from cm_engine import Witness
from errors import DomainError
from moment_core import ModuleParams
from numeric import REAL_TOL, WORKING_DPS, parse_scalar
from reports import CSV_COLUMNS, ScanRecord
from witness_search import DEFAULT_M_CAP, DEFAULT_N_CAP, search_witness

# --------------------------------------------
# Configurable constants
# --------------------------------------------
DEFAULT_JOBS = int(os.environ.get("BERGMAN_JOBS", 1))
DEFAULT_WINDOW = "1/10:30:1/10"

logger = logging.getLogger(__name__)


class GridAxis(BaseModel):
    """start, start + step, ... up to and including stop, as exact rationals."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    start: Fraction
    stop: Fraction
    step: Fraction

    @field_validator("start", "stop", "step", mode="before")
    @classmethod
    def _exact(cls, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return Fraction(value)
        return parse_scalar(str(value), "grid")

    @model_validator(mode="after")
    def _check_range(self) -> "GridAxis":
        if self.start <= 0:
            raise ValueError("grid must lie in the open quadrant: start > 0")
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.stop < self.start:
            raise ValueError("grid stop must be >= start")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridAxis":
        """``x0:x1:step``, each part a rational or decimal."""
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid axis {text!r} must look like x0:x1:step")
        try:
            return cls(start=parts[0], stop=parts[1], step=parts[2])
        except ValueError as exc:
            raise DomainError(f"grid axis {text!r}: {exc}") from exc

    def values(self) -> List[Fraction]:
        count = math.floor((self.stop - self.start) / self.step) + 1
        return [self.start + k * self.step for k in range(count)]


def parse_grid(text: str) -> Tuple[GridAxis, GridAxis]:
    """``x0:x1:step`` for both axes, or ``x0:x1:step,y0:y1:step``."""
    specs = text.split(",")
    if len(specs) not in (1, 2):
        raise DomainError(f"grid {text!r} must have one or two axes")
    axes = [GridAxis.parse(s.strip()) for s in specs]
    return axes[0], axes[-1]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    s1_axis: GridAxis = GridAxis.parse(DEFAULT_WINDOW)
    s2_axis: GridAxis = GridAxis.parse(DEFAULT_WINDOW)
    m_cap: int = DEFAULT_M_CAP
    n_cap: int = DEFAULT_N_CAP
    tol: float = REAL_TOL
    format: str = "json"
    mode: str = "rational"
    jobs: int = DEFAULT_JOBS
    dps: int = WORKING_DPS
    witnesses: bool = False

    @field_validator("m_cap", "jobs", "dps")
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("n_cap")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be >= 0")
        return value

    @field_validator("tol")
    @classmethod
    def _positive_tol(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tolerance must be positive")
        return value

    @field_validator("format")
    @classmethod
    def _format(cls, value: str) -> str:
        if value not in ("json", "csv", "svg"):
            raise ValueError(f"unknown format {value!r}")
        return value

    @field_validator("mode")
    @classmethod
    def _mode(cls, value: str) -> str:
        if value not in ("rational", "real"):
            raise ValueError(f"unknown mode {value!r}")
        return value

    def points(self) -> List[Tuple[Fraction, Fraction]]:
        return [(x, y) for x in self.s1_axis.values() for y in self.s2_axis.values()]


def sign_predicate(s1: Fraction, s2: Fraction) -> bool:
    """The sum/product rule evaluated directly: disc >= 0 ? 3S > P : S >= P."""
    s, p = s1 + s2, s1 * s2
    disc = (3 * s - p) ** 2 - 24 * p
    return 3 * s > p if disc >= 0 else s >= p


def _params(s1: Fraction, s2: Fraction, mode: str, dps: int, tol: float) -> ModuleParams:
    params = ModuleParams.of(s1, s2, mode=mode, dps=dps)
    return params if tol == params.tol else ModuleParams(params.s1, params.s2, dps=dps, tol=tol)


def classify_point(
    s1: Fraction,
    s2: Fraction,
    mode: str = "rational",
    dps: int = WORKING_DPS,
    tol: float = REAL_TOL,
    witness_caps: Optional[Tuple[int, int]] = None,
) -> ScanRecord:
    params = _params(s1, s2, mode, dps, tol)
    verdict = classify_corollary(params)
    if not classify_theorem(verdict.roots, tol).same_decision(verdict):
        logger.error("Root-location and sum/product rules disagree at %s", params.label())
    found = _witness_of(params, verdict, witness_caps)
    return ScanRecord.from_verdict(params, verdict, found, s1=str(s1), s2=str(s2))


def _witness_of(params: ModuleParams, verdict: Verdict, witness_caps: Optional[Tuple[int, int]]) -> Optional[Witness]:
    if not witness_caps or verdict.subnormal:
        return None
    search = search_witness(params, *witness_caps)
    return search.difference or search.density


def _classify_job(job: Tuple) -> ScanRecord:
    return classify_point(*job)


def run_scan(config: RunConfig, *, context: Optional[Dict[str, str]] = None) -> List[ScanRecord]:
    """
    Classify every grid point. Records come back sorted by (s1, s2) so the
    output does not depend on ``config.jobs``.
    """
    context = context or {"run_id": str(uuid.uuid4())}
    run_id = context["run_id"]
    points = config.points()
    caps = (config.m_cap, config.n_cap) if config.witnesses else None
    jobs = [(x, y, config.mode, config.dps, config.tol, caps) for x, y in points]
    logger.info("[Scan %s] Classifying %d points with %d worker(s)", run_id, len(jobs), config.jobs)

    if config.jobs == 1 or len(jobs) < 2:
        records = [_classify_job(job) for job in jobs]
    else:
        chunksize = max(1, len(jobs) // (config.jobs * 8))
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_classify_job, jobs, chunksize=chunksize))

    records.sort(key=lambda r: (Fraction(r.s1), Fraction(r.s2)))
    subnormal = sum(r.subnormal for r in records)
    logger.info("[Scan %s] Done: %d subnormal, %d not subnormal", run_id, subnormal, len(records) - subnormal)
    return records


def record_from_row(row: Mapping[str, str], mode: str = "rational", dps: int = WORKING_DPS,
                    tol: float = REAL_TOL, witness_caps: Optional[Tuple[int, int]] = None) -> ScanRecord:
    """
    Rebuild a full record from the CSV columns. Roots and the boundary flag
    are recomputed, and so is the witness when ``witness_caps`` is given.
    """
    missing = [c for c in CSV_COLUMNS if c not in row]
    if missing:
        raise DomainError(f"scan row is missing columns {missing}")
    s1, s2 = parse_scalar(row["s1"], "s1"), parse_scalar(row["s2"], "s2")
    params = _params(s1, s2, mode, dps, tol)
    verdict = classify_corollary(params)
    witness = _witness_of(params, verdict, witness_caps)
    return ScanRecord(
        s1=row["s1"],
        s2=row["s2"],
        gamma=row["gamma"],
        disc=row["disc"],
        branch=row["branch"],
        subnormal=row["subnormal"].strip().lower() == "true",
        rule_fired=row["rule_fired"],
        roots=ScanRecord.from_verdict(params, verdict).roots,
        boundary_flag=verdict.boundary_flag,
        witness=witness.summary() if witness is not None else None,
    )


# --------------------------------------------
# Boundary curves, as s2 = f(s1)
# --------------------------------------------
def _three_s_eq_p(x: np.ndarray) -> np.ndarray:
    return np.where(x > 3, 3 * x / np.where(x > 3, x - 3, 1), np.nan)


def _s_eq_p(x: np.ndarray) -> np.ndarray:
    return np.where(x > 1, x / np.where(x > 1, x - 1, 1), np.nan)


def _disc_zero(sign: int) -> Callable[[np.ndarray], np.ndarray]:
    def curve(x: np.ndarray) -> np.ndarray:
        root = np.sqrt(np.clip(2 * (x - 1), 0, None))
        at_three = np.isclose(x, 3)
        denom = np.where(at_three, 1, (3 - x) ** 2)
        y = 3 * x * ((1 + x) + sign * 2 * root) / denom
        # the lower branch is continuous through s1 = 3 with value 9/8
        y = np.where(at_three, 9 / 8 if sign < 0 else np.nan, y)
        return np.where(x >= 1, y, np.nan)

    return curve


BOUNDARY_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "3s=p": _three_s_eq_p,
    "s=p": _s_eq_p,
    "disc=0 upper": _disc_zero(+1),
    "disc=0 lower": _disc_zero(-1),
}


def boundary_curves(s1_max: float = 30.0, samples: int = 2000,
                    s2_max: Optional[float] = None) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """
    Polylines of 3S = P, S = P and (3S - P)^2 = 24P over (0, s1_max],
    clipped to s2 <= s2_max. The S = P and disc = 0 curves meet at
    (3 + sqrt 3, 3 - sqrt 3) and its mirror, where S = P = 6.
    """
    if s1_max <= 0 or samples < 2:
        raise DomainError("s1_max must be positive and samples >= 2")
    s2_max = s1_max if s2_max is None else s2_max
    x = np.linspace(0, s1_max, samples + 1)[1:]
    curves = {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for name, fn in BOUNDARY_FUNCTIONS.items():
            y = fn(x)
            keep = np.isfinite(y) & (y > 0) & (y <= s2_max)
            curves[name] = (x[keep], y[keep])
    return curves


def boundary_value(name: str, s1: Sequence[float]) -> np.ndarray:
    if name not in BOUNDARY_FUNCTIONS:
        raise DomainError(f"unknown boundary curve {name!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return BOUNDARY_FUNCTIONS[name](np.asarray(s1, dtype=float))

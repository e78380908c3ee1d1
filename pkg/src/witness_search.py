"""
Witnesses of non-subnormality.

A difference witness is a pair (m, n) with D_m(n) < 0; a density witness is a
point t in (0, 1) where the representing density is negative. Only the first
is available everywhere; the second exists exactly in the strip S < P < 3S
where the roots are complex with -1 < Re(alpha) < 0.
"""
import logging
import os
import uuid
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from classifier import Verdict, VerdictBranch, classify_corollary
from cm_engine import Witness, is_completely_monotone_upto
from errors import DomainError, PrecisionError
from hausdorff_density import is_negative_near, negativity_witness, weight_spec_of
from moment_core import ModuleParams
from numeric import MAX_DPS, compare

# --------------------------------------------
# Configurable constants
# --------------------------------------------
PRECISION_ATTEMPTS = int(os.environ.get("BERGMAN_PRECISION_ATTEMPTS", 4))
DEFAULT_M_CAP = int(os.environ.get("BERGMAN_M_CAP", 120))
DEFAULT_N_CAP = int(os.environ.get("BERGMAN_N_CAP", 120))

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WitnessSearch:
    verdict: Verdict
    difference: Optional[Witness]
    density: Optional[Witness]
    m_cap: int
    n_cap: int
    dps: Optional[int]
    run_id: str
    density_stable: Optional[bool] = None

    @property
    def found(self) -> bool:
        return self.difference is not None or self.density is not None


def _log_before_sleep(context: Dict[str, str]) -> Callable:
    def hook(retry_state) -> None:
        exception = retry_state.outcome.exception() if retry_state.outcome else None
        logger.warning(
            "[Witness %s] Raising precision after: %s (attempt %s/%s)",
            context.get("run_id", "N/A"),
            exception,
            retry_state.attempt_number,
            retry_state.retry_object.stop.max_attempt_number,
        )

    return hook


def scan_differences(
    params: ModuleParams,
    m_cap: int,
    n_cap: int,
    *,
    context: Optional[Dict[str, str]] = None,
) -> Optional[Witness]:
    """
    Difference scan. Rational params are scanned once, exactly. Real params
    are rescanned with doubled digits on every PrecisionError, up to
    BERGMAN_MAX_DPS and BERGMAN_PRECISION_ATTEMPTS tries.
    """
    if params.exact:
        return is_completely_monotone_upto(params, m_cap, n_cap)

    context = context or {"run_id": str(uuid.uuid4())}
    witness = None
    for attempt in Retrying(
        retry=retry_if_exception_type(PrecisionError),
        stop=stop_after_attempt(PRECISION_ATTEMPTS),
        before_sleep=_log_before_sleep(context),
        reraise=True,
    ):
        with attempt:
            dps = min(params.dps * 2 ** (attempt.retry_state.attempt_number - 1), MAX_DPS)
            witness = is_completely_monotone_upto(params.with_precision(dps), m_cap, n_cap)
    return witness


def in_complex_strip(params: ModuleParams, verdict: Verdict) -> bool:
    """Complex roots with -1 < Re(alpha) < 0, i.e. S < P < 3S."""
    if verdict.branch is not VerdictBranch.COMPLEX_ROOT or verdict.subnormal:
        return False
    return compare(3 * params.sum_s, params.prod_p, params.tol)[0] > 0


def search_witness(
    params: ModuleParams,
    m_cap: int = DEFAULT_M_CAP,
    n_cap: int = DEFAULT_N_CAP,
    *,
    context: Optional[Dict[str, str]] = None,
) -> WitnessSearch:
    """
    Classify ``params`` and look for every certificate of non-subnormality
    reachable within the caps. Subnormal params are scanned too; finding a
    witness for them would be a contradiction and is logged as an error.
    """
    if m_cap < 1 or n_cap < 0:
        raise DomainError(f"m_cap must be >= 1 and n_cap >= 0, got ({m_cap}, {n_cap})")
    if context is None:
        context = {"run_id": str(uuid.uuid4())}
    run_id = context["run_id"]

    verdict = classify_corollary(params)
    logger.info("[Witness %s] %s is %s (%s)", run_id, params.label(),
                "subnormal" if verdict.subnormal else "not subnormal", verdict.rule_fired)

    logger.info("[Witness %s] Scanning differences up to (m, n) = (%d, %d)", run_id, m_cap, n_cap)
    difference = scan_differences(params, m_cap, n_cap, context=context)
    if difference is None:
        logger.info("[Witness %s] No difference witness within caps", run_id)
    elif verdict.subnormal and not verdict.boundary_flag:
        logger.error("[Witness %s] %s found for subnormal %s", run_id, difference.summary(), params.label())
    else:
        logger.info("[Witness %s] Found %s", run_id, difference.summary())

    density, stable = None, None
    if in_complex_strip(params, verdict):
        spec = weight_spec_of(params)
        density = negativity_witness(spec)
        if density is not None:
            stable = is_negative_near(spec, density.t)
            logger.info("[Witness %s] Found %s (stable=%s)", run_id, density.summary(), stable)

    return WitnessSearch(
        verdict=verdict,
        difference=difference,
        density=density,
        m_cap=m_cap,
        n_cap=n_cap,
        dps=None if params.exact else params.dps,
        run_id=run_id,
        density_stable=stable,
    )

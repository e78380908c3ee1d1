"""
Explicit representing densities for reciprocals of cubics.

For a0 < 0 and a1, a2 in the open left half-plane,

    1 / ((n - a0)(n - a1)(n - a2)) = integral_0^1 t^n w(t) dt,

where w is one of four closed forms depending on how a0, a1, a2 coincide.
The tensor moment alpha1 alpha2 / ((n + 1)(n - alpha1)(n - alpha2)) is the
case a0 = -1 scaled by alpha1 alpha2 = 6/P.

Everything here is evaluated in the variable u = -log t, which turns the
powers t^(-a-1) into exponentials e^((a+1)u) and (0, 1] into [0, inf).
"""
import logging
import os
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Tuple

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from cm_engine import Witness, WitnessKind
from errors import DomainError, QuadratureError
from moment_core import FIXED_ROOT, ModuleParams, RootBranch, roots_of
from numeric import (
    REAL_TOL,
    WORKING_DPS,
    check_index,
    compare,
    format_scalar,
    is_complex,
    real_context,
    to_complex,
    to_real,
)

logger = logging.getLogger(__name__)

QUAD_DPS = int(os.environ.get("BERGMAN_QUAD_DPS", 30))
QUAD_ATTEMPTS = int(os.environ.get("BERGMAN_QUAD_ATTEMPTS", 3))
QUAD_DEGREE = 6
POSITIVITY_SLACK = 1e-14
MAX_HORIZON = 2.0 ** 16


@dataclass(frozen=True)
class WeightSpec:
    """
    Parameters of w. For the complex case ``a1 = a + ib`` and ``a2`` its
    conjugate, with ``theta`` the principal argument of a1 - a0.
    """

    case_tag: RootBranch
    a0: Any
    a1: Any
    a2: Any
    scale: Any
    a: Optional[Any] = None
    b: Optional[Any] = None
    theta: Optional[Any] = None
    dps: int = WORKING_DPS

    @property
    def ctx(self):
        return real_context(self.dps)

    @property
    def max_real_part(self) -> Any:
        if self.case_tag is RootBranch.COMPLEX_PAIR:
            return max(self.a0, self.a)
        return max(self.a0, self.a1, self.a2)

    def at_precision(self, dps: int) -> "WeightSpec":
        ctx = real_context(dps)
        conv = lambda x: None if x is None else (to_complex(x, ctx) if is_complex(x) else to_real(x, ctx))  # noqa: E731
        return replace(self, a0=conv(self.a0), a1=conv(self.a1), a2=conv(self.a2), scale=conv(self.scale),
                       a=conv(self.a), b=conv(self.b), theta=conv(self.theta), dps=dps)


@dataclass(frozen=True)
class PositivityReport:
    min_value: Any
    argmin: Any
    points: int
    contradiction: bool

    @property
    def ok(self) -> bool:
        return not self.contradiction


def _same(x: Any, y: Any, tol: float) -> bool:
    return compare(x, y, tol)[0] == 0


def weight_build(a0: Any, a1: Any, a2: Any, scale: Any = 1, dps: int = WORKING_DPS,
                 tol: float = REAL_TOL) -> WeightSpec:
    """Pick the case of w from the coincidence structure of {a0, a1, a2}."""
    ctx = real_context(dps)
    if is_complex(a0):
        if a0.imag != 0:
            raise DomainError("hypothesis a0 in (-inf, 0) violated: a0 is not real")
        a0 = a0.real
    if not a0 < 0:
        raise DomainError(f"hypothesis a0 in (-inf, 0) violated: a0 = {format_scalar(a0)}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {format_scalar(scale)}")
    scale_r = to_real(scale, ctx)

    if (is_complex(a1) and a1.imag != 0) or (is_complex(a2) and a2.imag != 0):
        c1, c2 = to_complex(a1, ctx), to_complex(a2, ctx)
        if not ctx.almosteq(c1, ctx.conj(c2), rel_eps=tol):
            raise DomainError("a1 and a2 must both be real or form a conjugate pair")
        a, b = c1.real, abs(c1.imag)
        if not a < 0:
            raise DomainError(f"hypothesis a1, a2 in L_0 violated: Re(a1) = {format_scalar(a)} >= 0")
        a0r = to_real(a0, ctx)
        theta = ctx.atan2(b, a - a0r)
        return WeightSpec(RootBranch.COMPLEX_PAIR, a0r, ctx.mpc(a, b), ctx.mpc(a, -b), scale_r,
                          a=a, b=b, theta=theta, dps=dps)

    a1 = a1.real if is_complex(a1) else a1
    a2 = a2.real if is_complex(a2) else a2
    for name, value in (("a1", a1), ("a2", a2)):
        if not value < 0:
            raise DomainError(f"hypothesis a1, a2 in L_0 violated: {name} = {format_scalar(value)} >= 0")

    r = lambda x: to_real(x, ctx)  # noqa: E731
    eq01, eq02, eq12 = _same(a0, a1, tol), _same(a0, a2, tol), _same(a1, a2, tol)
    if eq01 and eq02:
        return WeightSpec(RootBranch.TRIPLE_ROOT, r(a0), r(a0), r(a0), scale_r, dps=dps)
    if eq01 or eq02 or eq12:
        double, single = (a1, a0) if eq12 and not eq01 else (a0, a2 if eq01 else a1)
        return WeightSpec(RootBranch.DOUBLE_REAL, r(double), r(double), r(single), scale_r, dps=dps)
    return WeightSpec(RootBranch.DISTINCT_REAL, r(a0), r(a1), r(a2), scale_r, dps=dps)


def weight_spec_of(params: ModuleParams) -> WeightSpec:
    """The density of the tensor moment sequence: a0 = -1, roots alpha1,2, scale 6/P."""
    roots = roots_of(params)
    try:
        spec = weight_build(FIXED_ROOT, roots.alpha1, roots.alpha2, 6 / params.prod_p,
                            dps=params.dps, tol=params.tol)
    except DomainError as exc:
        raise DomainError(f"no representing density for {params.label()}: {exc}") from exc
    if spec.case_tag is RootBranch.COMPLEX_PAIR:
        ctx = spec.ctx
        # arg(a1 - a0) and arg(a + 1 + ib) must coincide when a0 = -1
        assert ctx.almosteq(spec.theta, ctx.arg(ctx.mpc(spec.a + 1, spec.b))), "theta conventions disagree"
    return spec


def _coefficient_bound(spec: WeightSpec) -> Any:
    """C with |w(e^-u)| <= scale * C * (1 + u)^2 * e^((rho + 1) u), rho the largest real part."""
    if spec.case_tag is RootBranch.DISTINCT_REAL:
        a = (spec.a0, spec.a1, spec.a2)
        return sum(1 / abs((a[i] - a[(i + 1) % 3]) * (a[i] - a[(i + 2) % 3])) for i in range(3))
    if spec.case_tag is RootBranch.DOUBLE_REAL:
        d = abs(spec.a0 - spec.a2)
        return 2 / d ** 2 + 1 / d
    if spec.case_tag is RootBranch.TRIPLE_ROOT:
        return spec.ctx.mpf(1) / 2
    r = spec.ctx.sqrt((spec.a0 - spec.a) ** 2 + spec.b ** 2)
    return (1 + r / spec.b) / r ** 2


def _weight_in_u(spec: WeightSpec, u: Any) -> Any:
    """w(e^-u) including the scale factor."""
    ctx = spec.ctx
    e = lambda x: ctx.exp((x + 1) * u)  # noqa: E731
    tag = spec.case_tag
    if tag is RootBranch.DISTINCT_REAL:
        a0, a1, a2 = spec.a0, spec.a1, spec.a2
        w = e(a0) / ((a0 - a1) * (a0 - a2)) + e(a1) / ((a1 - a0) * (a1 - a2)) + e(a2) / ((a2 - a0) * (a2 - a1))
    elif tag is RootBranch.DOUBLE_REAL:
        d = spec.a0 - spec.a2
        w = (e(spec.a2) - e(spec.a0)) / d ** 2 + u * e(spec.a0) / d
    elif tag is RootBranch.TRIPLE_ROOT:
        w = e(spec.a0) * u * u / 2
    else:
        r2 = (spec.a0 - spec.a) ** 2 + spec.b ** 2
        w = (e(spec.a0) - ctx.sqrt(r2) / spec.b * e(spec.a) * ctx.sin(spec.theta - spec.b * u)) / r2
    return spec.scale * w


def weight_eval(spec: WeightSpec, t: Any) -> Any:
    """scale * w(t) for 0 < t <= 1."""
    ctx = spec.ctx
    t = to_real(t, ctx)
    if not 0 < t <= 1:
        raise DomainError(f"t must lie in (0, 1], got {format_scalar(t)}")
    return _weight_in_u(spec, -ctx.log(t))


def closed_form_moment(spec: WeightSpec, n: int) -> Any:
    """scale / ((n - a0)(n - a1)(n - a2)); at n = 0 this is the total mass of w."""
    check_index(n)
    if spec.case_tag is RootBranch.COMPLEX_PAIR:
        return spec.scale / ((n - spec.a0) * ((n - spec.a) ** 2 + spec.b ** 2))
    return spec.scale / ((n - spec.a0) * (n - spec.a1) * (n - spec.a2))


def _tail(spec: WeightSpec, n: int, horizon: Any) -> Any:
    ctx = spec.ctx
    kappa = n - spec.max_real_part
    h1 = 1 + horizon
    poly = h1 ** 2 / kappa + 2 * h1 / kappa ** 2 + 2 / kappa ** 3
    return spec.scale * _coefficient_bound(spec) * ctx.exp(-kappa * horizon) * poly


def _oscillation_end(spec: WeightSpec) -> Any:
    """u beyond which the sine term of w is below the working precision relative to e^((a0+1)u)."""
    ctx = spec.ctx
    if spec.case_tag is not RootBranch.COMPLEX_PAIR:
        return ctx.mpf(0)
    gap = spec.a0 - spec.a
    if gap <= 0:
        return ctx.inf
    r = ctx.sqrt(gap ** 2 + spec.b ** 2)
    return (spec.dps * ctx.ln10 + ctx.log(r / spec.b)) / gap


def _panels(spec: WeightSpec, horizon: Any) -> List[Any]:
    """Half-periods of the sine term while it matters, then panels doubling in width."""
    ctx = spec.ctx
    width = ctx.mpf(4)
    if spec.case_tag is RootBranch.COMPLEX_PAIR:
        width = min(width, ctx.pi / spec.b)
    oscillating = _oscillation_end(spec)
    points = [ctx.mpf(0), ctx.mpf(1) / 2, ctx.mpf(1), ctx.mpf(2)]
    x = ctx.mpf(4)
    while x < horizon:
        points.append(x)
        x += width if x < oscillating else x
    points.append(horizon)
    return points


def _integrate(spec: WeightSpec, n: int, tol: float, degree: int) -> Tuple[Any, Any]:
    ctx = spec.ctx
    horizon = ctx.mpf(8)
    while _tail(spec, n, horizon) >= tol / 10:
        horizon *= 2
        if horizon > MAX_HORIZON:
            raise QuadratureError(None, _tail(spec, n, horizon), tol)
    integrand = lambda u: ctx.exp(-(n + 1) * u) * _weight_in_u(spec, u)  # noqa: E731
    value, error = ctx.quad(integrand, _panels(spec, horizon), error=True, maxdegree=degree)
    bound = error + _tail(spec, n, horizon)
    if bound > tol:
        raise QuadratureError(value, bound, tol)
    return value, bound


def _log_before_sleep(retry_state) -> None:
    exception = retry_state.outcome.exception() if retry_state.outcome else None
    logger.warning(
        "Quadrature retrying with higher degree after: %s (attempt %s/%s)",
        exception,
        retry_state.attempt_number,
        retry_state.retry_object.stop.max_attempt_number,
    )


def density_moment_quadrature(spec: WeightSpec, n: int, tol: float = 1e-10) -> Any:
    """
    integral_0^1 t^n w(t) dt = integral_0^inf e^(-(n+1)u) w(e^-u) du, on panels
    up to a horizon where the analytic exponential tail is below tol/10.
    Raises QuadratureError with the best estimate once the retries are spent.
    """
    check_index(n)
    if not tol > 0:
        raise DomainError("tol must be positive")
    quad_spec = spec.at_precision(QUAD_DPS)
    for attempt in Retrying(
        retry=retry_if_exception_type(QuadratureError),
        stop=stop_after_attempt(QUAD_ATTEMPTS),
        before_sleep=_log_before_sleep,
        reraise=True,
    ):
        with attempt:
            degree = QUAD_DEGREE + 2 * (attempt.retry_state.attempt_number - 1)
            value, _ = _integrate(quad_spec, n, tol, degree)
    return value


def sample_density(spec: WeightSpec, grid_density: int = 50, decades: int = 12) -> List[Tuple[Any, Any]]:
    """w on a log-uniform grid of (0, 1] with grid_density points per decade, ending at t = 1."""
    if grid_density < 1 or decades < 1:
        raise DomainError("grid_density and decades must be positive")
    grid = np.logspace(-decades, 0, decades * grid_density + 1)
    ctx = spec.ctx
    samples = []
    for t in grid:
        t_r = ctx.mpf(1) if t >= 1.0 else ctx.mpf(float(t))
        samples.append((t_r, weight_eval(spec, t_r)))
    return samples


def positivity_certificate(spec: WeightSpec, grid_density: int = 50, decades: int = 12) -> PositivityReport:
    samples = sample_density(spec, grid_density, decades)
    argmin, min_value = min(samples, key=lambda s: s[1])
    contradiction = min_value < -POSITIVITY_SLACK
    if contradiction:
        logger.error("Density of case %s is negative at t=%s (w=%s) although it was expected to be positive",
                     spec.case_tag.value, format_scalar(argmin, 10), format_scalar(min_value, 10))
    return PositivityReport(min_value, argmin, len(samples), contradiction)


def is_negative_near(spec: WeightSpec, t: Any, rel: float = 1e-3) -> bool:
    """w < 0 at t and at t (1 +- rel)."""
    ctx = spec.ctx
    points = [t, t * (1 - ctx.mpf(rel)), min(t * (1 + ctx.mpf(rel)), ctx.mpf(1))]
    return all(weight_eval(spec, p) < 0 for p in points)


def negativity_witness(spec: WeightSpec) -> Optional[Witness]:
    """
    A point where w < 0, or None when w is non-negative.

    With delta = a - a0 > 0 the points t_m = exp((2 m pi + pi/2 - theta) / b)
    sit on the crests of the sine term, and w(t_m) < 0 for every m <= -1.
    The largest t_m with t_m^delta < 1 / (2 sin theta) is returned. For
    delta <= 0 the density is non-negative and there is no witness.
    """
    if spec.case_tag is not RootBranch.COMPLEX_PAIR:
        raise DomainError(f"negativity witness needs a complex-pair density, got {spec.case_tag.value}")
    ctx = spec.ctx
    delta = spec.a - spec.a0
    if delta <= 0:
        return None
    theta, b = spec.theta, spec.b
    limit = (theta - ctx.pi / 2 - b * ctx.log(2 * ctx.sin(theta)) / delta) / (2 * ctx.pi)
    m = min(-1, int(ctx.ceil(limit)) - 1)
    t_m = ctx.exp((2 * m * ctx.pi + ctx.pi / 2 - theta) / b)
    value = weight_eval(spec, t_m)
    if value < 0:
        logger.debug("Density witness at m=%d: w(%s) = %s", m, format_scalar(t_m, 10), format_scalar(value, 10))
        return Witness(WitnessKind.NEGATIVE_DENSITY, value, t=t_m, certified=_certified_negative(spec, t_m, value))
    logger.warning("Crest point m=%d gave w=%s; falling back to a sign scan", m, format_scalar(value, 10))
    return _scan_for_negative(spec)


def _scan_for_negative(spec: WeightSpec) -> Optional[Witness]:
    samples = sample_density(spec, grid_density=200, decades=40)
    t, value = min(samples, key=lambda s: s[1])
    if value < 0 and t < 1:
        return Witness(WitnessKind.NEGATIVE_DENSITY, value, t=t, certified=_certified_negative(spec, t, value))
    return None


def _certified_negative(spec: WeightSpec, t: Any, value: Any) -> bool:
    """w(t) is negative again at twice the digits and the two evaluations differ by less than |w(t)|."""
    check_spec = spec.at_precision(2 * spec.dps)
    check = weight_eval(check_spec, t)
    certified = check < 0 and abs(check - to_real(value, check_spec.ctx)) < abs(check)
    if not certified:
        logger.warning("Density witness at t=%s is not certified at %d digits", format_scalar(t, 10), check_spec.dps)
    return bool(certified)

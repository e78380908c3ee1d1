"""
Moment sequences of weighted Bergman modules and of their module tensor products.

The Bergman module with parameter s has moments 1/(sn+1). The module tensor
product of two of them has reciprocal moments given by the convolution
sum_k (s1 k + 1)(s2 (n-k) + 1), which factors as the cubic

    p(n) = (1/6)(n+1)(P n^2 + gamma n + 6),   gamma = 3S - P,

with S = s1 + s2 and P = s1 s2.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Tuple

from errors import DomainError
from numeric import (
    REAL_TOL,
    WORKING_DPS,
    Scalar,
    check_index,
    compare,
    coerce,
    format_scalar,
    is_exact,
    rational_sqrt,
    real_context,
    to_real,
)

logger = logging.getLogger(__name__)

FIXED_ROOT = Fraction(-1)


def _positive(value: Any, name: str) -> Scalar:
    scalar = coerce(value)
    if not scalar > 0:
        raise DomainError(f"{name} must be positive, got {format_scalar(scalar)}")
    return scalar


@dataclass(frozen=True)
class ModuleParams:
    """The pair (s1, s2); exact when both are rational, otherwise mpmath reals."""

    s1: Scalar
    s2: Scalar
    dps: int = WORKING_DPS
    tol: float = REAL_TOL

    def __post_init__(self) -> None:
        s1 = _positive(self.s1, "s1")
        s2 = _positive(self.s2, "s2")
        if not (is_exact(s1) and is_exact(s2)):
            ctx = real_context(self.dps)
            s1, s2 = to_real(s1, ctx), to_real(s2, ctx)
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)

    @classmethod
    def of(cls, s1: Any, s2: Any, mode: str = "auto", dps: int = WORKING_DPS) -> "ModuleParams":
        """Build params; ``mode="real"`` forces high-precision reals even for rationals."""
        if mode not in ("auto", "rational", "real"):
            raise DomainError(f"unknown numeric mode {mode!r}")
        params = cls(s1, s2, dps=dps)
        if mode == "real" and params.exact:
            ctx = real_context(dps)
            return cls(to_real(params.s1, ctx), to_real(params.s2, ctx), dps=dps)
        if mode == "rational" and not params.exact:
            raise DomainError("rational mode needs rational s1 and s2")
        return params

    def with_precision(self, dps: int) -> "ModuleParams":
        if self.exact:
            return self
        ctx = real_context(dps)
        return ModuleParams(to_real(self.s1, ctx), to_real(self.s2, ctx), dps=dps, tol=self.tol)

    @property
    def exact(self) -> bool:
        return is_exact(self.s1) and is_exact(self.s2)

    @property
    def mode(self) -> str:
        return "rational" if self.exact else "real"

    @property
    def ctx(self):
        return real_context(self.dps)

    @property
    def sum_s(self) -> Scalar:
        return self.s1 + self.s2

    @property
    def prod_p(self) -> Scalar:
        return self.s1 * self.s2

    @property
    def gamma(self) -> Scalar:
        return 3 * self.sum_s - self.prod_p

    @property
    def disc(self) -> Scalar:
        return self.gamma ** 2 - 24 * self.prod_p

    def swapped(self) -> "ModuleParams":
        return ModuleParams(self.s2, self.s1, dps=self.dps, tol=self.tol)

    def label(self) -> str:
        return f"({format_scalar(self.s1)}, {format_scalar(self.s2)})"


@dataclass(frozen=True)
class MomentValue:
    value: Scalar
    error_bound: Scalar = 0

    @property
    def exact(self) -> bool:
        return is_exact(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _moment(value: Scalar) -> MomentValue:
    if is_exact(value):
        return MomentValue(Fraction(value))
    ctx = value.context
    return MomentValue(value, abs(value) * ctx.mpf(10) ** (8 - ctx.dps))


def bergman_moment(s: Any, n: int) -> MomentValue:
    """||z^n||^2 = 1/(sn+1) in the weighted Bergman module with parameter s."""
    s = _positive(s, "s")
    check_index(n)
    return _moment(1 / (s * n + 1))


def tensor_moment_bruteforce(params: ModuleParams, n: int) -> MomentValue:
    """
    Reciprocal of the convolution sum, term by term. Independent oracle for the closed form.

    Rational parameters are put over one denominator d, so each term is the
    integer (k1 k + d)(k2 (n - k) + d) and a single Fraction is built at the end.
    """
    check_index(n)
    if params.exact:
        d = math.lcm(params.s1.denominator, params.s2.denominator)
        k1 = params.s1.numerator * (d // params.s1.denominator)
        k2 = params.s2.numerator * (d // params.s2.denominator)
        total = sum((k1 * k + d) * (k2 * (n - k) + d) for k in range(n + 1))
        return _moment(Fraction(d * d, total))
    total = sum((params.s1 * k + 1) * (params.s2 * (n - k) + 1) for k in range(n + 1))
    return _moment(1 / total)


def tensor_moment_closed(params: ModuleParams, n: int) -> MomentValue:
    check_index(n)
    return _moment(6 / ((n + 1) * (params.prod_p * n * n + params.gamma * n + 6)))


@dataclass(frozen=True)
class CubicData:
    """p(n) = (1/6)(n+1)(P n^2 + gamma n + 6), the reciprocal tensor moment."""

    prod_p: Scalar
    gamma: Scalar

    @property
    def quadratic(self) -> Tuple[Scalar, Scalar, Scalar]:
        return self.prod_p, self.gamma, 6

    @property
    def coefficients(self) -> Tuple[Scalar, ...]:
        """Coefficients of p from n^3 down to n^0."""
        p, g = self.prod_p, self.gamma
        one = Fraction(1) if is_exact(p) else p.context.mpf(1)
        return (p / 6, (p + g) / 6, (g + 6) / 6, one)

    @property
    def leading(self) -> Scalar:
        return self.prod_p / 6

    @property
    def scale(self) -> Scalar:
        """alpha1 * alpha2 = 6 / P."""
        return 6 / self.prod_p

    def __call__(self, n: Any) -> Any:
        return (n + 1) * (self.prod_p * n * n + self.gamma * n + 6) / 6


def cubic_of(params: ModuleParams) -> CubicData:
    return CubicData(prod_p=params.prod_p, gamma=params.gamma)


class RootBranch(str, Enum):
    DISTINCT_REAL = "DistinctReal"
    DOUBLE_REAL = "DoubleReal"
    TRIPLE_ROOT = "TripleRoot"
    COMPLEX_PAIR = "ComplexPair"


@dataclass(frozen=True)
class RootSet:
    """
    The roots {-1, alpha1, alpha2} of the analytic extension of p.

    ``gamma``, ``prod_p`` and ``disc`` are kept alongside the numeric roots so
    location questions can be answered exactly in rational mode even when the
    roots are irrational.
    """

    alpha1: Any
    alpha2: Any
    branch: RootBranch
    gamma: Scalar
    prod_p: Scalar
    disc: Scalar
    rational_roots: bool = False
    boundary_sensitive: bool = False
    fixed_root: Fraction = field(default=FIXED_ROOT)

    @property
    def exact(self) -> bool:
        return is_exact(self.gamma) and is_exact(self.prod_p)

    @property
    def a(self) -> Scalar:
        """Real part of alpha1 in the complex case; -gamma/(2P) exactly."""
        return -self.gamma / (2 * self.prod_p)

    @property
    def b(self) -> Optional[Any]:
        if self.branch is not RootBranch.COMPLEX_PAIR:
            return None
        return self.alpha1.imag

    @property
    def roots(self) -> Tuple[Any, Any, Any]:
        return self.fixed_root, self.alpha1, self.alpha2

    def roots_below(self, r: Scalar, tol: float = REAL_TOL) -> bool:
        """
        True when every root of the cubic has real part < r.

        alpha1 = (-gamma + sqrt(disc)) / (2P) is the largest. For irrational
        roots in rational mode the test sqrt(disc) < 2Pr + gamma is squared
        out so it stays exact.
        """
        if not self.fixed_root < r:
            return False
        if self.branch is RootBranch.COMPLEX_PAIR:
            top = self.a
        elif self.exact and not self.rational_roots:
            rhs = 2 * self.prod_p * r + self.gamma
            return rhs > 0 and self.disc < rhs * rhs
        else:
            top = self.alpha1
        return compare(top, r, tol)[0] < 0

    def vieta(self) -> Tuple[Any, Any]:
        """(alpha1 + alpha2, alpha1 * alpha2), to be compared with (-gamma/P, 6/P)."""
        return self.alpha1 + self.alpha2, self.alpha1 * self.alpha2


def roots_of(params: ModuleParams) -> RootSet:
    """
    Roots of p: -1 and alpha1,2 = (-gamma +- sqrt(gamma^2 - 24P)) / (2P).

    The discriminant sign is read exactly in rational mode. In real mode a
    discriminant within ``params.tol`` of zero (relative to gamma^2 and 24P)
    collapses to a double root and marks the set boundary-sensitive.
    """
    p, g, disc = params.prod_p, params.gamma, params.disc
    common = dict(gamma=g, prod_p=p, disc=disc)

    if params.exact:
        sign = (disc > 0) - (disc < 0)
        near_zero = False
    else:
        sign, near_zero = compare(g * g, 24 * p, params.tol)

    if sign == 0:
        alpha = -g / (2 * p)
        at_fixed, near_fixed = compare(alpha, FIXED_ROOT, params.tol)
        branch = RootBranch.TRIPLE_ROOT if at_fixed == 0 else RootBranch.DOUBLE_REAL
        if near_zero or near_fixed:
            logger.info("Collapsed near-double root for %s (boundary-sensitive)", params.label())
        return RootSet(alpha, alpha, branch, rational_roots=params.exact,
                       boundary_sensitive=near_zero or near_fixed, **common)

    if sign > 0:
        if params.exact:
            root = rational_sqrt(disc)
            if root is not None:
                return RootSet((-g + root) / (2 * p), (-g - root) / (2 * p), RootBranch.DISTINCT_REAL,
                               rational_roots=True, **common)
            ctx = real_context(params.dps)
            sq = ctx.sqrt(to_real(disc, ctx))
            gr, pr = to_real(g, ctx), to_real(p, ctx)
        else:
            ctx = params.ctx
            sq, gr, pr = ctx.sqrt(disc), g, p
        return RootSet((-gr + sq) / (2 * pr), (-gr - sq) / (2 * pr), RootBranch.DISTINCT_REAL, **common)

    ctx = params.ctx
    re = to_real(-g / (2 * p), ctx)
    im = ctx.sqrt(to_real(-disc, ctx)) / (2 * to_real(p, ctx))
    return RootSet(ctx.mpc(re, im), ctx.mpc(re, -im), RootBranch.COMPLEX_PAIR, **common)

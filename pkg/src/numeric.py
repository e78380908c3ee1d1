"""
Scalars in two numeric modes.

Rational mode uses :class:`fractions.Fraction` and decides every sign exactly.
Real mode uses mpmath numbers living in a private ``MPContext`` so that the
precision of one computation never leaks into another.
"""
import math
import os
import re
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Tuple, Union

import mpmath

from errors import DomainError, ParseError

# --------------------------------------------
# Configurable constants
# --------------------------------------------
WORKING_DPS = max(50, int(os.environ.get("BERGMAN_WORKING_DPS", 60)))
MAX_DPS = int(os.environ.get("BERGMAN_MAX_DPS", 480))
REAL_TOL = float(os.environ.get("BERGMAN_REAL_TOL", 1e-12))
MAX_INDEX = 2**32

Real = Any  # an mpf bound to some MPContext
Scalar = Union[Fraction, Real]

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


@lru_cache(maxsize=None)
def real_context(dps: int = WORKING_DPS) -> mpmath.MPContext:
    """Return a private mpmath context working at ``dps`` decimal digits."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


def context_of(*values: Any) -> mpmath.MPContext:
    """The context of the first mpmath operand, else the working-precision context."""
    for value in values:
        ctx = getattr(value, "context", None)
        if isinstance(ctx, mpmath.MPContext):
            return ctx
    return real_context()


def is_exact(x: Any) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def is_complex(x: Any) -> bool:
    return isinstance(x, complex) or hasattr(x, "_mpc_")


def parse_scalar(text: str, field: str = "value") -> Fraction:
    """Parse ``15``, ``3/2``, ``1.5`` or ``2.5e-1`` exactly; decimals become rationals."""
    cleaned = str(text).strip()
    if not (_DECIMAL.match(cleaned) or _RATIO.match(cleaned)):
        raise ParseError(field, cleaned)
    try:
        value = Fraction(cleaned.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(field, cleaned) from exc
    return value


def coerce(x: Any) -> Scalar:
    """Keep ints and Fractions exact; everything else becomes a working-precision real."""
    if isinstance(x, bool):
        raise DomainError(f"boolean {x!r} is not a scalar")
    if is_exact(x):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if is_complex(x):
        raise DomainError(f"{x!r} is not real")
    return to_real(x)


def to_real(x: Any, ctx: Optional[mpmath.MPContext] = None) -> Real:
    ctx = ctx or real_context()
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    return ctx.mpf(x)


def to_complex(x: Any, ctx: Optional[mpmath.MPContext] = None) -> Any:
    ctx = ctx or real_context()
    if isinstance(x, Fraction):
        return ctx.mpc(to_real(x, ctx))
    if is_complex(x):
        return ctx.mpc(x.real, x.imag)
    return ctx.mpc(x)


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None when it is irrational."""
    if q < 0:
        return None
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


def check_index(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        raise DomainError(f"{name} must be an integer, got {n!r}")
    if n < 0:
        raise DomainError(f"{name} must be non-negative, got {n}")
    if n > MAX_INDEX:
        raise DomainError(f"{name}={n} exceeds the index bound 2^32")
    return n


def compare(lhs: Scalar, rhs: Scalar, tol: float = REAL_TOL) -> Tuple[int, bool]:
    """
    Three-way comparison returning ``(sign, within_tol)``.

    Exact operands compare exactly. Real operands whose difference is below
    ``tol`` relative to the larger magnitude compare equal and set the flag.
    """
    if is_exact(lhs) and is_exact(rhs):
        diff = Fraction(lhs) - Fraction(rhs)
        return (diff > 0) - (diff < 0), False
    ctx = context_of(lhs, rhs)
    lhs, rhs = to_real(lhs, ctx), to_real(rhs, ctx)
    diff = lhs - rhs
    scale = max(abs(lhs), abs(rhs), 1)
    if abs(diff) <= tol * scale:
        return 0, True
    return (1 if diff > 0 else -1), False


def format_scalar(x: Any, digits: int = 20) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if is_complex(x):
        re_part, im_part = x.real, x.imag
        sign = "-" if im_part < 0 else "+"
        return f"{format_scalar(re_part, digits)}{sign}{format_scalar(abs(im_part), digits)}i"
    return mpmath.nstr(x, digits)

"""
Finite differences of moment sequences.

D_m(n) = sum_{j=0}^{m} (-1)^j C(m, j) phi(n + j). A positive sequence is a
Hausdorff moment sequence exactly when every D_m(n) is non-negative.

In rational mode the moments phi(0..N) are brought over one common
denominator so the whole Pascal table is integer subtraction and every sign is
exact. In real mode each entry carries the bound 2^m * eps * phi(n) on its
rounding error; an entry whose magnitude does not clear the bound raises
PrecisionError instead of guessing a sign.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

from errors import DomainError, PrecisionError
from moment_core import ModuleParams, tensor_moment_closed
from numeric import Scalar, check_index, format_scalar, is_exact

logger = logging.getLogger(__name__)

MomentSequence = Callable[[int], Scalar]


class WitnessKind(str, Enum):
    NEGATIVE_DIFFERENCE = "NegativeDifference"
    NEGATIVE_DENSITY = "NegativeDensity"


@dataclass(frozen=True)
class Witness:
    """
    An obstruction to complete monotonicity. Difference witnesses are exact or
    clear their rounding bound; density witnesses carry ``certified=False`` when
    the sign did not survive a recheck at twice the digits.
    """

    kind: WitnessKind
    value: Scalar
    m: Optional[int] = None
    n: Optional[int] = None
    t: Optional[Any] = None
    certified: bool = True

    def __post_init__(self) -> None:
        if not self.value < 0:
            raise DomainError(f"witness value must be negative, got {format_scalar(self.value)}")
        if self.kind is WitnessKind.NEGATIVE_DIFFERENCE:
            if self.m is None or self.n is None or self.m < 0 or self.n < 0:
                raise DomainError("difference witness needs non-negative (m, n)")
        elif self.t is None or not 0 < self.t < 1:
            raise DomainError("density witness needs t in (0, 1)")

    def summary(self) -> str:
        if self.kind is WitnessKind.NEGATIVE_DIFFERENCE:
            return f"D_{self.m}({self.n}) = {format_scalar(self.value, 12)} < 0"
        return f"w({format_scalar(self.t, 12)}) = {format_scalar(self.value, 12)} < 0"


def finite_difference(phi: MomentSequence, m: int, n: int) -> Scalar:
    """
    Alternating binomial sum of phi at offset n. Binomials are updated in
    place, C(m, j+1) = C(m, j) (m - j) / (j + 1).
    """
    check_index(m, "m")
    check_index(n, "n")
    coeff = 1
    total: Any = 0
    magnitude: Any = 0
    for j in range(m + 1):
        value = phi(n + j)
        total += coeff * value if j % 2 == 0 else -coeff * value
        magnitude += coeff * abs(value)
        coeff = coeff * (m - j) // (j + 1)
    if is_exact(total):
        return Fraction(total)
    _certify(total, magnitude, m, n)
    return total


def _unit_roundoff(value: Any) -> Any:
    ctx = getattr(value, "context", None)
    if ctx is None:
        return 2.0 ** -52
    return ctx.mpf(2) ** (-ctx.prec + 1)


def _certify(value: Any, magnitude: Any, m: int, n: int) -> None:
    """Raise unless |value| clears the accumulated rounding bound."""
    bound = 4 * (m + 1) * _unit_roundoff(value) * magnitude
    if value != 0 and abs(value) > bound:
        return
    dps = getattr(getattr(value, "context", None), "dps", None)
    raise PrecisionError(f"sign of D_{m}({n}) not certified (|value| <= {format_scalar(bound, 6)})", dps)


def _moment_values(params: ModuleParams, count: int) -> Tuple[List[Any], int]:
    """phi(0..count-1) as integer numerators over one denominator (rational) or as reals."""
    values = [tensor_moment_closed(params, n).value for n in range(count)]
    if not params.exact:
        return values, 1
    denominator = math.lcm(*(v.denominator for v in values))
    return [v.numerator * (denominator // v.denominator) for v in values], denominator


def _rows(params: ModuleParams, m_max: int, n_max: int) -> Iterator[Tuple[int, List[Any], List[Any], int]]:
    """
    Yield (m, row, error_bounds, denominator) for m = 0..m_max, each row of
    length n_max + m_max - m + 1 so the next row follows by
    D_{m+1}(n) = D_m(n) - D_m(n+1).
    """
    row, denominator = _moment_values(params, n_max + m_max + 1)
    bounds: List[Any] = [0] * len(row)
    if not params.exact:
        eps = _unit_roundoff(row[0])
        bounds = [eps * v for v in row]
    for m in range(m_max + 1):
        yield m, row, bounds, denominator
        row = [row[i] - row[i + 1] for i in range(len(row) - 1)]
        if not params.exact:
            eps = _unit_roundoff(row[0]) if row else 0
            bounds = [bounds[i] + bounds[i + 1] + eps * abs(row[i]) for i in range(len(row))]


def _check_bounds(m_max: int, n_max: int) -> None:
    check_index(m_max, "m_max")
    check_index(n_max, "n_max")


def _entry(value: Any, denominator: int) -> Scalar:
    return Fraction(value, denominator) if denominator != 1 or isinstance(value, int) else value


def _first_negative(params: ModuleParams, m_max: int, n_max: int) -> Optional[Witness]:
    for m, row, bounds, denominator in _rows(params, m_max, n_max):
        for n in range(n_max + 1):
            value = row[n]
            if not params.exact and abs(value) <= bounds[n]:
                raise PrecisionError(f"sign of D_{m}({n}) for {params.label()} not certified", params.dps)
            if value < 0:
                return Witness(WitnessKind.NEGATIVE_DIFFERENCE, _entry(value, denominator), m=m, n=n)
    return None


def is_completely_monotone_upto(params: ModuleParams, m_max: int, n_max: int) -> Optional[Witness]:
    """
    Lexicographically smallest (m, n) <= (m_max, n_max) with D_m(n) < 0, or None.

    None means "no witness within the caps", never "completely monotone".
    """
    _check_bounds(m_max, n_max)
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    witness = _first_negative(params, m_max, n_max)
    logger.debug("Difference scan of %s up to (%d, %d): %s", params.label(), m_max, n_max,
                 witness.summary() if witness else "none within caps")
    return witness


def smallest_failing_order(params: ModuleParams, m_cap: int, n_cap: int) -> Optional[int]:
    witness = is_completely_monotone_upto(params, m_cap, n_cap)
    return witness.m if witness else None


def is_m_hypercontractive(params: ModuleParams, m: int, n_cap: int) -> bool:
    """D_m(n) >= 0 for every n <= n_cap."""
    _check_bounds(m, n_cap)
    if params.exact:
        row, _ = _moment_values(params, n_cap + m + 1)
        coeffs = _binomial_row(m)
        return all(sum(c * row[n + j] for j, c in enumerate(coeffs)) >= 0 for n in range(n_cap + 1))
    phi = lambda k: tensor_moment_closed(params, k).value  # noqa: E731
    return all(finite_difference(phi, m, n) >= 0 for n in range(n_cap + 1))


def _binomial_row(m: int) -> List[int]:
    coeffs, c = [], 1
    for j in range(m + 1):
        coeffs.append(c if j % 2 == 0 else -c)
        c = c * (m - j) // (j + 1)
    return coeffs


@dataclass(frozen=True)
class DiffTable:
    """
    Materialised Pascal table. ``rows[m][n]`` holds D_m(n) times ``denominator``
    (exact integers in rational mode; reals with denominator 1 otherwise).
    """

    params: ModuleParams
    m_max: int
    n_max: int
    rows: Tuple[Tuple[Any, ...], ...]
    denominator: int = 1

    def __getitem__(self, key: Tuple[int, int]) -> Scalar:
        m, n = key
        if not (0 <= m <= self.m_max and 0 <= n < len(self.rows[m])):
            raise KeyError(key)
        return _entry(self.rows[m][n], self.denominator)

    def entries(self) -> Iterator[Tuple[Tuple[int, int], Scalar]]:
        for m in range(self.m_max + 1):
            for n in range(self.n_max + 1):
                yield (m, n), self[m, n]

    def first_negative(self) -> Optional[Tuple[int, int]]:
        for (m, n), value in self.entries():
            if value < 0:
                return m, n
        return None

    def pascal_consistent(self) -> bool:
        return all(
            self.rows[m + 1][n] == self.rows[m][n] - self.rows[m][n + 1]
            for m in range(self.m_max)
            for n in range(len(self.rows[m + 1]))
        )


def build_diff_table(params: ModuleParams, m_max: int, n_max: int) -> DiffTable:
    _check_bounds(m_max, n_max)
    rows: List[Sequence[Any]] = []
    denominator = 1
    for _, row, _, denominator in _rows(params, m_max, n_max):
        rows.append(tuple(row))
    return DiffTable(params, m_max, n_max, tuple(rows), denominator)

from typing import Any, Iterable, Optional


class BergmanError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BergmanError, ValueError):
    """An input lies outside the domain of the operation."""


class ParseError(DomainError):
    """A command-line scalar could not be parsed."""

    def __init__(self, field: str, text: str, reason: str = "not a positive rational or decimal") -> None:
        super().__init__(f"{field}: {text!r} is {reason}")
        self.field = field
        self.text = text


class PrecisionError(BergmanError, ArithmeticError):
    """The sign of a real-mode value could not be certified within the digit budget."""

    def __init__(self, message: str, dps: Optional[int] = None) -> None:
        hint = " (raise BERGMAN_MAX_DPS or use --mode rational)"
        super().__init__(f"{message} at {dps} digits{hint}" if dps else message + hint)
        self.dps = dps


class QuadratureError(BergmanError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, estimate: Any, bound: Any, tol: Any) -> None:
        super().__init__(f"quadrature estimate {estimate} has error bound {bound} > tol {tol}")
        self.estimate = estimate
        self.bound = bound
        self.tol = tol


class VerificationMismatch(BergmanError):
    """Recomputed reference facts disagree with the stored golden file."""

    def __init__(self, cases: Iterable[str], detail: str = "") -> None:
        self.cases = list(cases)
        super().__init__(f"golden mismatch in {', '.join(self.cases)}" + (f": {detail}" if detail else ""))


class GoldenMissing(BergmanError, FileNotFoundError):
    """The golden file has not been bootstrapped yet."""

    def __init__(self, path: str) -> None:
        super().__init__(f"golden file {path} not found; run `python app.py golden --bootstrap` first")
        self.path = path

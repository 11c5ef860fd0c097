"""Exception types raised by the solvers."""

from __future__ import annotations


class SolverError(RuntimeError):
    """Base class for numerical failures; carries the offending ``b``."""

    def __init__(self, message: str, b: float | None = None):
        super().__init__(message)
        self.b = b

    def __str__(self):
        base = super().__str__()
        return base if self.b is None else f"{base} (b={self.b!r})"


class NonConvergence(SolverError):
    pass


class SignChange(SolverError):
    pass


class UnderResolved(SolverError):
    def __init__(self, message: str, b: float | None = None, tail: float = float("nan")):
        super().__init__(message, b)
        self.tail = tail


class NoInteriorMax(SolverError):
    pass


class Indeterminate(SolverError):
    pass


class InnerDivergenceError(SolverError):
    """Raised by experiments when a time integration failed numerically."""


class ProfileFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

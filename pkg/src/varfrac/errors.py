"""Exception hierarchy with the exit codes used by the command line."""

from __future__ import annotations

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class VarfracError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = EXIT_NUMERIC


class DomainError(VarfracError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class PoleError(DomainError):
    """Gamma or digamma evaluated at a non-positive integer."""


class NonConvergenceError(VarfracError):
    """A series hit its term cap before meeting the tolerance."""

    def __init__(self, message: str, partial: float, cap: int):
        super().__init__(f"{message} (partial sum {partial!r}, cap {cap})")
        self.partial = partial
        self.cap = cap


class QuadratureError(VarfracError):
    """The requested accuracy was not reached; carries the best attempt."""

    def __init__(self, message: str, value: float, estimate: float):
        super().__init__(f"{message} (value {value!r}, estimate {estimate:.3e})")
        self.value = value
        self.estimate = estimate


class SmoothnessError(VarfracError):
    """A derivative was requested beyond what the function can supply."""


class SpecError(VarfracError, ValueError):
    """Inconsistent operator or problem specification."""

    exit_code = EXIT_USAGE


class ParseError(VarfracError, ValueError):
    """Syntax error in a user expression; ``pos`` is a 0-based column."""

    exit_code = EXIT_USAGE

    def __init__(self, message: str, pos: int = -1, src: str = ""):
        where = f" at column {pos + 1}" if pos >= 0 else ""
        super().__init__(f"{message}{where}")
        self.pos = pos
        self.src = src


class InstabilityError(VarfracError):
    """A time integration produced values beyond the blow-up threshold."""


class SingularStepError(VarfracError):
    """A PDE step had a vanishing leading coefficient."""

"""Variable-order fractional operators, expansions and variational residual checks."""

from .errors import (
    DomainError,
    NonConvergenceError,
    ParseError,
    PoleError,
    QuadratureError,
    SpecError,
    VarfracError,
)
from .functions import OrderFn, ScalarFn
from .quad import QuadConfig

__all__ = [
    "DomainError",
    "NonConvergenceError",
    "OrderFn",
    "ParseError",
    "PoleError",
    "QuadConfig",
    "QuadratureError",
    "ScalarFn",
    "SpecError",
    "VarfracError",
]

__version__ = "0.1.0"

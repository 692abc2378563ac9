"""
Exceptions raised by the polariton package.

Every exception carries a short ``kind`` used by the command-line error handler
to build the ``error[<kind>]: <message>`` line.
"""

from typing import Any, Dict, Optional


class PolaritonError(Exception):
    """Base class for all model errors."""

    kind = "error"


class DomainError(PolaritonError, ValueError):
    """Inputs outside the domain of an operation."""

    kind = "domain"


class ContractViolation(PolaritonError):
    """A documented contract between caller and callee was broken."""

    kind = "contract"


class ConfigError(PolaritonError, ValueError):
    """Invalid run configuration or malformed input file."""

    kind = "config"


class InstabilityError(PolaritonError, ArithmeticError):
    """The dynamical matrix has complex eigenfrequencies."""

    kind = "instability"

    def __init__(self, message: str, omega_c: Optional[float] = None, max_imag: Optional[float] = None):
        super().__init__(message)
        self.omega_c = omega_c
        self.max_imag = max_imag


class NumericalError(PolaritonError, ArithmeticError):
    """A numerical routine failed (e.g. root bracketing)."""

    kind = "numerical"

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SweepError(PolaritonError):
    """Failure at one point of a sweep; names the grid index and value."""

    kind = "sweep"

    def __init__(self, message: str, index: int, value: float):
        super().__init__(message)
        self.index = index
        self.value = value

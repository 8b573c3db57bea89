"""
Exception hierarchy for the quantum reservoir simulator.

Every module raises a subclass of QrcError so callers (the harness in
particular) can catch simulator failures without swallowing programming
errors from elsewhere.
"""

from typing import Optional


class QrcError(Exception):
    """Base exception for all simulator errors."""
    pass


class DimensionMismatchError(QrcError):
    """Raised when matrix or vector dimensions are incompatible."""
    pass


class InvalidStateError(QrcError):
    """Raised when a density matrix violates trace, Hermiticity or positivity."""
    pass


class NonHermitianError(QrcError):
    """Raised when an operator that must be Hermitian is not."""
    pass


class InputRangeError(QrcError):
    """Raised when an input or parameter lies outside its allowed range."""
    pass


class IntegratorError(QrcError):
    """Raised when a time integrator leaves its tolerance band."""

    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message if step_index is None else f"{message} (step {step_index})")
        self.step_index = step_index


class ReadoutError(QrcError):
    """Raised when a linear readout cannot be trained or applied."""
    pass


class ShapeMismatchError(ReadoutError):
    """Raised when design matrix, weights and targets disagree in shape."""
    pass


class ConstantTargetError(ReadoutError):
    """Raised when a target has zero variance and cannot be normalized."""
    pass


class ConfigError(QrcError):
    """Raised for invalid or inconsistent experiment configuration."""
    pass


class ExportError(QrcError):
    """Raised when results cannot be written or read back."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message if path is None else f"{message}: {path}")
        self.path = path

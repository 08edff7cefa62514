"""Jerarquía de errores del paquete."""
from __future__ import annotations


class IterDistError(Exception):
    """Raíz de todos los errores propios."""


class DomainError(IterDistError, ValueError):
    """Parámetros o argumentos fuera del dominio de la operación."""


class UnsupportedDepthError(DomainError):
    """Profundidad de recursión de referencia no soportada."""


class NumericalError(IterDistError, RuntimeError):
    """Fallo numérico; `operation` nombra la operación que falló."""

    def __init__(self, message: str, operation: str = "") -> None:
        super().__init__(message)
        self.operation = operation


class QuadratureConvergenceError(NumericalError):
    def __init__(
        self,
        message: str,
        best_estimate: float,
        log_best_estimate: float,
        error_estimate: float,
        operation: str = "quadrature",
    ) -> None:
        super().__init__(message, operation)
        self.best_estimate = best_estimate
        self.log_best_estimate = log_best_estimate
        self.error_estimate = error_estimate


class MomentOverflowError(NumericalError):
    """El momento no es representable; solo existe su logaritmo."""

    def __init__(self, message: str, log_value: float, operation: str = "raw_moment") -> None:
        super().__init__(message, operation)
        self.log_value = log_value


class TailUnderflowError(NumericalError):
    def __init__(self, message: str, log_tail: float, operation: str = "failure_rate") -> None:
        super().__init__(message, operation)
        self.log_tail = log_tail


class ConvolutionResolutionError(NumericalError):
    def __init__(self, message: str, estimated_error: float, operation: str = "convolution") -> None:
        super().__init__(message, operation)
        self.estimated_error = estimated_error


class SamplingInversionError(NumericalError):
    def __init__(self, message: str, quantile: float, operation: str = "sample_iterated") -> None:
        super().__init__(message, operation)
        self.quantile = quantile


class IdentityViolationError(NumericalError):
    """Una identidad exacta (combinatoria) no se cumplió."""

from .adaptive import (
    IntegralResult,
    QuadratureConfig,
    integrate_finite,
    integrate_logspace,
    integrate_tail,
    leggauss_ab,
)

__all__ = [
    "IntegralResult",
    "QuadratureConfig",
    "integrate_finite",
    "integrate_logspace",
    "integrate_tail",
    "leggauss_ab",
]

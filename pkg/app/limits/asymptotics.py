"""Límites cuando s → ∞, aproximaciones de la transformada stop-loss y cotas."""
from __future__ import annotations

import math
from enum import Enum

from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy.special import gammaln

from ..core.distributions import DistributionSpec, Family
from ..errors import DomainError
from ..iterate import IterationIndex, stop_loss
from ..quadrature import QuadratureConfig

__all__ = [
    "LimitKind",
    "StopLossBracket",
    "limit_kind",
    "limit_tail",
    "stop_loss_approx_gamma",
    "weibull_tail_upper_bound",
    "weibull_stop_loss_bounds",
    "gamma_ratio_diagnostic",
    "stirling_ratio_asymptote",
]

_BRACKET_SLACK = 1e-12


class LimitKind(str, Enum):
    EXPONENTIAL = "exponential"
    DEGENERATE_ZERO = "degenerate_zero"
    DEGENERATE_ONE = "degenerate_one"


class StopLossBracket(BaseModel):
    """Cotas log de E(X-x)_+^s para Weibull de forma < 1 junto con el valor por cuadratura."""

    model_config = ConfigDict(frozen=True)

    shape: float
    s: int
    beta: float
    x: float
    log_lower: float
    log_upper: float
    log_value: float
    lower_holds: bool
    upper_holds: bool


def _positive(name: str, value: float) -> float:
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} debe ser positivo y finito ({name}={value})")
    return float(value)


def _nonnegative_x(x: float) -> float:
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"Se requiere x >= 0 (x={x})")
    return float(x)


def limit_kind(spec: DistributionSpec) -> LimitKind:
    if spec.family is Family.WEIBULL and spec.shape != 1.0:
        return LimitKind.DEGENERATE_ZERO if spec.shape > 1.0 else LimitKind.DEGENERATE_ONE  # type: ignore[operator]
    return LimitKind.EXPONENTIAL


def limit_tail(spec: DistributionSpec, x: float) -> float:
    """lim_{s→∞} T̄_s(x). Gamma(α, θ) → e^{-x/θ}; Weibull con forma > 1 → 0 (1 en x=0), < 1 → 1."""
    x = _nonnegative_x(x)
    kind = limit_kind(spec)
    if kind is LimitKind.DEGENERATE_ONE:
        return 1.0
    if kind is LimitKind.DEGENERATE_ZERO:
        return 1.0 if x == 0.0 else 0.0
    return math.exp(-x / spec.scale)


def stop_loss_approx_gamma(shape: float, scale: float, s: int | IterationIndex, x: float) -> float:
    """log de e^{-x/θ} θ^{s-1} Γ(α+s-1)/Γ(α) ≈ log E(X-x)_+^{s-1}; exacta para α = 1."""
    shape = _positive("shape", shape)
    scale = _positive("scale", scale)
    s = IterationIndex.of(s).s
    x = _nonnegative_x(x)
    return float(-x / scale + (s - 1) * math.log(scale) + gammaln(shape + s - 1) - gammaln(shape))


def weibull_tail_upper_bound(shape: float, s: int | IterationIndex, x: float, *, nested_factorial: bool = True) -> float:
    """log de (s-1)! e^{-x^α} / (E X^{s-1} α^{s-1} x^{(s-1)(α-1)}), cota de T̄_s(x) para Weibull(α, 1), α > 1.

    La integral anidada (s-1) veces de F̄ vale E(X-x)_+^{s-1}/(s-1)!, de ahí el
    factorial. Con `nested_factorial=False` se devuelve la expresión sin él, que
    solo es cota en s = 2 y se conserva como diagnóstico.
    """
    shape = _positive("shape", shape)
    if shape <= 1.0:
        raise DomainError(f"La cota superior requiere forma > 1 (shape={shape})")
    s = IterationIndex.of(s).s
    if s < 2:
        raise DomainError(f"La cota superior requiere s >= 2 (s={s})")
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"La cota superior requiere x > 0 (x={x})")
    r = s - 1
    log_bound = -(x**shape) - r * math.log(shape) - r * (shape - 1.0) * math.log(x) - gammaln(1.0 + r / shape)
    if nested_factorial:
        log_bound += gammaln(s)
    return float(log_bound)


def weibull_stop_loss_bounds(
    shape: float,
    s: int | IterationIndex,
    beta: float,
    x: float,
    config: QuadratureConfig | None = None,
) -> StopLossBracket:
    """e^{-βx} Γ(1+s/α) <= E(X-x)_+^s <= Γ(1+s/α) para Weibull(α, 1), α < 1.

    La cota superior vale siempre; la inferior solo a partir de algún s₀ que
    depende de β, así que se contrasta con la cuadratura y se marca si falla.
    """
    shape = _positive("shape", shape)
    if shape >= 1.0:
        raise DomainError(f"Las cotas requieren forma < 1 (shape={shape})")
    s = IterationIndex.of(s).s
    beta = _positive("beta", beta)
    x = _nonnegative_x(x)

    log_upper = float(gammaln(1.0 + s / shape))
    log_lower = -beta * x + log_upper
    log_value = stop_loss(DistributionSpec.weibull(shape), x, s, config)
    bracket = StopLossBracket(
        shape=shape,
        s=s,
        beta=beta,
        x=x,
        log_lower=log_lower,
        log_upper=log_upper,
        log_value=log_value,
        lower_holds=log_value >= log_lower - _BRACKET_SLACK,
        upper_holds=log_value <= log_upper + _BRACKET_SLACK,
    )
    if not bracket.lower_holds:
        logger.warning(
            "Cota inferior violada para forma={}, s={}, β={}, x={}: log valor {:.6g} < {:.6g}",
            shape,
            s,
            beta,
            x,
            log_value,
            log_lower,
        )
    return bracket


def gamma_ratio_diagnostic(shape: float, s: int | IterationIndex) -> float:
    """A(s) = s Γ(1+(s-1)/α) / Γ(1+s/α)."""
    shape = _positive("shape", shape)
    s = IterationIndex.of(s).s
    if s < 2:
        raise DomainError(f"A(s) requiere s >= 2 (s={s})")
    return math.exp(math.log(s) + gammaln(1.0 + (s - 1) / shape) - gammaln(1.0 + s / shape))


def stirling_ratio_asymptote(shape: float, s: int | IterationIndex) -> float:
    """Asíntota α^{1/α} s^{1-1/α} de A(s)."""
    shape = _positive("shape", shape)
    s = IterationIndex.of(s).s
    return math.exp(math.log(shape) / shape + (1.0 - 1.0 / shape) * math.log(s))

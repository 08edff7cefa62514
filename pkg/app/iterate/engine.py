"""Motor de distribuciones s-iteradas: colas, densidades y momentos.

La cola s-iterada se obtiene de la transformada stop-loss de orden s-1,
T̄_s(x) = E(X-x)_+^{s-1} / E X^{s-1}. Para la Gamma de forma entera existe una
forma cerrada por expansión binomial; en los demás casos la transformada se
integra en espacio log.
"""
from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.special import gammaln, logsumexp, xlogy

from ..core.distributions import (
    TAIL_UNDERFLOW,
    DistributionSpec,
    Family,
    log_density,
    log_raw_moment,
    log_tail,
)
from ..core.special import LOG_FLOAT_MAX, log_binomial
from ..errors import DomainError, MomentOverflowError
from ..quadrature import QuadratureConfig, integrate_logspace

__all__ = [
    "IterationIndex",
    "EvaluationMethod",
    "IteratedEvaluation",
    "stop_loss",
    "log_iterated_tail",
    "iterated_tail",
    "evaluate_iterated_tail",
    "iterated_tail_gamma_closed",
    "log_iterated_tail_gamma_closed",
    "iterated_density",
    "iterated_mean",
    "iterated_moment",
    "iterated_variance",
    "gamma_shape_step_identity",
]

_LOG_TAIL_UNDERFLOW = math.log(TAIL_UNDERFLOW)


class IterationIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: int = Field(ge=1)

    @classmethod
    def of(cls, s: int | "IterationIndex") -> "IterationIndex":
        if isinstance(s, IterationIndex):
            return s
        if isinstance(s, bool) or not isinstance(s, (int, np.integer)):
            raise DomainError(f"El índice de iteración debe ser entero (s={s!r})")
        try:
            return cls(s=int(s))
        except ValidationError as exc:
            raise DomainError(f"El índice de iteración debe ser >= 1 (s={s})") from exc


class EvaluationMethod(str, Enum):
    BASE_DISTRIBUTION = "base_distribution"
    CLOSED_FORM_GAMMA = "closed_form_gamma"
    STOP_LOSS_QUADRATURE = "stop_loss_quadrature"
    REFERENCE_RECURSION = "reference_recursion"


class IteratedEvaluation(BaseModel):
    """Valor de cola iterada; por debajo de 1e-300 solo `log_value` es significativo y `value` es 0."""

    model_config = ConfigDict(frozen=True)

    spec: DistributionSpec
    s: IterationIndex
    method: EvaluationMethod
    value: float = Field(ge=0.0, le=1.0)
    log_value: float = Field(le=0.0)


def _index(s: int | IterationIndex, minimum: int = 1) -> int:
    value = IterationIndex.of(s).s
    if value < minimum:
        raise DomainError(f"La operación requiere s >= {minimum} (s={value})")
    return value


def _check_x(x: float) -> float:
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"Se requiere x finito y >= 0 (x={x})")
    return float(x)


def _is_own_iterate(spec: DistributionSpec) -> bool:
    # la exponencial (y Erlang(1)) es punto fijo de la iteración
    return spec.family is Family.EXPONENTIAL or bool(spec.integer_shape and spec.shape == 1)


# --- Transformada stop-loss ---


def _log_stop_loss_integer_gamma(shape: int, z: float, order: int) -> float:
    """log E(Y-z)_+^order para Y ~ Gamma(shape, 1), shape entero."""
    k = np.arange(shape, dtype=np.float64)
    terms = gammaln(order + shape - k) - gammaln(shape - k) - gammaln(k + 1.0) + xlogy(k, z)
    return float(-z + logsumexp(terms))


@lru_cache(maxsize=8192)
def _log_stop_loss_quadrature(unit: DistributionSpec, z: float, order: int, config: QuadratureConfig) -> float:
    def log_integrand(t: np.ndarray) -> np.ndarray:
        return xlogy(order, t - z) + log_density(unit, t)

    return integrate_logspace(log_integrand, z, unit, config).log_value


def stop_loss(
    spec: DistributionSpec,
    x: float,
    order: int,
    config: QuadratureConfig | None = None,
) -> float:
    """log E(X-x)_+^order."""
    x = _check_x(x)
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)) or order < 0:
        raise DomainError(f"El orden stop-loss debe ser un entero >= 0 (order={order!r})")
    order = int(order)
    if order == 0:
        return float(log_tail(spec, x))
    if x == 0.0:
        return log_raw_moment(spec, order)
    # E(X-x)_+^r = θ^r E(Y - x/θ)_+^r con Y a escala unitaria
    log_scale = order * math.log(spec.scale)
    z = x / spec.scale
    if spec.family is Family.EXPONENTIAL:
        return float(log_scale - z + gammaln(order + 1.0))
    if spec.integer_shape:
        return log_scale + _log_stop_loss_integer_gamma(int(spec.shape), z, order)  # type: ignore[arg-type]
    config = config or QuadratureConfig.from_settings()
    return log_scale + _log_stop_loss_quadrature(spec.unit_scale(), z, order, config)


# --- Colas iteradas ---


def log_iterated_tail_gamma_closed(shape: int, s: int | IterationIndex, x: float) -> float:
    if isinstance(shape, bool) or not isinstance(shape, (int, np.integer)) or shape < 2:
        raise DomainError(f"La forma cerrada requiere forma entera >= 2 (shape={shape!r})")
    s = _index(s, minimum=2)
    x = _check_x(x)
    shape = int(shape)
    log_norm = log_binomial(shape + s - 2, shape - 1)
    terms = [
        log_binomial(s + shape - ell - 2, shape - ell - 1) - log_norm + float(xlogy(ell, x)) - float(gammaln(ell + 1.0))
        for ell in range(shape)
    ]
    return min(0.0, -x + float(logsumexp(terms)))


def iterated_tail_gamma_closed(shape: int, s: int | IterationIndex, x: float) -> float:
    """Cola s-iterada de Gamma(shape, 1) con forma entera:
    e^{-x} Σ_{ℓ=0}^{α-1} C(s+α-ℓ-2, α-ℓ-1)/C(α+s-2, α-1) x^ℓ/ℓ!.
    """
    return math.exp(log_iterated_tail_gamma_closed(shape, s, x))


def _route(spec: DistributionSpec, s: int) -> EvaluationMethod:
    if s == 1 or _is_own_iterate(spec):
        return EvaluationMethod.BASE_DISTRIBUTION
    if spec.integer_shape:
        return EvaluationMethod.CLOSED_FORM_GAMMA
    return EvaluationMethod.STOP_LOSS_QUADRATURE


def log_iterated_tail(
    spec: DistributionSpec,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> float:
    s = _index(s)
    x = _check_x(x)
    if x == 0.0:
        return 0.0
    if s == 1:
        return float(log_tail(spec, x))
    z = x / spec.scale
    if _is_own_iterate(spec):
        return -z
    if spec.integer_shape:
        return log_iterated_tail_gamma_closed(int(spec.shape), s, z)  # type: ignore[arg-type]
    value = stop_loss(spec, x, s - 1, config) - log_raw_moment(spec, s - 1)
    return min(0.0, value)


def iterated_tail(
    spec: DistributionSpec,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> float:
    """T̄_s(x) = E(X-x)_+^{s-1} / E X^{s-1}; vale 1 en x = 0 y no crece con x."""
    return math.exp(log_iterated_tail(spec, s, x, config))


def evaluate_iterated_tail(
    spec: DistributionSpec,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> IteratedEvaluation:
    index = IterationIndex.of(s)
    log_value = log_iterated_tail(spec, index, x, config)
    value = math.exp(log_value) if log_value >= _LOG_TAIL_UNDERFLOW else 0.0
    if value == 0.0:
        logger.debug("Cola iterada bajo {:g} en x={}: solo se informa el logaritmo", TAIL_UNDERFLOW, x)
    return IteratedEvaluation(spec=spec, s=index, method=_route(spec, index.s), value=value, log_value=log_value)


def iterated_density(
    spec: DistributionSpec,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> float:
    """f_s(x) = (s-1) E(X-x)_+^{s-2} / E X^{s-1}."""
    s = _index(s, minimum=2)
    x = _check_x(x)
    if spec.family is Family.EXPONENTIAL:
        return spec.rate * math.exp(-x * spec.rate)
    log_value = math.log(s - 1) + stop_loss(spec, x, s - 2, config) - log_raw_moment(spec, s - 1)
    return math.exp(log_value)


# --- Momentos ---


def _exp_checked(log_value: float, label: str, operation: str) -> float:
    if log_value > LOG_FLOAT_MAX:
        raise MomentOverflowError(
            f"{label} no es representable (log = {log_value:.6g})", log_value=log_value, operation=operation
        )
    return math.exp(log_value)


def iterated_mean(spec: DistributionSpec, s: int | IterationIndex) -> float:
    """μ_s = E X^s / (s E X^{s-1})."""
    s = _index(s)
    log_value = log_raw_moment(spec, s) - log_raw_moment(spec, s - 1) - math.log(s)
    return _exp_checked(log_value, f"media iterada (s={s})", "iterated_mean")


def iterated_moment(spec: DistributionSpec, s: int | IterationIndex, m: int) -> float:
    """Momento de orden m del s-iterado: C(m+s-1, m)^{-1} E X^{m+s-1} / E X^{s-1}.

    En s = 1 el iterado es X y se devuelven sus momentos crudos.
    """
    s = _index(s)
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise DomainError(f"El orden del momento debe ser un entero >= 1 (m={m!r})")
    m = int(m)
    if s == 1:
        return _exp_checked(log_raw_moment(spec, m), f"E X^{m}", "iterated_moment")
    log_value = log_raw_moment(spec, m + s - 1) - log_raw_moment(spec, s - 1) - log_binomial(m + s - 1, m)
    return _exp_checked(log_value, f"momento iterado (s={s}, m={m})", "iterated_moment")


def iterated_variance(spec: DistributionSpec, s: int | IterationIndex) -> float:
    s = _index(s)
    mean = iterated_mean(spec, s)
    second = _exp_checked(
        math.log(2.0 / (s + 1)) + log_raw_moment(spec, s + 1) - log_raw_moment(spec, s),
        f"razón de momentos (s={s})",
        "iterated_variance",
    )
    return max(0.0, mean * (second - mean))


def gamma_shape_step_identity(
    shape: float,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> tuple[float, float]:
    """Ambos lados de T̄_{α+1,s+1} = s/(α+s) T̄_{α+1,s} + α/(α+s) T̄_{α,s+1} (Gamma de escala 1)."""
    s = _index(s)
    lower = DistributionSpec.gamma(shape)
    upper = DistributionSpec.gamma(shape + 1.0)
    lhs = iterated_tail(upper, s + 1, x, config)
    rhs = s / (shape + s) * iterated_tail(upper, s, x, config) + shape / (shape + s) * iterated_tail(
        lower, s + 1, x, config
    )
    return lhs, rhs

"""Cuadratura adaptativa global de Gauss–Legendre sobre [lower, ∞).

El rango se trunca en el cuantil `truncation_mass` de la distribución guía
(`decay_hint`) y se extiende por duplicación mientras el integrando en el corte
no sea despreciable. Cada panel se evalúa con la regla completa y con sus dos
mitades; la diferencia es la estimación de error y siempre se subdivide el
panel con mayor error. Todo el cálculo ocurre en espacio log.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.special import logsumexp

from ..config import get_settings
from ..core.distributions import DistributionSpec, Family, inverse_tail
from ..core.special import LOG_FLOAT_MAX
from ..errors import DomainError, QuadratureConvergenceError

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "leggauss_ab",
    "integrate_tail",
    "integrate_logspace",
    "integrate_finite",
]

Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]

_INITIAL_PANELS = 8
_MAX_EXTENSIONS = 64


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-10, gt=0, lt=1)
    abs_tol: float = Field(default=1e-12, gt=0, lt=1)
    max_panels: int = Field(default=4096, ge=8)
    truncation_mass: float = Field(default=1e-16, gt=0, lt=1)
    gauss_order: int = Field(default=20, ge=2, le=200)

    @classmethod
    def from_settings(cls, **overrides: float | int | None) -> "QuadratureConfig":
        """Valores de `Settings`; los overrides no nulos (flags de la CLI) tienen prioridad."""
        settings = get_settings()
        values = {
            "rel_tol": settings.quad_rel_tol,
            "abs_tol": settings.quad_abs_tol,
            "max_panels": settings.quad_max_panels,
            "truncation_mass": settings.quad_truncation_mass,
            "gauss_order": settings.quad_gauss_order,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except ValidationError as exc:
            raise DomainError(f"Configuración de cuadratura inválida: {exc.errors()[0]['msg']}") from exc


class IntegralResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    log_value: float
    error_estimate: float = Field(ge=0)
    panels_used: int

    @model_validator(mode="after")
    def validate_result(self) -> "IntegralResult":
        if self.value < 0:
            raise ValueError("Una integral de integrando no negativo no puede ser negativa")
        return self


@lru_cache(maxsize=16)
def _unit_rule(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = leggauss(order)
    return nodes, np.log(weights)


def leggauss_ab(n: int, a: float, b: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodos y pesos de Gauss–Legendre de orden n trasladados a [a, b]."""
    if not (b > a):
        raise DomainError(f"Intervalo vacío o invertido: [{a}, {b}]")
    nodes, weights = leggauss(n)
    half = 0.5 * (b - a)
    return half * nodes + 0.5 * (a + b), half * weights


def _log_abs_diff(a: float, b: float) -> float:
    """log|e^a - e^b|; -inf si ambas estimaciones coinciden en precisión de máquina."""
    if a == b:
        return -math.inf
    hi, lo = (a, b) if a > b else (b, a)
    # expm1 conserva la diferencia cuando lo y hi distan pocos ULP
    gap = -math.expm1(lo - hi)
    if gap <= 0.0:
        return -math.inf
    return hi + math.log(gap)


def _safe_exp(log_value: float) -> float:
    return math.exp(log_value) if log_value <= LOG_FLOAT_MAX else math.inf


class _Substitution:
    """t = offset + u**power; power = 1 es la identidad."""

    def __init__(self, offset: float, power: float) -> None:
        self.offset = offset
        self.power = power

    @classmethod
    def for_hint(cls, lower: float, decay_hint: DistributionSpec | None) -> "_Substitution":
        # colas e^{-x^α} con α < 1: u = (t - lower)^α reparte la masa y elimina la singularidad en 0
        if decay_hint is not None and decay_hint.family is not Family.EXPONENTIAL and decay_hint.effective_shape < 1.0:
            return cls(lower, 1.0 / decay_hint.effective_shape)
        return cls(lower, 1.0)

    def to_t(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.power == 1.0:
            return self.offset + u
        return self.offset + np.power(u, self.power)

    def to_u(self, t: float) -> float:
        return (t - self.offset) ** (1.0 / self.power)

    def log_jacobian(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.power == 1.0:
            return np.zeros_like(u)
        return math.log(self.power) + (self.power - 1.0) * np.log(u)


class _AdaptiveRun:
    def __init__(
        self,
        log_integrand: Integrand,
        substitution: _Substitution,
        config: QuadratureConfig,
        absolute_floor: bool,
    ) -> None:
        self._log_integrand = log_integrand
        self._sub = substitution
        self._config = config
        self._absolute_floor = absolute_floor
        self._nodes, self._log_weights = _unit_rule(config.gauss_order)
        capacity = config.max_panels + _INITIAL_PANELS
        self._a = np.empty(capacity)
        self._b = np.empty(capacity)
        self._lv = np.empty(capacity)
        self._le = np.empty(capacity)
        self.count = 0

    def log_integrand_at(self, u: float) -> float:
        arr = np.array([u])
        return float(self._log_integrand(self._sub.to_t(arr))[0] + self._sub.log_jacobian(arr)[0])

    def _log_panel(self, a: float, b: float) -> float:
        half = 0.5 * (b - a)
        u = half * self._nodes + 0.5 * (a + b)
        values = self._log_integrand(self._sub.to_t(u)) + self._sub.log_jacobian(u)
        if np.any(np.isnan(values)):
            raise DomainError(f"Integrando no definido en el panel [{a:.6g}, {b:.6g}]")
        with np.errstate(divide="ignore"):
            return float(logsumexp(self._log_weights + values)) + math.log(half)

    def _store(self, slot: int, a: float, b: float) -> None:
        whole = self._log_panel(a, b)
        mid = 0.5 * (a + b)
        refined = float(np.logaddexp(self._log_panel(a, mid), self._log_panel(mid, b)))
        self._a[slot], self._b[slot] = a, b
        self._lv[slot] = refined
        self._le[slot] = _log_abs_diff(whole, refined)

    def _append(self, a: float, b: float) -> None:
        if self.count >= len(self._a):
            self._fail("capacidad de paneles agotada")
        self._store(self.count, a, b)
        self.count += 1

    def add_segment(self, a: float, b: float) -> None:
        edges = np.linspace(a, b, _INITIAL_PANELS + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            self._append(float(lo), float(hi))

    def totals(self) -> tuple[float, float]:
        with np.errstate(divide="ignore"):
            return (
                float(logsumexp(self._lv[: self.count])),
                float(logsumexp(self._le[: self.count])),
            )

    def _converged(self, log_value: float, log_error: float) -> bool:
        if log_error == -math.inf:
            return True
        if log_error <= math.log(self._config.rel_tol) + log_value:
            return True
        return self._absolute_floor and log_error <= math.log(self._config.abs_tol)

    def refine(self) -> None:
        while True:
            log_value, log_error = self.totals()
            if self._converged(log_value, log_error):
                return
            if self.count >= self._config.max_panels:
                self._fail(f"tolerancia no alcanzada con {self.count} paneles")
            worst = int(np.argmax(self._le[: self.count]))
            a, b = self._a[worst], self._b[worst]
            mid = 0.5 * (a + b)
            self._store(worst, a, mid)
            self._append(mid, b)

    def _fail(self, reason: str) -> None:
        log_value, log_error = self.totals()
        raise QuadratureConvergenceError(
            f"Cuadratura sin convergencia: {reason}",
            best_estimate=_safe_exp(log_value),
            log_best_estimate=log_value,
            error_estimate=_safe_exp(log_error),
        )

    def result(self) -> IntegralResult:
        log_value, log_error = self.totals()
        return IntegralResult(
            value=_safe_exp(log_value),
            log_value=log_value,
            error_estimate=_safe_exp(log_error),
            panels_used=self.count,
        )


def _check_lower(lower: float) -> None:
    if not (math.isfinite(lower) and lower >= 0):
        raise DomainError(f"El límite inferior debe ser finito y >= 0 (lower={lower})")


def _integrate_semi_infinite(
    log_integrand: Integrand,
    lower: float,
    decay_hint: DistributionSpec,
    config: QuadratureConfig,
    absolute_floor: bool,
) -> IntegralResult:
    _check_lower(lower)
    sub = _Substitution.for_hint(lower, decay_hint)
    run = _AdaptiveRun(log_integrand, sub, config, absolute_floor)

    upper = lower + inverse_tail(decay_hint, config.truncation_mass)
    u_hi = sub.to_u(upper)
    run.add_segment(0.0, u_hi)
    log_mass = math.log(config.truncation_mass)
    for _ in range(_MAX_EXTENSIONS):
        run.refine()
        log_value, _ = run.totals()
        log_cut = run.log_integrand_at(u_hi) + math.log(u_hi)
        if log_cut <= log_mass + log_value:
            break
        upper = lower + 2.0 * (upper - lower)
        u_next = sub.to_u(upper)
        run.add_segment(u_hi, u_next)
        u_hi = u_next
    else:
        run._fail(f"el integrando no decae antes de t={upper:.6g}")

    result = run.result()
    logger.debug(
        "Cuadratura en [{:.6g}, ∞): {} paneles, corte en {:.6g}, log valor {:.12g}",
        lower,
        result.panels_used,
        upper,
        result.log_value,
    )
    return result


def _linear_to_log(integrand: Integrand) -> Integrand:
    def log_integrand(t: NDArray[np.float64]) -> NDArray[np.float64]:
        values = np.asarray(integrand(t), dtype=np.float64)
        if np.any(values < 0):
            raise DomainError("El integrando debe ser no negativo")
        with np.errstate(divide="ignore"):
            return np.log(values)

    return log_integrand


def integrate_tail(
    integrand: Integrand,
    lower: float,
    decay_hint: DistributionSpec,
    config: QuadratureConfig | None = None,
) -> IntegralResult:
    """∫_lower^∞ integrand; el integrando se evalúa vectorizado sobre arrays de nodos."""
    config = config or QuadratureConfig.from_settings()
    return _integrate_semi_infinite(_linear_to_log(integrand), lower, decay_hint, config, absolute_floor=True)


def integrate_logspace(
    log_integrand: Integrand,
    lower: float,
    decay_hint: DistributionSpec,
    config: QuadratureConfig | None = None,
) -> IntegralResult:
    """log ∫_lower^∞ exp(log_integrand); el criterio de parada es solo relativo."""
    config = config or QuadratureConfig.from_settings()
    return _integrate_semi_infinite(log_integrand, lower, decay_hint, config, absolute_floor=False)


def integrate_finite(
    integrand: Integrand,
    lower: float,
    upper: float,
    config: QuadratureConfig | None = None,
) -> IntegralResult:
    config = config or QuadratureConfig.from_settings()
    _check_lower(lower)
    if not (math.isfinite(upper) and upper >= lower):
        raise DomainError(f"Intervalo inválido: [{lower}, {upper}]")
    if upper == lower:
        return IntegralResult(value=0.0, log_value=-math.inf, error_estimate=0.0, panels_used=0)
    run = _AdaptiveRun(_linear_to_log(integrand), _Substitution(lower, 1.0), config, absolute_floor=True)
    run.add_segment(0.0, upper - lower)
    run.refine()
    return run.result()

"""Orden s-FR: X ≤_{s-FR} Y si T̄_{Y,s}/T̄_{X,s} no decrece en x.

Las comprobaciones son sobre rejillas finitas y tolerancia en el log-cociente;
el veredicto es evidencia numérica, no una demostración.
"""
from __future__ import annotations

import math
from typing import Iterable, List, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from ..config import get_settings
from ..core.distributions import TAIL_UNDERFLOW, DistributionSpec, Family
from ..core.distributions import failure_rate as base_failure_rate
from ..errors import DomainError, TailUnderflowError
from ..iterate import IterationIndex, log_iterated_tail, stop_loss
from ..quadrature import QuadratureConfig

__all__ = [
    "OrderCheckResult",
    "HeredityCheck",
    "sfr_check",
    "sfr_heredity_check",
    "iterated_failure_rate",
]

VERDICT = "numerical evidence"


class OrderCheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    spec_x: DistributionSpec
    spec_y: DistributionSpec
    s: IterationIndex
    grid: Tuple[float, ...]
    log_ratio_values: Tuple[float, ...]
    monotone_nondecreasing: bool
    max_violation: float
    tolerance: float
    dropped_points: int = 0
    verdict: str = VERDICT

    @model_validator(mode="after")
    def validate_result(self) -> "OrderCheckResult":
        if len(self.grid) != len(self.log_ratio_values):
            raise ValueError("Un log-cociente por punto de rejilla")
        if self.max_violation < 0:
            raise ValueError("max_violation debe ser no negativo")
        if self.monotone_nondecreasing != (self.max_violation <= self.tolerance):
            raise ValueError("monotone_nondecreasing debe coincidir con max_violation <= tolerance")
        return self

    @property
    def ratio_values(self) -> Tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_ratio_values)

    def csv_rows(self) -> List[tuple[float, float, int]]:
        """(x, log_ratio, monotone_flag); el flag marca si el paso desde el punto anterior no decrece."""
        rows = []
        previous = None
        for x, value in zip(self.grid, self.log_ratio_values):
            ok = previous is None or value - previous >= -self.tolerance
            rows.append((x, value, int(ok)))
            previous = value
        return rows


class HeredityCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    at_s: OrderCheckResult
    at_next: OrderCheckResult

    @property
    def implication_holds(self) -> bool:
        return (not self.at_s.monotone_nondecreasing) or self.at_next.monotone_nondecreasing


def _check_grid(grid: Iterable[float]) -> Tuple[float, ...]:
    points = tuple(float(x) for x in grid)
    if not points:
        raise DomainError("La rejilla no puede estar vacía")
    if any(not math.isfinite(x) or x < 0 for x in points):
        raise DomainError("La rejilla debe contener reales finitos no negativos")
    if any(b <= a for a, b in zip(points[:-1], points[1:])):
        raise DomainError("La rejilla debe ser estrictamente creciente")
    return points


def sfr_check(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec,
    s: int | IterationIndex,
    grid: Iterable[float],
    tol: float | None = None,
    config: QuadratureConfig | None = None,
) -> OrderCheckResult:
    settings = get_settings()
    index = IterationIndex.of(s)
    tol = settings.order_tolerance if tol is None else float(tol)
    if not (math.isfinite(tol) and tol > 0):
        raise DomainError(f"La tolerancia debe ser positiva (tol={tol})")
    points = _check_grid(grid)
    threshold = settings.underflow_log_threshold

    kept_x: list[float] = []
    kept_ratio: list[float] = []
    for x in points:
        log_x = log_iterated_tail(spec_x, index, x, config)
        log_y = log_iterated_tail(spec_y, index, x, config)
        if log_x < threshold or log_y < threshold:
            continue
        kept_x.append(x)
        kept_ratio.append(log_y - log_x)

    dropped = len(points) - len(kept_x)
    if dropped:
        logger.warning("{} puntos descartados por subdesbordamiento de la cola (log < {})", dropped, threshold)

    steps = np.diff(np.asarray(kept_ratio))
    max_violation = float(max(0.0, -steps.min())) if steps.size else 0.0
    result = OrderCheckResult(
        spec_x=spec_x,
        spec_y=spec_y,
        s=index,
        grid=tuple(kept_x),
        log_ratio_values=tuple(kept_ratio),
        monotone_nondecreasing=max_violation <= tol,
        max_violation=max_violation,
        tolerance=tol,
        dropped_points=dropped,
    )
    logger.debug(
        "s-FR {} vs {} (s={}): monótono={}, violación máxima {:.3g}",
        spec_x.describe(),
        spec_y.describe(),
        index.s,
        result.monotone_nondecreasing,
        max_violation,
    )
    return result


def sfr_heredity_check(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec,
    s: int | IterationIndex,
    grid: Iterable[float],
    tol: float | None = None,
    config: QuadratureConfig | None = None,
) -> HeredityCheck:
    """Comprobaciones en s y s+1: el orden en s debe heredarse a s+1."""
    index = IterationIndex.of(s)
    points = _check_grid(grid)
    outcome = HeredityCheck(
        at_s=sfr_check(spec_x, spec_y, index, points, tol, config),
        at_next=sfr_check(spec_x, spec_y, index.s + 1, points, tol, config),
    )
    if not outcome.implication_holds:
        logger.warning("Herencia del orden s-FR no observada en s={}", index.s)
    return outcome


def iterated_failure_rate(
    spec: DistributionSpec,
    s: int | IterationIndex,
    x: float,
    config: QuadratureConfig | None = None,
) -> float:
    """f_s(x)/T̄_s(x) = (s-1) E(X-x)_+^{s-2} / E(X-x)_+^{s-1}."""
    s = IterationIndex.of(s).s
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"Se requiere x > 0 (x={x})")
    if spec.family is Family.EXPONENTIAL:
        return spec.rate
    if s == 1:
        return base_failure_rate(spec, x)
    log_tail = log_iterated_tail(spec, s, x, config)
    if log_tail < math.log(TAIL_UNDERFLOW):
        raise TailUnderflowError(
            f"Cola iterada bajo {TAIL_UNDERFLOW:g} en x={x} (s={s})",
            log_tail=log_tail,
            operation="iterated_failure_rate",
        )
    return (s - 1) * math.exp(stop_loss(spec, x, s - 2, config) - stop_loss(spec, x, s - 1, config))

from __future__ import annotations

from typing import Iterable, List, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from ..core.distributions import DistributionSpec
from ..errors import DomainError
from ..iterate import iterated_tail
from ..quadrature import QuadratureConfig
from .asymptotics import LimitKind, limit_kind, limit_tail

__all__ = ["ConvergenceReport", "convergence_report", "geometric_s_values"]

# holgura al comprobar que la distancia no crece con s
_MONOTONE_SLACK = 1e-12


class ConvergenceReport(BaseModel):
    """Distancia uniforme sup_x |T̄_s(x) - lim T̄(x)| por cada s.

    `tail_at_sup` guarda T̄_s en el punto donde se alcanza la distancia; con un
    único punto de rejilla es la cola iterada en ese punto.
    """

    model_config = ConfigDict(frozen=True)

    spec: DistributionSpec
    x_grid: Tuple[float, ...]
    s_values: Tuple[int, ...]
    sup_distance: Tuple[float, ...]
    tail_at_sup: Tuple[float, ...]
    limit_kind: LimitKind
    monotone_in_s: bool

    @model_validator(mode="after")
    def validate_report(self) -> "ConvergenceReport":
        if len(self.sup_distance) != len(self.s_values) or len(self.tail_at_sup) != len(self.s_values):
            raise ValueError("Una distancia y una cola por cada s")
        if any(d < 0 for d in self.sup_distance):
            raise ValueError("Las distancias deben ser no negativas")
        return self

    def csv_rows(self) -> List[tuple[str, int, float, str]]:
        label = self.spec.describe()
        return [(label, s, d, self.limit_kind.value) for s, d in zip(self.s_values, self.sup_distance)]


def geometric_s_values(s_max: int, points: int) -> List[int]:
    """Valores enteros de s espaciados geométricamente entre 1 y s_max (sin repetidos)."""
    if s_max < 1 or points < 1:
        raise DomainError(f"Se requiere s_max >= 1 y points >= 1 (s_max={s_max}, points={points})")
    raw = np.round(np.geomspace(1.0, float(s_max), points)).astype(int)
    return sorted(set(int(v) for v in raw) | {s_max})


def convergence_report(
    spec: DistributionSpec,
    x_grid: Iterable[float],
    s_values: Iterable[int],
    config: QuadratureConfig | None = None,
) -> ConvergenceReport:
    xs = tuple(float(x) for x in x_grid)
    ss = tuple(int(s) for s in s_values)
    if not xs or not ss:
        raise DomainError("La rejilla de x y los valores de s no pueden estar vacíos")
    if any(b <= a for a, b in zip(ss[:-1], ss[1:])):
        raise DomainError("Los valores de s deben ser estrictamente crecientes")

    kind = limit_kind(spec)
    limits = np.array([limit_tail(spec, x) for x in xs])
    distances: list[float] = []
    tails: list[float] = []
    for s in ss:
        values = np.array([iterated_tail(spec, s, x, config) for x in xs])
        gaps = np.abs(values - limits)
        worst = int(np.argmax(gaps))
        distances.append(float(gaps[worst]))
        tails.append(float(values[worst]))
        logger.debug("Convergencia {} s={}: distancia {:.6g}", spec.describe(), s, gaps[worst])

    monotone = all(b <= a + _MONOTONE_SLACK for a, b in zip(distances[:-1], distances[1:]))
    if not monotone:
        logger.warning("La distancia al límite no es monótona en s para {}", spec.describe())
    logger.info("Informe de convergencia para {}: {} valores de s, {} puntos x", spec.describe(), len(ss), len(xs))
    return ConvergenceReport(
        spec=spec,
        x_grid=xs,
        s_values=ss,
        sup_distance=tuple(distances),
        tail_at_sup=tuple(tails),
        limit_kind=kind,
        monotone_in_s=monotone,
    )

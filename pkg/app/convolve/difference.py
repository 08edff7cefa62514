"""Diferencia μ^{n*}_{s-1} f_s^{n*} - μ^{(n-1)*}_{s-1} f_s^{(n-1)*} para sumas de exponenciales.

`gamma_difference_oracle` la calcula desde la transformada stop-loss cerrada de
la Erlang: (s-1)[E(S_n-x)_+^{s-2} - E(S_{n-1}-x)_+^{s-2}].
`gamma_difference_paper_formula` evalúa la expresión alternativa publicada tal
como está impresa; no coincide con el oráculo y se archiva como diagnóstico.
"""
from __future__ import annotations

import math
from typing import Iterable, List

from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..core.distributions import DistributionSpec
from ..core.special import log_binomial
from ..errors import DomainError
from ..iterate import IterationIndex, stop_loss

__all__ = [
    "DiscrepancyRow",
    "gamma_difference_oracle",
    "gamma_difference_paper_formula",
    "discrepancy_report",
]

# desviaciones por debajo de este umbral no se cuentan como discrepancia
_AGREEMENT_TOLERANCE = 1e-10


class DiscrepancyRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    s: int
    x: float
    rate: float
    paper_formula: float
    oracle: float
    abs_diff: float

    @property
    def agrees(self) -> bool:
        return self.abs_diff <= _AGREEMENT_TOLERANCE


def _validate(n: int, rate: float, s: int | IterationIndex, x: float) -> int:
    s = IterationIndex.of(s).s
    if n < 2 or s < 2:
        raise DomainError(f"Se requiere n >= 2 y s >= 2 (n={n}, s={s})")
    if not (math.isfinite(rate) and rate > 0):
        raise DomainError(f"La tasa debe ser positiva (rate={rate})")
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"Se requiere x >= 0 (x={x})")
    return s


def gamma_difference_oracle(n: int, rate: float, s: int | IterationIndex, x: float) -> float:
    s = _validate(n, rate, s, x)
    scale = 1.0 / rate
    current = stop_loss(DistributionSpec.erlang(n, scale), x, s - 2)
    previous = stop_loss(DistributionSpec.erlang(n - 1, scale), x, s - 2)
    return (s - 1) * (math.exp(current) - math.exp(previous))


def _paper_formula_value(n: int, rate: float, s: int, x: float) -> float:
    lx = rate * x
    decay = math.exp(-lx)
    leading = rate ** (n - 1) * x ** (n - 2) / math.factorial(n - 2) * decay * (lx / (n - 1) - 1.0)
    constant = 1.0 - math.exp(log_binomial(n + s - 4, s - 2))
    # suma vacía para n < 4
    partial = sum(
        math.exp(log_binomial(s + k - 2, k)) * rate ** (n - k) * x ** (n - k - 1) / math.factorial(n - k - 1)
        for k in range(2, n - 1)
    )
    return math.factorial(s - 1) / rate ** (s - 1) * (leading + constant + decay * partial)


def gamma_difference_paper_formula(n: int, rate: float, s: int | IterationIndex, x: float) -> DiscrepancyRow:
    """Valor de la fórmula impresa junto con su desviación respecto al oráculo."""
    s = _validate(n, rate, s, x)
    printed = _paper_formula_value(n, rate, s, x)
    oracle = gamma_difference_oracle(n, rate, s, x)
    return DiscrepancyRow(
        n=n, s=s, x=x, rate=rate, paper_formula=printed, oracle=oracle, abs_diff=abs(printed - oracle)
    )


def discrepancy_report(
    n_values: Iterable[int],
    s_values: Iterable[int],
    x_values: Iterable[float],
    rate: float = 1.0,
) -> List[DiscrepancyRow]:
    s_list = list(s_values)
    x_list = list(x_values)
    rows = [
        gamma_difference_paper_formula(n, rate, s, x)
        for n in n_values
        for s in s_list
        for x in x_list
    ]
    mismatches = sum(1 for row in rows if not row.agrees)
    logger.info("Informe de discrepancias: {} filas, {} discrepan del oráculo", len(rows), mismatches)
    return rows

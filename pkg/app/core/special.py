"""Funciones especiales estables: log-Gamma, binomiales en espacio log y la identidad del palo de hockey.

log-Gamma se toma de `scipy.special.gammaln` (Cephes `lgam`): aproximación
racional en [2, 3] con recurrencia y serie de Stirling de cinco coeficientes
para x >= 13; error relativo por debajo de 1e-13 en [0.5, 1e6].
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..errors import DomainError, IdentityViolationError

__all__ = ["log_gamma", "log_binomial", "hockey_stick", "log_hockey_stick", "LOG_FLOAT_MAX"]

# log del mayor double representable
LOG_FLOAT_MAX = float(np.log(np.finfo(np.float64).max))


def log_gamma(x: float) -> float:
    return float(gammaln(x))


def log_binomial(n: float, k: float) -> float:
    """log C(n, k) para argumentos reales con n >= k >= 0."""
    if k < 0 or n < k:
        raise DomainError(f"Binomial fuera de dominio: C({n}, {k})")
    return float(gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0))


def hockey_stick(k: int, m: int) -> int:
    """Suma de C(k+j, k) para j = 0..m, comprobada contra C(k+m+1, m) en aritmética entera exacta."""
    if k < 0 or m < 0:
        raise DomainError(f"hockey_stick requiere k, m >= 0 (k={k}, m={m})")
    total = sum(math.comb(k + j, k) for j in range(m + 1))
    expected = math.comb(k + m + 1, m)
    if total != expected:
        raise IdentityViolationError(
            f"Identidad del palo de hockey violada para k={k}, m={m}: {total} != {expected}",
            operation="hockey_stick",
        )
    return total


def log_hockey_stick(k: float, m: int) -> float:
    """Variante en espacio log para argumentos donde el entero exacto deja de ser práctico."""
    if k < 0 or m < 0:
        raise DomainError(f"log_hockey_stick requiere k, m >= 0 (k={k}, m={m})")
    return log_binomial(k + m + 1, m)

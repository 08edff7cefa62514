"""Recursión de referencia nivel a nivel: T̄_{s}(x) = (1/μ_{s-1}) ∫_x^∞ T̄_{s-1}(t) dt.

No usa la transformada stop-loss. Cada nivel se tabula en los nodos de
Gauss–Legendre de una malla de paneles graduada logarítmicamente hacia 0; el
polinomio de Legendre de cada panel se integra de forma exacta y las
integrales se acumulan desde la derecha.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import legint, leggauss, legval, legvander
from numpy.typing import NDArray

from ..core.distributions import DistributionSpec, inverse_tail, tail
from ..errors import UnsupportedDepthError
from .engine import IterationIndex, _check_x

__all__ = ["MAX_REFERENCE_DEPTH", "reference_iterated_tail"]

MAX_REFERENCE_DEPTH = 8

_ORDER = 20
_PANELS = 600
_MESH_START = 1e-12
_MESH_TAIL_MASS = 1e-30


class _PanelOperators(NamedTuple):
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    to_coefficients: NDArray[np.float64]
    right_integrals: NDArray[np.float64]


class _Level(NamedTuple):
    edges: NDArray[np.float64]
    values: NDArray[np.float64]
    mass_after: NDArray[np.float64]
    mu: float


@lru_cache(maxsize=1)
def _operators() -> _PanelOperators:
    nodes, weights = leggauss(_ORDER)
    to_coefficients = np.linalg.inv(legvander(nodes, _ORDER - 1))
    antiderivative = np.empty((_ORDER, _ORDER))
    for n in range(_ORDER):
        basis = np.zeros(_ORDER)
        basis[n] = 1.0
        anti = legint(basis)
        antiderivative[:, n] = legval(1.0, anti) - legval(nodes, anti)
    # fila i: ∫_{ξ_i}^{1} del interpolante, como combinación de los valores nodales
    return _PanelOperators(nodes, weights, to_coefficients, antiderivative @ to_coefficients)


def _mesh(unit: DistributionSpec) -> NDArray[np.float64]:
    upper = 2.0 * inverse_tail(unit, _MESH_TAIL_MASS)
    return np.concatenate([[0.0], np.geomspace(_MESH_START, upper, _PANELS)])


def _mass_after(panel_totals: NDArray[np.float64]) -> NDArray[np.float64]:
    from_right = np.cumsum(panel_totals[::-1])[::-1]
    return np.concatenate([from_right[1:], [0.0]])


@lru_cache(maxsize=64)
def _level(unit: DistributionSpec, s: int) -> _Level:
    ops = _operators()
    edges = _mesh(unit)
    half = 0.5 * np.diff(edges)
    if s == 1:
        mid = 0.5 * (edges[:-1] + edges[1:])
        values = tail(unit, mid[:, None] + half[:, None] * ops.nodes[None, :])
    else:
        previous = _level(unit, s - 1)
        within = half[:, None] * (previous.values @ ops.right_integrals.T)
        values = np.clip((within + previous.mass_after[:, None]) / previous.mu, 0.0, 1.0)
    panel_totals = half * (values @ ops.weights)
    mu = float(np.sum(panel_totals))
    logger.debug("Nivel de referencia s={} para {}: μ={:.12g}", s, unit.describe(), mu)
    return _Level(edges, values, _mass_after(panel_totals), mu)


def reference_iterated_tail(spec: DistributionSpec, s: int | IterationIndex, x: float) -> float:
    """Cola s-iterada por la recursión de definición; s <= 8."""
    s = IterationIndex.of(s).s
    if s > MAX_REFERENCE_DEPTH:
        raise UnsupportedDepthError(
            f"La recursión de referencia admite s <= {MAX_REFERENCE_DEPTH} (s={s})"
        )
    x = _check_x(x)
    if s == 1:
        return float(tail(spec, x))
    if x == 0.0:
        return 1.0

    unit = spec.unit_scale()
    level = _level(unit, s - 1)
    z = x / spec.scale
    edges = level.edges
    if z >= edges[-1]:
        return 0.0
    j = int(np.searchsorted(edges, z, side="right")) - 1
    a, b = edges[j], edges[j + 1]
    half = 0.5 * (b - a)
    xi = (z - 0.5 * (a + b)) / half
    anti = legint(_operators().to_coefficients @ level.values[j])
    within = half * (legval(1.0, anti) - legval(xi, anti))
    return float(min(1.0, max(0.0, (within + level.mass_after[j]) / level.mu)))

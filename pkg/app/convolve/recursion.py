"""Densidades s-iteradas de potencias de convolución S_n = X_1 + ... + X_n.

Las convoluciones se calculan sobre una rejilla uniforme que empieza en 0.
Con base exponencial, (f∗g)(x) = λ ∫_0^x e^{-λ(x-t)} g(t) dt se acumula con la
recurrencia I_{i+1} = e^{-λh} I_i + ∫_{x_i}^{x_{i+1}} e^{-λ(x_{i+1}-t)} g(t) dt,
interpolando g con Lagrange cúbico. Con otras bases se usa la regla del
trapecio. En ambos casos la rejilla interna se refina a la mitad y se aplica
extrapolación de Richardson.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve, lfilter
from scipy.special import gammaln, logsumexp

from ..core.distributions import DistributionSpec, Family, density, log_raw_moment
from ..core.special import log_binomial
from ..errors import ConvolutionResolutionError, DomainError
from ..iterate import IterationIndex, iterated_density
from ..quadrature import integrate_finite, leggauss_ab

__all__ = [
    "ConvolutionState",
    "uniform_grid",
    "conv_with_base",
    "convolution_moment_log",
    "gamma_closed_iterated_density",
    "gamma_iterated_density_recursion",
    "general_iterated_convolution",
]

# error de convolución estimado por encima del cual se rechaza la rejilla
RESOLUTION_LIMIT = 1e-6

_INITIAL_STEP = 0.01
_TARGET_ERROR = {4: 1e-11, 2: 1e-8}
_MAX_POINTS = {4: 1 << 20, 2: 1 << 15}

_STENCILS = {
    "left": (0.0, 1.0, 2.0, 3.0),
    "interior": (-1.0, 0.0, 1.0, 2.0),
    "right": (-2.0, -1.0, 0.0, 1.0),
}

Grid = NDArray[np.float64]


class ConvolutionState(BaseModel):
    """f_s^{n*} muestreada en una rejilla uniforme desde 0; inmutable una vez construida."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: DistributionSpec
    n: int = Field(ge=1)
    s: IterationIndex
    grid: np.ndarray
    density_values: np.ndarray
    error_estimate: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def validate_state(self) -> "ConvolutionState":
        _check_grid(self.grid)
        if self.density_values.shape != self.grid.shape:
            raise ValueError("density_values debe estar alineado con grid")
        if np.any(self.density_values < 0) or not np.all(np.isfinite(self.density_values)):
            raise ValueError("Las densidades deben ser finitas y no negativas")
        self.grid.setflags(write=False)
        self.density_values.setflags(write=False)
        return self

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def mass(self, tail_beyond: float = 0.0) -> float:
        """Masa trapezoidal sobre la rejilla más la cola más allá del último punto."""
        return float(np.trapezoid(self.density_values, self.grid)) + tail_beyond

    def value_at(self, x: float) -> float:
        if not (0.0 <= x <= self.grid[-1]):
            raise DomainError(f"x={x} fuera de la rejilla [0, {self.grid[-1]}]")
        return float(max(0.0, CubicSpline(self.grid, self.density_values)(x)))


def uniform_grid(upper: float, step: float) -> Grid:
    """Rejilla 0, h, 2h, ... que cubre [0, upper]."""
    if not (math.isfinite(upper) and upper > 0 and math.isfinite(step) and step > 0):
        raise DomainError(f"Rejilla inválida: upper={upper}, step={step}")
    intervals = max(3, math.ceil(upper / step - 1e-9))
    return np.linspace(0.0, intervals * step, intervals + 1)


def _check_grid(grid: Grid) -> Grid:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 4:
        raise DomainError("La rejilla necesita al menos 4 puntos")
    if grid[0] != 0.0:
        raise DomainError("La rejilla debe empezar en 0")
    steps = np.diff(grid)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise DomainError("La rejilla debe ser uniforme y estrictamente creciente")
    return grid


# --- Núcleos de convolución ---


@lru_cache(maxsize=64)
def _stencil_weights(lam_h: float) -> dict[str, NDArray[np.float64]]:
    """∫_0^1 e^{-λh(1-u)} L_j(u) du para cada base de Lagrange cúbica."""
    u, w = leggauss_ab(20, 0.0, 1.0)
    kernel = w * np.exp(-lam_h * (1.0 - u))
    weights = {}
    for name, offsets in _STENCILS.items():
        row = np.empty(4)
        for j, oj in enumerate(offsets):
            basis = np.ones_like(u)
            for k, ok in enumerate(offsets):
                if k != j:
                    basis *= (u - ok) / (oj - ok)
            row[j] = np.sum(kernel * basis)
        weights[name] = row
    return weights


def _conv_exponential(rate: float, grid: Grid, g: NDArray[np.float64]) -> NDArray[np.float64]:
    h = float(grid[1] - grid[0])
    stencils = _stencil_weights(rate * h)
    count = grid.size - 1
    panels = np.empty(count)
    panels[0] = g[0:4] @ stencils["left"]
    if count > 2:
        windows = np.lib.stride_tricks.sliding_window_view(g, 4)[: count - 2]
        panels[1 : count - 1] = windows @ stencils["interior"]
    panels[count - 1] = g[count - 3 : count + 1] @ stencils["right"]
    running = lfilter([1.0], [1.0, -math.exp(-rate * h)], h * panels)
    return rate * np.concatenate([[0.0], running])


def _conv_trapezoid(f: NDArray[np.float64], grid: Grid, g: NDArray[np.float64]) -> NDArray[np.float64]:
    h = float(grid[1] - grid[0])
    full = fftconvolve(f, g)[: grid.size]
    return h * (full - 0.5 * (f[0] * g + f * g[0]))


def _convolve(base: DistributionSpec, grid: Grid, g: NDArray[np.float64]) -> NDArray[np.float64]:
    if base.family is Family.EXPONENTIAL:
        return _conv_exponential(base.rate, grid, g)
    return _conv_trapezoid(density(base, grid), grid, g)


def _order(base: DistributionSpec) -> int:
    return 4 if base.family is Family.EXPONENTIAL else 2


def _reject_singular_base(base: DistributionSpec) -> None:
    if base.family is not Family.EXPONENTIAL and base.effective_shape < 1.0:
        raise DomainError(f"La base {base.describe()} tiene densidad infinita en 0; no admite convolución en rejilla")


def _refine(
    grid: Grid,
    compute: Callable[[Grid], NDArray[np.float64]],
    order: int,
    scale: float,
    operation: str,
) -> tuple[NDArray[np.float64], float]:
    """Evalúa `compute` en rejillas internas cada vez más finas y devuelve el extrapolado en `grid`."""
    intervals = grid.size - 1
    factor = max(1, math.ceil((grid[1] - grid[0]) / (_INITIAL_STEP * scale)))
    previous: NDArray[np.float64] | None = None
    error = math.inf
    while True:
        fine = np.linspace(0.0, grid[-1], intervals * factor + 1)
        values = compute(fine)[::factor]
        if previous is not None:
            correction = (values - previous) / (2**order - 1)
            error = float(np.max(np.abs(correction)))
            values = values + correction
            if error <= _TARGET_ERROR[order]:
                break
        if 2 * intervals * factor + 1 > _MAX_POINTS[order]:
            break
        previous = values
        factor *= 2
    logger.debug("{}: rejilla interna h={:.3g}, error estimado {:.3g}", operation, grid[-1] / (intervals * factor), error)
    if error > RESOLUTION_LIMIT:
        raise ConvolutionResolutionError(
            f"Error de convolución estimado {error:.3g} supera {RESOLUTION_LIMIT:g}",
            estimated_error=error,
            operation=operation,
        )
    return np.clip(values, 0.0, None), error


# --- Operaciones ---


def conv_with_base(base: DistributionSpec, grid: Grid, values: NDArray[np.float64], x: float) -> float:
    """(f ∗ g)(x) con f la densidad de `base` y g muestreada en `grid`."""
    grid = _check_grid(grid)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise DomainError("Los valores de g deben estar alineados con la rejilla")
    if not (math.isfinite(x) and 0.0 <= x <= grid[-1]):
        raise DomainError(f"x={x} fuera de la cobertura de la rejilla [0, {grid[-1]}]")
    if x == 0.0:
        return 0.0
    if base.family is Family.EXPONENTIAL:
        conv = _conv_exponential(base.rate, grid, values)
        hit = np.flatnonzero(np.isclose(grid, x, rtol=1e-12, atol=0.0))
        if hit.size:
            return float(max(0.0, conv[hit[0]]))
        return float(max(0.0, CubicSpline(grid, conv)(x)))

    spline = CubicSpline(grid, values)

    def integrand(t: NDArray[np.float64]) -> NDArray[np.float64]:
        return density(base, t) * np.clip(spline(x - t), 0.0, None)

    return integrate_finite(integrand, 0.0, x).value


@lru_cache(maxsize=1024)
def convolution_moment_log(base: DistributionSpec, k: int, j: int) -> float:
    """log E S_k^j; S_0 es la masa puntual en 0."""
    if k < 0 or j < 0:
        raise DomainError(f"Se requiere k, j >= 0 (k={k}, j={j})")
    if j == 0:
        return 0.0
    if k == 0:
        return -math.inf
    if k == 1:
        return log_raw_moment(base, j)
    if base.family is Family.EXPONENTIAL:
        return log_raw_moment(DistributionSpec.gamma(k, base.scale), j)
    if base.family is Family.GAMMA:
        return log_raw_moment(DistributionSpec.gamma(k * float(base.shape), base.scale), j)  # type: ignore[arg-type]
    # E(A+B)^j = Σ C(j,i) E A^i E B^{j-i}
    terms = [
        log_binomial(j, i) + convolution_moment_log(base, k - 1, i) + log_raw_moment(base, j - i)
        for i in range(j + 1)
    ]
    return float(logsumexp(terms))


def gamma_closed_iterated_density(n: int, rate: float, s: int | IterationIndex, x: float) -> float:
    """Densidad del s-iterado de Gamma(n, 1/λ): derivada analítica de la cola cerrada de forma entera."""
    s = IterationIndex.of(s).s
    if n < 1 or s < 2:
        raise DomainError(f"Se requiere n >= 1 y s >= 2 (n={n}, s={s})")
    if not (math.isfinite(rate) and rate > 0):
        raise DomainError(f"La tasa debe ser positiva (rate={rate})")
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"Se requiere x >= 0 (x={x})")
    y = rate * x
    log_norm = log_binomial(n + s - 2, n - 1)
    terms = []
    for ell in range(n):
        # c_ℓ - c_{ℓ+1} = c_ℓ (s-1)/(s+n-ℓ-2)
        log_c = log_binomial(s + n - ell - 2, n - ell - 1) - log_norm
        log_power = ell * math.log(y) if ell and y > 0 else (0.0 if ell == 0 else -math.inf)
        terms.append(log_c + math.log(s - 1) - math.log(s + n - ell - 2) + log_power - float(gammaln(ell + 1.0)))
    return rate * math.exp(-y + float(logsumexp(terms)))


def gamma_iterated_density_recursion(
    n: int,
    rate: float,
    s: int | IterationIndex,
    grid: Grid,
) -> ConvolutionState:
    """f_s^{n*} = (n-1)/(n+s-2) f ∗ f_s^{(n-1)*} + (s-1)/(n+s-2) f, con f exponencial de tasa λ."""
    index = IterationIndex.of(s)
    if index.s < 2 or n < 1:
        raise DomainError(f"Se requiere n >= 1 y s >= 2 (n={n}, s={index.s})")
    grid = _check_grid(grid)
    base = DistributionSpec.exponential(rate)
    s_value = index.s

    def compute(fine: Grid) -> NDArray[np.float64]:
        f = rate * np.exp(-rate * fine)
        g = f.copy()
        for k in range(2, n + 1):
            g = (k - 1) / (k + s_value - 2) * _conv_exponential(rate, fine, g) + (s_value - 1) / (k + s_value - 2) * f
        return g

    if n == 1:
        values, error = compute(grid), 0.0
    else:
        values, error = _refine(grid, compute, 4, base.scale, "gamma_iterated_density_recursion")
    return ConvolutionState(base=base, n=n, s=index, grid=grid.copy(), density_values=values, error_estimate=error)


def _iterated_density_values(base: DistributionSpec, s: int, t: Grid) -> NDArray[np.float64]:
    if base.family is Family.EXPONENTIAL:
        return base.rate * np.exp(-base.rate * t)
    return np.array([iterated_density(base, s, float(v)) for v in t])


def general_iterated_convolution(
    base: DistributionSpec,
    n: int,
    s: int | IterationIndex,
    grid: Grid,
) -> ConvolutionState:
    """Recursión general en n:

    f_s^{n*} = (μ^{(n-1)*}_{s-1}/μ^{n*}_{s-1}) f ∗ f_s^{(n-1)*}
               + (1/μ^{n*}_{s-1}) Σ_{ℓ=1}^{s-1} C(s-1,ℓ) μ^{(n-1)*}_{s-ℓ-1} μ_ℓ f_{ℓ+1}
    """
    index = IterationIndex.of(s)
    if index.s < 2 or n < 2:
        raise DomainError(f"Se requiere n >= 2 y s >= 2 (n={n}, s={index.s})")
    grid = _check_grid(grid)
    _reject_singular_base(base)
    s_value = index.s

    def compute(fine: Grid) -> NDArray[np.float64]:
        iterates = {level: _iterated_density_values(base, level, fine) for level in range(2, s_value + 1)}
        g = iterates[s_value]
        for k in range(2, n + 1):
            log_mu_k = convolution_moment_log(base, k, s_value - 1)
            conv_weight = math.exp(convolution_moment_log(base, k - 1, s_value - 1) - log_mu_k)
            g_next = conv_weight * _convolve(base, fine, g)
            for ell in range(1, s_value):
                log_weight = (
                    log_binomial(s_value - 1, ell)
                    + convolution_moment_log(base, k - 1, s_value - ell - 1)
                    + log_raw_moment(base, ell)
                    - log_mu_k
                )
                g_next = g_next + math.exp(log_weight) * iterates[ell + 1]
            g = g_next
        return g

    values, error = _refine(grid, compute, _order(base), base.scale, "general_iterated_convolution")
    return ConvolutionState(base=base, n=n, s=index, grid=grid.copy(), density_values=values, error_estimate=error)

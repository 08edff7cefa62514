"""Primitivas paramétricas de las familias Gamma, Weibull y exponencial."""
from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache
from typing import Tuple, overload

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from scipy.special import gammaincc, gammainccinv, gammaln, xlogy

from ..errors import DomainError, MomentOverflowError, TailUnderflowError
from .special import LOG_FLOAT_MAX

__all__ = [
    "Family",
    "DistributionSpec",
    "MomentTable",
    "density",
    "log_density",
    "tail",
    "log_tail",
    "raw_moment",
    "log_raw_moment",
    "failure_rate",
    "inverse_tail",
    "variance",
    "moment_table",
]

# cola por debajo de este valor: fuera del rango utilizable
TAIL_UNDERFLOW = 1e-300
_LOG_TAIL_UNDERFLOW = math.log(TAIL_UNDERFLOW)


class Family(str, Enum):
    GAMMA = "gamma"
    WEIBULL = "weibull"
    EXPONENTIAL = "exponential"


class DistributionSpec(BaseModel):
    """Familia paramétrica con sus parámetros.

    `scale` es θ para Gamma, la escala λ de Weibull (cola e^{-(x/λ)^α}) y la
    media 1/λ de la exponencial. `integer_shape` marca el camino explícito de
    forma entera de la Gamma; nunca se deduce redondeando `shape`.
    """

    model_config = ConfigDict(frozen=True)

    family: Family
    shape: float | None = None
    scale: float = 1.0
    integer_shape: bool = False

    @model_validator(mode="after")
    def validate_spec(self) -> "DistributionSpec":
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"La escala debe ser positiva y finita (scale={self.scale})")
        if self.family is Family.EXPONENTIAL:
            if self.shape is not None or self.integer_shape:
                raise ValueError("La exponencial no admite parámetro de forma")
            return self
        if self.shape is None or not (math.isfinite(self.shape) and self.shape > 0):
            raise ValueError(f"La forma debe ser positiva y finita (shape={self.shape})")
        if self.integer_shape:
            if self.family is not Family.GAMMA:
                raise ValueError("El camino de forma entera solo existe para la Gamma")
            if self.shape != int(self.shape):
                raise ValueError(f"Forma entera declarada con valor no entero: {self.shape}")
        return self

    # --- Constructores ---

    @classmethod
    def _build(cls, **kwargs) -> "DistributionSpec":
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            raise DomainError(exc.errors()[0]["msg"]) from exc

    @classmethod
    def gamma(cls, shape: float, scale: float = 1.0) -> "DistributionSpec":
        return cls._build(family=Family.GAMMA, shape=float(shape), scale=float(scale))

    @classmethod
    def erlang(cls, shape: int, scale: float = 1.0) -> "DistributionSpec":
        """Gamma de forma entera (activa las fórmulas cerradas)."""
        if isinstance(shape, bool) or not isinstance(shape, (int, np.integer)):
            raise DomainError(f"La forma de Erlang debe ser un entero (shape={shape!r})")
        return cls._build(family=Family.GAMMA, shape=float(shape), scale=float(scale), integer_shape=True)

    @classmethod
    def weibull(cls, shape: float, scale: float = 1.0) -> "DistributionSpec":
        return cls._build(family=Family.WEIBULL, shape=float(shape), scale=float(scale))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "DistributionSpec":
        if not (math.isfinite(rate) and rate > 0):
            raise DomainError(f"La tasa debe ser positiva y finita (rate={rate})")
        return cls._build(family=Family.EXPONENTIAL, scale=1.0 / float(rate))

    # --- Utilidades ---

    @property
    def effective_shape(self) -> float:
        return 1.0 if self.family is Family.EXPONENTIAL else float(self.shape)  # type: ignore[arg-type]

    @property
    def rate(self) -> float:
        return 1.0 / self.scale

    def unit_scale(self) -> "DistributionSpec":
        return self.model_copy(update={"scale": 1.0})

    def with_scale(self, scale: float) -> "DistributionSpec":
        return self._build(**{**self.model_dump(), "scale": float(scale)})

    def describe(self) -> str:
        if self.family is Family.EXPONENTIAL:
            return f"exponential(rate={self.rate:.12g})"
        shape = f"{int(self.shape)}" if self.integer_shape else f"{self.shape:.12g}"  # type: ignore[arg-type]
        return f"{self.family.value}(shape={shape}, scale={self.scale:.12g})"


class MomentTable(BaseModel):
    """log E X^k para k = 0..K, construida una vez por (spec, K)."""

    model_config = ConfigDict(frozen=True)

    spec: DistributionSpec
    log_moments: Tuple[float, ...]

    @model_validator(mode="after")
    def validate_table(self) -> "MomentTable":
        if not self.log_moments or self.log_moments[0] != 0.0:
            raise ValueError("log_moments[0] debe ser 0 (E X^0 = 1)")
        if not all(math.isfinite(v) for v in self.log_moments):
            raise ValueError("Todos los log-momentos deben ser finitos")
        return self

    @property
    def order(self) -> int:
        return len(self.log_moments) - 1

    def log_moment(self, k: int) -> float:
        return self.log_moments[k]

    def moment(self, k: int) -> float:
        return _exp_or_overflow(self.log_moments[k], f"E X^{k}")


# --- Evaluación puntual ---

FloatOrArray = float | NDArray[np.float64]


def _as_points(x: FloatOrArray, *, positive: bool = False) -> tuple[NDArray[np.float64], bool]:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"Argumento no finito: {x!r}")
    if positive and np.any(arr <= 0):
        raise DomainError(f"Se requiere x > 0 (x={x!r})")
    if np.any(arr < 0):
        raise DomainError(f"Se requiere x >= 0 (x={x!r})")
    return arr, arr.ndim == 0


def _finish(values: NDArray[np.float64], scalar: bool) -> FloatOrArray:
    return float(values) if scalar else values


def _log_density_unchecked(spec: DistributionSpec, t: NDArray[np.float64]) -> NDArray[np.float64]:
    z = t / spec.scale
    log_scale = math.log(spec.scale)
    with np.errstate(divide="ignore"):
        if spec.family is Family.GAMMA:
            alpha = float(spec.shape)  # type: ignore[arg-type]
            return xlogy(alpha - 1.0, z) - z - gammaln(alpha) - log_scale
        if spec.family is Family.WEIBULL:
            alpha = float(spec.shape)  # type: ignore[arg-type]
            return math.log(alpha) - log_scale + xlogy(alpha - 1.0, z) - np.power(z, alpha)
        return -log_scale - z


def _gamma_log_upper(alpha: float, z: NDArray[np.float64]) -> NDArray[np.float64]:
    q = gammaincc(alpha, z)
    with np.errstate(divide="ignore"):
        out = np.log(q)
    # serie asintótica de Γ(α, z) donde la cola regularizada ya es cero
    under = q <= 0.0
    if np.any(under):
        zu = z[under]
        term = np.ones_like(zu)
        total = np.ones_like(zu)
        for k in range(1, 9):
            term = term * (alpha - k) / zu
            total = total + term
        out[under] = (alpha - 1.0) * np.log(zu) - zu - gammaln(alpha) + np.log(np.abs(total))
    return out


def _log_tail_unchecked(spec: DistributionSpec, t: NDArray[np.float64]) -> NDArray[np.float64]:
    z = np.atleast_1d(t / spec.scale)
    if spec.family is Family.GAMMA:
        out = _gamma_log_upper(float(spec.shape), z)  # type: ignore[arg-type]
    elif spec.family is Family.WEIBULL:
        out = -np.power(z, float(spec.shape))  # type: ignore[arg-type]
    else:
        out = -z
    return out.reshape(np.shape(t))


@overload
def density(spec: DistributionSpec, x: float) -> float: ...
@overload
def density(spec: DistributionSpec, x: NDArray[np.float64]) -> NDArray[np.float64]: ...
def density(spec: DistributionSpec, x: FloatOrArray) -> FloatOrArray:
    """f_X(x)."""
    arr, scalar = _as_points(x)
    return _finish(np.exp(_log_density_unchecked(spec, arr)), scalar)


def log_density(spec: DistributionSpec, x: FloatOrArray) -> FloatOrArray:
    arr, scalar = _as_points(x)
    return _finish(_log_density_unchecked(spec, arr), scalar)


def tail(spec: DistributionSpec, x: FloatOrArray) -> FloatOrArray:
    """Cola F̄_X(x) = 1 - F_X(x)."""
    arr, scalar = _as_points(x)
    z = arr / spec.scale
    if spec.family is Family.GAMMA:
        values = gammaincc(float(spec.shape), z)  # type: ignore[arg-type]
    elif spec.family is Family.WEIBULL:
        values = np.exp(-np.power(z, float(spec.shape)))  # type: ignore[arg-type]
    else:
        values = np.exp(-z)
    return _finish(np.asarray(values, dtype=np.float64), scalar)


def log_tail(spec: DistributionSpec, x: FloatOrArray) -> FloatOrArray:
    arr, scalar = _as_points(x)
    return _finish(_log_tail_unchecked(spec, arr), scalar)


def log_raw_moment(spec: DistributionSpec, k: float) -> float:
    """log E X^k, calculado siempre en espacio log."""
    if k < 0 or not math.isfinite(k):
        raise DomainError(f"El orden del momento debe ser >= 0 (k={k})")
    log_scale = k * math.log(spec.scale)
    if spec.family is Family.GAMMA:
        alpha = float(spec.shape)  # type: ignore[arg-type]
        return float(log_scale + gammaln(alpha + k) - gammaln(alpha))
    if spec.family is Family.WEIBULL:
        return float(log_scale + gammaln(1.0 + k / float(spec.shape)))  # type: ignore[arg-type]
    return float(log_scale + gammaln(1.0 + k))


def _exp_or_overflow(log_value: float, label: str) -> float:
    if log_value > LOG_FLOAT_MAX:
        raise MomentOverflowError(f"{label} no es representable (log = {log_value:.6g})", log_value=log_value)
    return math.exp(log_value)


def raw_moment(spec: DistributionSpec, k: int) -> float:
    """E X^k; si no es representable lanza MomentOverflowError con el logaritmo."""
    return _exp_or_overflow(log_raw_moment(spec, k), f"E X^{k}")


def variance(spec: DistributionSpec) -> float:
    return raw_moment(spec, 2) - raw_moment(spec, 1) ** 2


def failure_rate(spec: DistributionSpec, x: float) -> float:
    """Tasa de fallo f_X(x)/F̄_X(x)."""
    arr, _ = _as_points(x, positive=True)
    lt = float(_log_tail_unchecked(spec, arr))
    if lt < _LOG_TAIL_UNDERFLOW:
        raise TailUnderflowError(f"Cola por debajo de {TAIL_UNDERFLOW:g} en x={x}: rango utilizable excedido", log_tail=lt)
    return math.exp(float(_log_density_unchecked(spec, arr)) - lt)


def inverse_tail(spec: DistributionSpec, p: float) -> float:
    """x tal que F̄_X(x) = p."""
    if not (0.0 < p <= 1.0):
        raise DomainError(f"La probabilidad de cola debe estar en (0, 1] (p={p})")
    if spec.family is Family.GAMMA:
        return float(spec.scale * gammainccinv(float(spec.shape), p))  # type: ignore[arg-type]
    if spec.family is Family.WEIBULL:
        return float(spec.scale * (-math.log(p)) ** (1.0 / float(spec.shape)))  # type: ignore[arg-type]
    return float(-spec.scale * math.log(p))


@lru_cache(maxsize=256)
def moment_table(spec: DistributionSpec, order: int) -> MomentTable:
    if order < 0:
        raise DomainError(f"El orden de la tabla debe ser >= 0 (order={order})")
    logs = tuple([0.0] + [log_raw_moment(spec, k) for k in range(1, order + 1)])
    return MomentTable(spec=spec, log_moments=logs)

"""Muestreo Monte-Carlo de la distribución s-iterada.

Para s >= 2 el s-iterado tiene la ley de B·X*, con X* la versión de X sesgada
por el peso x^{s-1} y B ~ Beta(1, s-1) independiente: E(1 - x/X*)_+^{s-1} =
E(X-x)_+^{s-1}/E X^{s-1}. Para Gamma(α, θ), X* ~ Gamma(α+s-1, θ); para
Weibull(α, λ), X* = λ G^{1/α} con G ~ Gamma(1+(s-1)/α), que se obtiene por
inversión de la cola regularizada.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import List

import numpy as np
from loguru import logger
from numpy.random import PCG64, Generator, SeedSequence
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import gammaincc, gammainccinv

from ..config import get_settings
from ..core.distributions import DistributionSpec, Family, inverse_tail
from ..errors import DomainError, SamplingInversionError
from ..iterate import IterationIndex, iterated_tail, log_iterated_tail
from ..quadrature import QuadratureConfig

__all__ = [
    "SampleBatch",
    "sample_iterated",
    "empirical_tail",
    "iterated_cdf",
    "ks_distance",
]

_INVERSION_RTOL = 1e-12
_CDF_TAIL = 1e-10
_CDF_KNOTS = 200


class SampleBatch(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: DistributionSpec
    s: IterationIndex
    seed: int = Field(ge=0, lt=2**64)
    values: np.ndarray
    count: int = Field(ge=1)

    @model_validator(mode="after")
    def validate_batch(self) -> "SampleBatch":
        if self.values.ndim != 1 or self.values.size != self.count:
            raise ValueError("values debe tener exactamente count elementos")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("Las muestras deben ser finitas y no negativas")
        self.values.setflags(write=False)
        return self

    def csv_lines(self, digits: int = 12) -> List[str]:
        header = [
            f"# spec={self.spec.describe()}",
            f"# s={self.s.s}",
            f"# seed={self.seed}",
            "value",
        ]
        return header + [f"{v:.{digits}g}" for v in self.values]


def _weibull_size_biased_gamma(a: float, u: NDArray[np.float64]) -> NDArray[np.float64]:
    """G con Q(a, G) = u, pulido sobre el log de la cola cuando el residuo es grande."""
    g = gammainccinv(a, u)
    bad = ~np.isfinite(g)
    if np.any(bad):
        raise SamplingInversionError("Inversión de la cola ponderada no finita", quantile=float(u[bad][0]))
    with np.errstate(divide="ignore"):
        residual = np.abs(np.log(gammaincc(a, g)) - np.log(u))
    for i in np.flatnonzero(residual > _INVERSION_RTOL):
        g[i] = _polish(a, float(u[i]), float(g[i]))
    return g


def _polish(a: float, u: float, guess: float) -> float:
    target = math.log(u)

    def excess(v: float) -> float:
        q = gammaincc(a, v)
        return (math.log(q) if q > 0 else -math.inf) - target

    lo, hi = guess * 0.5, max(guess * 2.0, 1e-300)
    for _ in range(200):
        if excess(lo) >= 0 >= excess(hi):
            break
        lo, hi = lo * 0.5, hi * 2.0
    else:
        raise SamplingInversionError(f"No se pudo acotar el cuantil {u!r}", quantile=u)
    try:
        return float(brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    except (ValueError, RuntimeError) as exc:
        raise SamplingInversionError(f"Bisección fallida en el cuantil {u!r}: {exc}", quantile=u) from exc


def _draw_base(spec: DistributionSpec, rng: Generator, size: int) -> NDArray[np.float64]:
    if spec.family is Family.GAMMA:
        return rng.gamma(float(spec.shape), spec.scale, size)  # type: ignore[arg-type]
    if spec.family is Family.WEIBULL:
        return spec.scale * rng.weibull(float(spec.shape), size)  # type: ignore[arg-type]
    return rng.exponential(spec.scale, size)


def _draw_size_biased(spec: DistributionSpec, s: int, rng: Generator, size: int) -> NDArray[np.float64]:
    if spec.family is Family.GAMMA:
        return rng.gamma(float(spec.shape) + s - 1, spec.scale, size)  # type: ignore[arg-type]
    if spec.family is Family.EXPONENTIAL:
        return rng.gamma(float(s), spec.scale, size)
    alpha = float(spec.shape)  # type: ignore[arg-type]
    u = 1.0 - rng.random(size)
    return spec.scale * np.power(_weibull_size_biased_gamma(1.0 + (s - 1) / alpha, u), 1.0 / alpha)


def _draw_chunk(spec: DistributionSpec, s: int, seed_seq: SeedSequence, size: int) -> NDArray[np.float64]:
    rng = Generator(PCG64(seed_seq))
    if s == 1:
        return _draw_base(spec, rng, size)
    biased = _draw_size_biased(spec, s, rng, size)
    return rng.beta(1.0, s - 1.0, size) * biased


def sample_iterated(
    spec: DistributionSpec,
    s: int | IterationIndex,
    count: int,
    seed: int,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> SampleBatch:
    """Muestra reproducible: el bloque j usa el j-ésimo hijo de SeedSequence(seed), sin depender de `workers`."""
    settings = get_settings()
    index = IterationIndex.of(s)
    if count < 1:
        raise DomainError(f"count debe ser >= 1 (count={count})")
    if not (0 <= seed < 2**64):
        raise DomainError(f"La semilla debe ser un entero de 64 bits sin signo (seed={seed})")
    chunk_size = chunk_size or settings.sampler_chunk_size
    workers = workers or settings.sampler_workers

    chunks = math.ceil(count / chunk_size)
    children = SeedSequence(seed).spawn(chunks)
    sizes = [min(chunk_size, count - j * chunk_size) for j in range(chunks)]
    if workers > 1 and chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _draw_chunk(spec, index.s, children[j], sizes[j]), range(chunks)))
    else:
        parts = [_draw_chunk(spec, index.s, children[j], sizes[j]) for j in range(chunks)]
    values = np.concatenate(parts)
    logger.debug("Muestreo {} s={}: {} valores en {} bloques", spec.describe(), index.s, count, chunks)
    return SampleBatch(spec=spec, s=index, seed=seed, values=values, count=count)


def empirical_tail(batch: SampleBatch, x: float) -> float:
    return float(np.mean(batch.values > x))


@lru_cache(maxsize=32)
def iterated_cdf(
    spec: DistributionSpec,
    s: int,
    config: QuadratureConfig | None = None,
) -> PchipInterpolator:
    """Interpolante monótono de 1 - T̄_s en [0, x_max], con T̄_s(x_max) < 1e-10."""
    upper = inverse_tail(spec, _CDF_TAIL)
    log_floor = math.log(_CDF_TAIL)
    while log_iterated_tail(spec, s, upper, config) > log_floor:
        upper *= 2.0
    knots = np.unique(
        np.concatenate(
            [
                np.linspace(0.0, upper, _CDF_KNOTS),
                np.geomspace(upper * 1e-8, upper, _CDF_KNOTS),
            ]
        )
    )
    cdf = np.maximum.accumulate(np.array([1.0 - iterated_tail(spec, s, float(x), config) for x in knots]))
    return PchipInterpolator(knots, np.clip(cdf, 0.0, 1.0), extrapolate=False)


def ks_distance(batch: SampleBatch, config: QuadratureConfig | None = None) -> float:
    """sup |F_n - (1 - T̄_s)| sobre la muestra ordenada."""
    cdf = iterated_cdf(batch.spec, batch.s.s, config)
    ordered = np.sort(batch.values)
    model = cdf(ordered)
    model = np.where(np.isnan(model), 1.0, model)
    n = ordered.size
    above = np.arange(1, n + 1) / n - model
    below = model - np.arange(0, n) / n
    return float(max(above.max(), below.max()))

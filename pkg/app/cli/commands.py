from __future__ import annotations

import math
import sys
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, TextIO, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .. import __version__
from ..config import get_settings
from ..convolve import discrepancy_report
from ..core import LOG_FLOAT_MAX, DistributionSpec, Family, density
from ..errors import DomainError, NumericalError
from ..iterate import iterated_density, iterated_moment, iterated_tail, stop_loss
from ..limits import convergence_report, geometric_s_values
from ..ordering import sfr_check
from ..quadrature import QuadratureConfig
from ..sampler import sample_iterated
from .csv_output import CommandOutput, emit, render, rows_to_tuple

__all__ = ["Command", "XSpacing", "CliConfig", "run", "EXIT_OK", "EXIT_USAGE", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_DEFAULT_XS = (0.5, 1.0, 2.0, 5.0)


class Command(str, Enum):
    TAIL = "tail"
    DENSITY = "density"
    MOMENTS = "moments"
    STOPLOSS = "stoploss"
    CONVERGE = "converge"
    ORDER = "order"
    DIFF_REPORT = "diff-report"
    SAMPLE = "sample"


class XSpacing(str, Enum):
    LINEAR = "linear"
    LOG = "log"


_NEEDS_SPEC = {c for c in Command if c is not Command.DIFF_REPORT}
_NEEDS_S = {Command.TAIL, Command.DENSITY, Command.MOMENTS, Command.STOPLOSS, Command.ORDER, Command.SAMPLE}
_NEEDS_X = {Command.TAIL, Command.DENSITY, Command.STOPLOSS, Command.CONVERGE, Command.ORDER}


class CliConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    family: Family | None = None
    shape: float | None = None
    integer_shape: bool = False
    scale: float | None = None
    rate: float | None = None

    other_family: Family | None = None
    other_shape: float | None = None
    other_integer_shape: bool = False
    other_scale: float | None = None
    other_rate: float | None = None

    s: int | None = None
    s_max: int | None = None
    s_points: int = 20
    s_values: Tuple[int, ...] | None = None

    x: float | None = None
    x_min: float = 0.0
    x_max: float | None = None
    x_points: int = 50
    x_spacing: XSpacing = XSpacing.LINEAR
    xs: Tuple[float, ...] | None = None

    m: int | None = None
    order: int | None = None
    n_max: int = 6
    seed: int = 0
    count: int = 100000
    tol: float | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    output: Path | None = None

    @model_validator(mode="after")
    def validate_config(self) -> "CliConfig":
        if self.command in _NEEDS_SPEC and self.family is None:
            raise ValueError(f"El comando {self.command.value} necesita --family")
        if self.command in _NEEDS_S and self.s is None:
            raise ValueError(f"El comando {self.command.value} necesita --s")
        if self.command in _NEEDS_X and self.x is None and self.x_max is None:
            raise ValueError(f"El comando {self.command.value} necesita --x o --x-max")
        if self.command is Command.MOMENTS and self.m is None:
            raise ValueError("El comando moments necesita --m")
        if self.command is Command.CONVERGE and self.s_max is None and not self.s_values:
            raise ValueError("El comando converge necesita --s-max o --s-values")
        if self.command is Command.ORDER and self.other_family is None:
            raise ValueError("El comando order necesita --other-family")
        if self.x_spacing is XSpacing.LOG and self.x is None and self.x_min <= 0:
            raise ValueError("La rejilla logarítmica necesita --x-min > 0")
        return self

    # --- Construcción de objetos de dominio ---

    def distribution(self, other: bool = False) -> DistributionSpec:
        prefix = "other_" if other else ""
        family: Family | None = getattr(self, f"{prefix}family")
        shape: float | None = getattr(self, f"{prefix}shape")
        scale: float | None = getattr(self, f"{prefix}scale")
        rate: float | None = getattr(self, f"{prefix}rate")
        if family is None:
            raise DomainError("Falta la familia de la distribución")
        if family is Family.EXPONENTIAL:
            if shape is not None:
                raise DomainError("La exponencial no admite --shape")
            if rate is None:
                rate = 1.0 / scale if scale is not None else 1.0
            return DistributionSpec.exponential(rate)
        if shape is None:
            raise DomainError(f"La familia {family.value} necesita --{prefix.replace('_', '-')}shape")
        scale = 1.0 if scale is None else scale
        if family is Family.GAMMA and getattr(self, f"{prefix}integer_shape"):
            return DistributionSpec.erlang(int(shape), scale)
        if family is Family.GAMMA:
            return DistributionSpec.gamma(shape, scale)
        return DistributionSpec.weibull(shape, scale)

    def x_grid(self) -> List[float]:
        if self.x is not None:
            return [self.x]
        assert self.x_max is not None
        if self.x_spacing is XSpacing.LOG:
            points = np.geomspace(self.x_min, self.x_max, self.x_points)
        else:
            points = np.linspace(self.x_min, self.x_max, self.x_points)
        return [float(v) for v in points]

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig.from_settings(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def output_path(self) -> Path | None:
        if self.output is not None:
            return self.output
        directory = get_settings().csv_output_dir
        if directory is None:
            return None
        return Path(directory) / f"{self.command.value}.csv"

    # --- Forma textual ---

    def to_argv(self) -> List[str]:
        """Línea de órdenes que vuelve a producir esta misma configuración."""
        argv = [self.command.value]
        for name, field in type(self).model_fields.items():
            if name in {"command", "integer_shape", "other_integer_shape"}:
                continue
            value = getattr(self, name)
            if value == field.default:
                continue
            flag = "--" + name.replace("_", "-")
            if name in {"shape", "other_shape"}:
                integer = self.integer_shape if name == "shape" else self.other_integer_shape
                argv += [flag, str(int(value)) if integer else repr(float(value))]
            elif isinstance(value, Enum):
                argv += [flag, value.value]
            elif isinstance(value, tuple):
                argv += [flag, ",".join(repr(v) for v in value)]
            elif isinstance(value, float):
                argv += [flag, repr(value)]
            else:
                argv += [flag, str(value)]
        return argv


# --- Manejadores ---


def _metadata(config: CliConfig, *extra: Tuple[str, str]) -> Tuple[Tuple[str, str], ...]:
    items = [("version", __version__), ("command", config.command.value)]
    if config.command in _NEEDS_SPEC:
        items.append(("spec", config.distribution().describe()))
    return tuple(items) + extra


def _handle_tail(config: CliConfig) -> CommandOutput:
    spec, quad = config.distribution(), config.quadrature()
    rows = [(x, iterated_tail(spec, config.s, x, quad)) for x in config.x_grid()]  # type: ignore[arg-type]
    return CommandOutput(metadata=_metadata(config, ("s", str(config.s))), header=("x", "value"), rows=rows_to_tuple(rows))


def _handle_density(config: CliConfig) -> CommandOutput:
    spec, quad = config.distribution(), config.quadrature()
    if config.s == 1:
        rows = [(x, float(density(spec, x))) for x in config.x_grid()]
    else:
        rows = [(x, iterated_density(spec, config.s, x, quad)) for x in config.x_grid()]  # type: ignore[arg-type]
    return CommandOutput(metadata=_metadata(config, ("s", str(config.s))), header=("x", "value"), rows=rows_to_tuple(rows))


def _handle_moments(config: CliConfig) -> CommandOutput:
    spec = config.distribution()
    value = iterated_moment(spec, config.s, config.m)  # type: ignore[arg-type]
    return CommandOutput(
        metadata=_metadata(config, ("s", str(config.s))), header=("m", "value"), rows=((config.m, value),)
    )


def _handle_stoploss(config: CliConfig) -> CommandOutput:
    spec, quad = config.distribution(), config.quadrature()
    order = config.order if config.order is not None else config.s - 1  # type: ignore[operator]
    rows = []
    for x in config.x_grid():
        log_value = stop_loss(spec, x, order, quad)
        value = math.exp(log_value) if log_value <= LOG_FLOAT_MAX else None
        rows.append((x, order, log_value, value))
    return CommandOutput(
        metadata=_metadata(config),
        header=("x", "order", "log_value", "value_if_representable"),
        rows=rows_to_tuple(rows),
    )


def _handle_converge(config: CliConfig) -> CommandOutput:
    spec = config.distribution()
    s_values = list(config.s_values) if config.s_values else geometric_s_values(config.s_max, config.s_points)  # type: ignore[arg-type]
    report = convergence_report(spec, config.x_grid(), s_values, config.quadrature())
    rows = list(zip(report.s_values, report.sup_distance, report.tail_at_sup))
    return CommandOutput(
        metadata=_metadata(
            config, ("limit_kind", report.limit_kind.value), ("monotone_in_s", str(report.monotone_in_s).lower())
        ),
        header=("s", "sup_distance", "tail_at_sup"),
        rows=rows_to_tuple(rows),
    )


def _handle_order(config: CliConfig) -> CommandOutput:
    result = sfr_check(
        config.distribution(),
        config.distribution(other=True),
        config.s,  # type: ignore[arg-type]
        config.x_grid(),
        config.tol,
        config.quadrature(),
    )
    return CommandOutput(
        metadata=_metadata(
            config,
            ("other", result.spec_y.describe()),
            ("s", str(config.s)),
            ("monotone", str(result.monotone_nondecreasing).lower()),
            ("max_violation", f"{result.max_violation:.12g}"),
            ("dropped_points", str(result.dropped_points)),
            ("verdict", result.verdict),
        ),
        header=("x", "log_ratio", "monotone_flag"),
        rows=rows_to_tuple(result.csv_rows()),
    )


def _handle_diff_report(config: CliConfig) -> CommandOutput:
    rate = config.rate if config.rate is not None else 1.0
    s_max = config.s_max if config.s_max is not None else 6
    rows = discrepancy_report(range(2, config.n_max + 1), range(2, s_max + 1), config.xs or _DEFAULT_XS, rate)
    return CommandOutput(
        metadata=_metadata(config, ("rate", f"{rate:.12g}")),
        header=("n", "s", "x", "paper_formula", "oracle", "abs_diff"),
        rows=tuple((r.n, r.s, r.x, r.paper_formula, r.oracle, r.abs_diff) for r in rows),
    )


def _handle_sample(config: CliConfig) -> CommandOutput:
    batch = sample_iterated(config.distribution(), config.s, config.count, config.seed)  # type: ignore[arg-type]
    return CommandOutput(
        metadata=_metadata(config, ("s", str(config.s)), ("seed", str(config.seed))),
        header=("value",),
        rows=tuple((float(v),) for v in batch.values),
    )


HANDLERS: Dict[Command, Callable[[CliConfig], CommandOutput]] = {
    Command.TAIL: _handle_tail,
    Command.DENSITY: _handle_density,
    Command.MOMENTS: _handle_moments,
    Command.STOPLOSS: _handle_stoploss,
    Command.CONVERGE: _handle_converge,
    Command.ORDER: _handle_order,
    Command.DIFF_REPORT: _handle_diff_report,
    Command.SAMPLE: _handle_sample,
}


def _one_line(message: object) -> str:
    return " ".join(str(message).split())


def run(config: CliConfig, stream: TextIO | None = None) -> int:
    """Ejecuta el comando y escribe el CSV; devuelve el código de salida."""
    try:
        output = HANDLERS[config.command](config)
        emit(render(output, get_settings().csv_significant_digits), config.output_path(), stream)
    except DomainError as exc:
        sys.stderr.write(f"error: usage: {_one_line(exc)}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        logger.debug("Fallo numérico en {}: {}", exc.operation, exc)
        sys.stderr.write(f"error: numerical: {exc.operation or 'unknown'}: {_one_line(exc)}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        # destino de --output / CSV_OUTPUT_DIR no escribible
        sys.stderr.write(f"error: usage: no se pudo escribir la salida: {_one_line(exc)}\n")
        return EXIT_USAGE
    return EXIT_OK


def build_config(**fields: object) -> CliConfig:
    try:
        return CliConfig(**fields)
    except ValidationError as exc:
        raise DomainError(_one_line(exc.errors()[0]["msg"])) from exc

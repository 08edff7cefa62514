from __future__ import annotations

import argparse
import re
import sys
from typing import List, Sequence

from .cli.commands import EXIT_USAGE, Command, CliConfig, XSpacing, build_config, run
from .core import Family
from .errors import DomainError
from .logging import setup_logging

_FAMILIES = {
    "gamma": Family.GAMMA,
    "weibull": Family.WEIBULL,
    "exp": Family.EXPONENTIAL,
    "exponential": Family.EXPONENTIAL,
}
_INTEGER_LITERAL = re.compile(r"^[+]?\d+$")


class _Parser(argparse.ArgumentParser):
    """argparse sin salida propia: los errores pasan por el contrato de una sola línea."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise DomainError(message)


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="python -m app", description="Distribuciones s-iteradas: tablas CSV")
    parser.add_argument("command", choices=[c.value for c in Command])

    spec = parser.add_argument_group("distribución")
    spec.add_argument("--family", choices=sorted(_FAMILIES))
    spec.add_argument("--shape", help="un literal entero selecciona el camino de forma entera de la Gamma")
    spec.add_argument("--scale", type=float)
    spec.add_argument("--rate", type=float)
    spec.add_argument("--other-family", choices=sorted(_FAMILIES))
    spec.add_argument("--other-shape")
    spec.add_argument("--other-scale", type=float)
    spec.add_argument("--other-rate", type=float)

    grid = parser.add_argument_group("índices y rejillas")
    grid.add_argument("--s", type=int)
    grid.add_argument("--s-max", type=int)
    grid.add_argument("--s-points", type=int)
    grid.add_argument("--s-values", type=_int_list)
    grid.add_argument("--x", type=float)
    grid.add_argument("--x-min", type=float)
    grid.add_argument("--x-max", type=float)
    grid.add_argument("--x-points", type=int)
    grid.add_argument("--x-spacing", choices=[v.value for v in XSpacing])
    grid.add_argument("--xs", type=_float_list)
    grid.add_argument("--m", type=int)
    grid.add_argument("--order", type=int)
    grid.add_argument("--n-max", type=int)

    run_opts = parser.add_argument_group("ejecución")
    run_opts.add_argument("--seed", type=int)
    run_opts.add_argument("--count", type=int)
    run_opts.add_argument("--tol", type=float)
    run_opts.add_argument("--rel-tol", type=float)
    run_opts.add_argument("--abs-tol", type=float)
    run_opts.add_argument("--output")
    return parser


def _shape(text: str | None, family: Family | None) -> tuple[float | None, bool]:
    if text is None:
        return None, False
    try:
        value = float(text)
    except ValueError as exc:
        raise DomainError(f"Forma no numérica: {text!r}") from exc
    return value, family is Family.GAMMA and bool(_INTEGER_LITERAL.match(text.strip()))


def parse_config(argv: Sequence[str]) -> CliConfig:
    args = vars(build_parser().parse_args(list(argv)))
    family = _FAMILIES.get(args.pop("family") or "")
    other_family = _FAMILIES.get(args.pop("other_family") or "")
    shape, integer_shape = _shape(args.pop("shape"), family)
    other_shape, other_integer = _shape(args.pop("other_shape"), other_family)
    fields = {key: value for key, value in args.items() if value is not None}
    for key in ("s_values", "xs"):
        if key in fields:
            fields[key] = tuple(fields[key])
    fields.update(
        family=family,
        shape=shape,
        integer_shape=integer_shape,
        other_family=other_family,
        other_shape=other_shape,
        other_integer_shape=other_integer,
    )
    return build_config(**fields)


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except DomainError as exc:
        sys.stderr.write(f"error: usage: {' '.join(str(exc).split())}\n")
        return EXIT_USAGE
    return run(config)

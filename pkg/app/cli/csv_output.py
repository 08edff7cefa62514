from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path
from typing import Any, List, Sequence, TextIO, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

__all__ = ["CommandOutput", "format_value", "render", "rows_to_tuple", "write_atomic", "emit"]


class CommandOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    metadata: Tuple[Tuple[str, str], ...]
    header: Tuple[str, ...]
    rows: Tuple[Tuple[Any, ...], ...]


def format_value(value: Any, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def render(output: CommandOutput, digits: int) -> str:
    lines: List[str] = [f"# {key}={value}" for key, value in output.metadata]
    lines.append(",".join(output.header))
    lines.extend(",".join(format_value(v, digits) for v in row) for row in output.rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: Path, text: str) -> None:
    """Escribe en un temporal del mismo directorio y lo renombra sobre el destino."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def emit(text: str, target: Path | None, stream: TextIO | None = None) -> None:
    if target is None:
        (stream or sys.stdout).write(text)
        return
    write_atomic(target, text)
    logger.info("CSV escrito en {}", target)


def rows_to_tuple(rows: Sequence[Sequence[Any]]) -> Tuple[Tuple[Any, ...], ...]:
    return tuple(tuple(row) for row in rows)

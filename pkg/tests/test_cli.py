"""Tests de la CLI: salida CSV, códigos de salida y configuración."""
import math
from pathlib import Path

import pytest

from app.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, Command, build_config
from app.errors import DomainError
from app.main import main, parse_config

TAIL_ARGS = ["tail", "--family", "gamma", "--shape", "2", "--scale", "1", "--s", "4", "--x", "2"]
MOMENTS_ARGS = ["moments", "--family", "exp", "--rate", "1", "--s", "5", "--m", "3"]
CONVERGE_ARGS = ["converge", "--family", "gamma", "--shape", "2", "--x", "1", "--s-max", "1000", "--s-points", "4"]
GOLDEN_CASES = [
    (TAIL_ARGS, "tail_gamma.csv"),
    (MOMENTS_ARGS, "moments_exp.csv"),
    (CONVERGE_ARGS, "converge_gamma.csv"),
]


def _data_rows(text: str) -> list[list[str]]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return [line.split(",") for line in lines[1:]]


def _metadata(text: str) -> dict[str, str]:
    items = [line[2:].split("=", 1) for line in text.splitlines() if line.startswith("# ")]
    return {key: value for key, value in items}


@pytest.mark.parametrize(("args", "golden"), GOLDEN_CASES)
def test_golden_files_through_output(tmp_path: Path, golden_dir: Path, args: list[str], golden: str) -> None:
    target = tmp_path / "out.csv"
    assert main(args + ["--output", str(target)]) == EXIT_OK
    assert target.read_bytes() == (golden_dir / golden).read_bytes()


@pytest.mark.parametrize(("args", "golden"), GOLDEN_CASES)
def test_golden_files_through_stdout(capsys, golden_dir: Path, args: list[str], golden: str) -> None:
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out == (golden_dir / golden).read_text(encoding="utf-8")


def test_output_dir_from_environment(monkeypatch, tmp_path: Path, golden_dir: Path) -> None:
    monkeypatch.setenv("CSV_OUTPUT_DIR", str(tmp_path / "tables"))
    assert main(TAIL_ARGS) == EXIT_OK
    assert (tmp_path / "tables" / "tail.csv").read_bytes() == (golden_dir / "tail_gamma.csv").read_bytes()


@pytest.mark.parametrize(
    "args",
    [
        ["tail", "--family", "gamma", "--shape", "2", "--x", "1"],
        ["tail", "--family", "lognormal", "--shape", "2", "--s", "2", "--x", "1"],
        ["tail", "--family", "gamma", "--shape", "-1", "--s", "2", "--x", "1"],
        ["tail", "--family", "gamma", "--shape", "2", "--s", "0", "--x", "1"],
        ["moments", "--family", "exp", "--shape", "2", "--s", "2", "--m", "1"],
        ["order", "--family", "gamma", "--shape", "2", "--s", "1", "--x", "1"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_with_two(capsys, args: list[str]) -> None:
    assert main(args) == EXIT_USAGE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.startswith("error: usage: ")
    assert captured.err.count("\n") == 1


def test_numerical_failure_exits_with_three(capsys) -> None:
    args = ["moments", "--family", "gamma", "--shape", "1.5", "--s", "200", "--m", "200"]
    assert main(args) == EXIT_NUMERICAL
    assert capsys.readouterr().err.startswith("error: numerical: iterated_moment:")


def test_integer_literal_selects_closed_form() -> None:
    assert parse_config(TAIL_ARGS).distribution().integer_shape
    assert not parse_config(["tail", "--family", "gamma", "--shape", "2.0", "--s", "4", "--x", "2"]).distribution().integer_shape
    assert not parse_config(["tail", "--family", "weibull", "--shape", "2", "--s", "4", "--x", "2"]).integer_shape


@pytest.mark.parametrize(
    "args",
    [
        TAIL_ARGS,
        MOMENTS_ARGS,
        ["converge", "--family", "weibull", "--shape", "0.5", "--x", "1", "--s-values", "1,2,3"],
        ["order", "--family", "gamma", "--shape", "2", "--other-family", "gamma", "--other-shape", "3.5",
         "--s", "2", "--x-min", "0.5", "--x-max", "10", "--x-points", "20", "--x-spacing", "log"],
        ["diff-report", "--n-max", "4", "--xs", "0.5,1"],
        ["sample", "--family", "exponential", "--rate", "2", "--s", "3", "--count", "10", "--seed", "5"],
    ],
)
def test_to_argv_round_trip(args: list[str]) -> None:
    config = parse_config(args)
    assert parse_config(config.to_argv()) == config


def test_build_config_wraps_validation_errors() -> None:
    with pytest.raises(DomainError):
        build_config(command=Command.TAIL, family="gamma", shape=2.0)


def test_converge_reaches_weibull_fixture(capsys) -> None:
    args = ["converge", "--family", "weibull", "--shape", "0.5", "--x", "1", "--s-values", "1,2,3,4,5,6,7"]
    assert main(args) == EXIT_OK
    out = capsys.readouterr().out
    rows = _data_rows(out)
    assert [row[0] for row in rows] == [str(s) for s in range(1, 8)]
    assert float(rows[-1][2]) > 0.95
    meta = _metadata(out)
    assert meta["limit_kind"] == "degenerate_one"
    assert meta["monotone_in_s"] == "true"


def test_diff_report_rows(capsys) -> None:
    assert main(["diff-report"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "n,s,x,paper_formula,oracle,abs_diff" in out.splitlines()
    assert len(_data_rows(out)) == 100


def test_order_metadata(capsys) -> None:
    args = ["order", "--family", "gamma", "--shape", "2", "--other-family", "gamma", "--other-shape", "3",
            "--s", "1", "--x-min", "0.15", "--x-max", "15", "--x-points", "100"]
    assert main(args) == EXIT_OK
    out = capsys.readouterr().out
    meta = _metadata(out)
    assert meta["monotone"] == "true"
    assert meta["verdict"] == "numerical evidence"
    assert meta["other"] == "gamma(shape=3, scale=1)"
    assert all(row[2] == "1" for row in _data_rows(out))


def test_stoploss_marks_unrepresentable_values(capsys) -> None:
    assert main(["stoploss", "--family", "exp", "--s", "2", "--order", "200", "--x", "1"]) == EXIT_OK
    row = _data_rows(capsys.readouterr().out)[0]
    assert row[1] == "200"
    assert float(row[2]) == pytest.approx(-1.0 + math.lgamma(201.0), rel=1e-9)
    assert row[3] == ""


def test_sample_is_deterministic(capsys) -> None:
    args = ["sample", "--family", "gamma", "--shape", "2", "--s", "4", "--count", "20", "--seed", "7"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out == first
    assert len(_data_rows(first)) == 20
    assert _metadata(first)["seed"] == "7"


def test_invalid_log_level_falls_back(monkeypatch, capsys, golden_dir: Path) -> None:
    monkeypatch.setenv("LOG_LEVEL", "HTTP")
    assert main(TAIL_ARGS) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out == (golden_dir / "tail_gamma.csv").read_text(encoding="utf-8")
    assert "HTTP" in captured.err


def test_unwritable_output_exits_with_two(capsys, tmp_path: Path) -> None:
    blocker = tmp_path / "occupied"
    blocker.write_text("", encoding="utf-8")
    assert main(TAIL_ARGS + ["--output", str(blocker / "out.csv")]) == EXIT_USAGE
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.startswith("error: usage: no se pudo escribir la salida:")
    assert captured.err.count("\n") == 1


@pytest.mark.parametrize(
    "args",
    [
        ["tail", "--family", "gamma", "--shape", "3.7", "--s", "2", "--x", "2.55"],
        ["tail", "--family", "gamma", "--shape", "3.7", "--s", "3", "--x", "3.9"],
        ["order", "--family", "gamma", "--shape", "1.0", "--other-family", "gamma", "--other-shape", "3.7",
         "--s", "2", "--x-min", "0.15", "--x-max", "15", "--x-points", "100"],
    ],
)
def test_quadrature_near_converged_panels_exit_cleanly(capsys, args: list[str]) -> None:
    assert main(args) == EXIT_OK
    assert "error:" not in capsys.readouterr().err

"""Tests de convoluciones s-iteradas y del diagnóstico de diferencias."""
import math

import numpy as np
import pytest

from app.convolve import (
    ConvolutionState,
    conv_with_base,
    convolution_moment_log,
    discrepancy_report,
    gamma_closed_iterated_density,
    gamma_difference_oracle,
    gamma_difference_paper_formula,
    gamma_iterated_density_recursion,
    general_iterated_convolution,
    uniform_grid,
)
from app.core import DistributionSpec, tail
from app.errors import DomainError

EXP1 = DistributionSpec.exponential(1.0)


def test_uniform_grid() -> None:
    grid = uniform_grid(5.0, 0.25)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(5.0)
    assert grid.size == 21
    with pytest.raises(DomainError):
        uniform_grid(5.0, 0.0)


def test_conv_with_exponential_base() -> None:
    grid = uniform_grid(5.0, 0.01)
    g = np.exp(-grid)
    assert conv_with_base(EXP1, grid, g, 2.0) == pytest.approx(2.0 * math.exp(-2.0), rel=1e-7)
    assert conv_with_base(EXP1, grid, g, 1.2345) == pytest.approx(1.2345 * math.exp(-1.2345), rel=1e-7)
    assert conv_with_base(EXP1, grid, g, 0.0) == 0.0


def test_conv_with_gamma_base() -> None:
    grid = uniform_grid(5.0, 0.01)
    value = conv_with_base(DistributionSpec.gamma(2.0), grid, np.exp(-grid), 3.0)
    assert value == pytest.approx(4.5 * math.exp(-3.0), rel=1e-7)


def test_conv_with_base_rejects_points_outside_grid() -> None:
    grid = uniform_grid(5.0, 0.25)
    with pytest.raises(DomainError):
        conv_with_base(EXP1, grid, np.exp(-grid), 6.0)
    with pytest.raises(DomainError):
        conv_with_base(EXP1, grid, np.exp(-grid[:-1]), 1.0)
    with pytest.raises(DomainError):
        conv_with_base(EXP1, np.array([0.0, 1.0, 3.0, 4.0]), np.ones(4), 1.0)


def test_recursion_small_cases() -> None:
    grid = uniform_grid(5.0, 0.25)
    single = gamma_iterated_density_recursion(1, 1.0, 3, grid)
    assert np.allclose(single.density_values, np.exp(-grid), rtol=1e-14)
    assert single.error_estimate == 0.0

    pair = gamma_iterated_density_recursion(2, 1.0, 2, grid)
    expected = 0.5 * np.exp(-grid) * (1.0 + grid)
    assert np.max(np.abs(pair.density_values - expected)) < 1e-9
    assert pair.value_at(1.0) == pytest.approx(math.exp(-1.0), rel=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("s", [2, 3, 5, 10])
def test_recursion_matches_closed_form(n: int, s: int) -> None:
    grid = uniform_grid(5.0, 0.25)
    state = gamma_iterated_density_recursion(n, 1.0, s, grid)
    closed = np.array([gamma_closed_iterated_density(n, 1.0, s, float(x)) for x in grid])
    assert np.max(np.abs(state.density_values - closed)) < 1e-8
    assert state.error_estimate < 1e-6


def test_closed_density_respects_rate() -> None:
    assert gamma_closed_iterated_density(2, 1.0, 2, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-13)
    assert gamma_closed_iterated_density(3, 2.0, 4, 0.5) == pytest.approx(
        2.0 * gamma_closed_iterated_density(3, 1.0, 4, 1.0), rel=1e-13
    )
    with pytest.raises(DomainError):
        gamma_closed_iterated_density(3, 1.0, 1, 1.0)


def test_density_tends_to_exponential() -> None:
    xs = np.linspace(0.0, 10.0, 101)
    sups = [
        max(abs(gamma_closed_iterated_density(3, 1.0, s, float(x)) - math.exp(-x)) for x in xs)
        for s in (10, 100, 1000)
    ]
    assert sups[0] > sups[1] > sups[2]
    assert sups[2] < 0.01


def test_second_iterate_of_erlang_sum_is_scaled_tail() -> None:
    grid = uniform_grid(6.0, 0.25)
    state = gamma_iterated_density_recursion(3, 1.0, 2, grid)
    assert np.max(np.abs(3.0 * state.density_values - tail(DistributionSpec.erlang(3), grid))) < 1e-9


def test_general_recursion_with_gamma_base() -> None:
    grid = uniform_grid(5.0, 0.25)
    state = general_iterated_convolution(DistributionSpec.erlang(2), 2, 2, grid)
    expected = np.exp(-grid) * (1.0 + grid + grid**2 / 2.0 + grid**3 / 6.0) / 4.0
    assert np.max(np.abs(state.density_values - expected)) < 1e-6
    assert isinstance(state, ConvolutionState)
    assert state.n == 2 and state.s.s == 2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("s", [2, 3, 5, 10])
def test_general_recursion_with_exponential_base_matches_specialised(n: int, s: int) -> None:
    grid = uniform_grid(5.0, 0.25)
    general = general_iterated_convolution(EXP1, n, s, grid)
    special = gamma_iterated_density_recursion(n, 1.0, s, grid)
    closed = np.array([gamma_closed_iterated_density(n, 1.0, s, float(x)) for x in grid])
    assert np.max(np.abs(general.density_values - special.density_values)) < 1e-8
    assert np.max(np.abs(general.density_values - closed)) < 1e-8


def test_general_recursion_rejects_singular_base() -> None:
    with pytest.raises(DomainError):
        general_iterated_convolution(DistributionSpec.gamma(0.5), 2, 2, uniform_grid(5.0, 0.25))
    with pytest.raises(DomainError):
        general_iterated_convolution(EXP1, 1, 2, uniform_grid(5.0, 0.25))


def test_state_is_immutable() -> None:
    state = gamma_iterated_density_recursion(2, 1.0, 3, uniform_grid(3.0, 0.25))
    with pytest.raises(ValueError):
        state.density_values[0] = 1.0
    assert state.mass(tail_beyond=0.0) < 1.0


def test_convolution_moments() -> None:
    assert convolution_moment_log(EXP1, 3, 2) == pytest.approx(math.log(12.0), rel=1e-13)
    weibull = DistributionSpec.weibull(2.0)
    assert math.exp(convolution_moment_log(weibull, 2, 2)) == pytest.approx(2.0 + 2.0 * math.pi / 4.0, rel=1e-12)
    assert convolution_moment_log(weibull, 0, 2) == -math.inf
    assert convolution_moment_log(weibull, 0, 0) == 0.0


def test_difference_oracle_and_printed_formula() -> None:
    assert gamma_difference_oracle(2, 1.0, 2, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
    row = gamma_difference_paper_formula(2, 1.0, 2, 1.0)
    assert row.paper_formula == pytest.approx(0.0, abs=1e-15)
    assert row.oracle == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert not row.agrees

    row = gamma_difference_paper_formula(3, 1.0, 2, 1.0)
    assert row.paper_formula == pytest.approx(-0.5 * math.exp(-1.0), rel=1e-12)
    assert row.oracle == pytest.approx(0.5 * math.exp(-1.0), rel=1e-12)
    with pytest.raises(DomainError):
        gamma_difference_oracle(1, 1.0, 2, 1.0)


def test_discrepancy_report() -> None:
    rows = discrepancy_report(range(2, 7), range(2, 7), (0.5, 1.0, 2.0, 5.0))
    assert len(rows) == 100
    assert {(row.n, row.s) for row in rows} == {(n, s) for n in range(2, 7) for s in range(2, 7)}
    assert all(row.abs_diff == pytest.approx(abs(row.paper_formula - row.oracle)) for row in rows)
    assert sum(1 for row in rows if not row.agrees) > 50

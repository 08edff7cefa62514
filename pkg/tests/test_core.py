"""Tests de las primitivas paramétricas."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core import (
    DistributionSpec,
    density,
    failure_rate,
    hockey_stick,
    inverse_tail,
    log_binomial,
    log_hockey_stick,
    log_raw_moment,
    log_tail,
    moment_table,
    raw_moment,
    tail,
    variance,
)
from app.errors import DomainError, IterDistError, MomentOverflowError, NumericalError, TailUnderflowError


@settings(max_examples=60, deadline=None)
@given(
    rate=st.floats(min_value=0.05, max_value=20.0),
    x=st.floats(min_value=0.0, max_value=30.0),
)
def test_shape_one_families_coincide(rate: float, x: float) -> None:
    expo = DistributionSpec.exponential(rate)
    gamma = DistributionSpec.gamma(1.0, 1.0 / rate)
    weibull = DistributionSpec.weibull(1.0, 1.0 / rate)
    for other in (gamma, weibull):
        assert density(other, x) == pytest.approx(density(expo, x), rel=1e-12)
        assert tail(other, x) == pytest.approx(tail(expo, x), rel=1e-12)
        for k in range(6):
            assert log_raw_moment(other, k) == pytest.approx(log_raw_moment(expo, k), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=10),
    scale=st.floats(min_value=0.2, max_value=5.0),
    x=st.floats(min_value=0.0, max_value=40.0),
)
def test_erlang_and_gamma_families_coincide(n: int, scale: float, x: float) -> None:
    erlang = DistributionSpec.erlang(n, scale)
    gamma = DistributionSpec.gamma(float(n), scale)
    assert density(gamma, x) == pytest.approx(density(erlang, x), rel=1e-10, abs=1e-300)
    assert tail(gamma, x) == pytest.approx(tail(erlang, x), rel=1e-10, abs=1e-300)
    for k in range(11):
        assert log_raw_moment(gamma, k) == pytest.approx(log_raw_moment(erlang, k), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    family=st.sampled_from(["gamma", "weibull"]),
    shape=st.floats(min_value=0.3, max_value=8.0),
    scale=st.floats(min_value=0.2, max_value=5.0),
)
def test_log_moments_are_convex_in_order(family: str, shape: float, scale: float) -> None:
    spec = getattr(DistributionSpec, family)(shape, scale)
    logs = np.array([log_raw_moment(spec, k) for k in np.linspace(0.0, 30.0, 61)])
    assert np.all(np.diff(logs, 2) >= -1e-10)


def test_constructors_reject_invalid_parameters() -> None:
    with pytest.raises(DomainError):
        DistributionSpec.gamma(0.0)
    with pytest.raises(DomainError):
        DistributionSpec.weibull(2.0, scale=-1.0)
    with pytest.raises(DomainError):
        DistributionSpec.exponential(float("inf"))
    with pytest.raises(DomainError):
        DistributionSpec.erlang(2.5)  # type: ignore[arg-type]
    with pytest.raises(ValueError):
        DistributionSpec.gamma(float("nan"))


def test_erlang_is_explicit_integer_path() -> None:
    assert DistributionSpec.erlang(3).integer_shape
    assert not DistributionSpec.gamma(3.0).integer_shape
    assert DistributionSpec.erlang(3, 2.0).describe() == "gamma(shape=3, scale=2)"
    assert DistributionSpec.exponential(2.0).describe() == "exponential(rate=2)"


def test_raw_moments() -> None:
    assert raw_moment(DistributionSpec.gamma(2.0), 3) == pytest.approx(24.0, rel=1e-12)
    assert raw_moment(DistributionSpec.weibull(2.0), 1) == pytest.approx(math.gamma(1.5), rel=1e-12)
    assert raw_moment(DistributionSpec.exponential(2.0), 2) == pytest.approx(0.5, rel=1e-12)
    assert raw_moment(DistributionSpec.gamma(3.7, 2.0), 0) == 1.0
    assert variance(DistributionSpec.gamma(2.0, 3.0)) == pytest.approx(18.0, rel=1e-12)


def test_raw_moment_overflow_reports_log() -> None:
    with pytest.raises(MomentOverflowError) as info:
        raw_moment(DistributionSpec.exponential(1.0), 200)
    assert info.value.log_value == pytest.approx(math.lgamma(201.0), rel=1e-12)
    assert info.value.operation == "raw_moment"


def test_density_and_tail_examples() -> None:
    gamma = DistributionSpec.gamma(3.0)
    assert density(gamma, 1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-12)
    assert tail(gamma, 1.0) == pytest.approx(2.5 * math.exp(-1.0), rel=1e-12)
    assert tail(DistributionSpec.weibull(2.0), 2.0) == pytest.approx(math.exp(-4.0), rel=1e-12)
    values = density(DistributionSpec.exponential(1.0), np.array([0.0, 1.0, 2.0]))
    assert np.allclose(values, np.exp(-np.array([0.0, 1.0, 2.0])), rtol=1e-14)


def test_log_tail_beyond_underflow() -> None:
    gamma = DistributionSpec.gamma(2.0)
    assert log_tail(gamma, 1000.0) == pytest.approx(-1000.0 + math.log(1001.0), rel=1e-12)
    assert log_tail(DistributionSpec.weibull(2.0), 40.0) == pytest.approx(-1600.0, rel=1e-14)


def test_failure_rate() -> None:
    assert failure_rate(DistributionSpec.exponential(3.0), 2.0) == pytest.approx(3.0, rel=1e-12)
    assert failure_rate(DistributionSpec.gamma(2.0), 1.5) == pytest.approx(1.5 / 2.5, rel=1e-10)
    with pytest.raises(TailUnderflowError):
        failure_rate(DistributionSpec.weibull(2.0), 30.0)
    with pytest.raises(DomainError):
        failure_rate(DistributionSpec.weibull(2.0), 0.0)


@pytest.mark.parametrize(
    "spec",
    [DistributionSpec.gamma(0.5, 2.0), DistributionSpec.erlang(4), DistributionSpec.weibull(0.7), DistributionSpec.exponential(3.0)],
)
@pytest.mark.parametrize("p", [0.9, 0.5, 1e-3, 1e-12])
def test_inverse_tail(spec: DistributionSpec, p: float) -> None:
    assert tail(spec, inverse_tail(spec, p)) == pytest.approx(p, rel=1e-8)


def test_point_validation() -> None:
    with pytest.raises(DomainError):
        tail(DistributionSpec.exponential(), -1.0)
    with pytest.raises(DomainError):
        density(DistributionSpec.exponential(), float("nan"))
    with pytest.raises(DomainError):
        inverse_tail(DistributionSpec.exponential(), 0.0)


def test_hockey_stick() -> None:
    assert hockey_stick(3, 4) == math.comb(8, 4)
    assert log_hockey_stick(3, 4) == pytest.approx(math.log(70.0), rel=1e-12)
    assert log_binomial(5, 2) == pytest.approx(math.log(10.0), rel=1e-12)
    with pytest.raises(DomainError):
        log_binomial(2, 3)


@given(k=st.integers(min_value=0, max_value=60), m=st.integers(min_value=0, max_value=60))
def test_hockey_stick_matches_log_variant(k: int, m: int) -> None:
    assert math.log(hockey_stick(k, m)) == pytest.approx(log_hockey_stick(k, m), rel=1e-11, abs=1e-11)


def test_moment_table_is_cached() -> None:
    spec = DistributionSpec.gamma(2.5, 1.5)
    table = moment_table(spec, 6)
    assert table is moment_table(spec, 6)
    assert table.log_moments[0] == 0.0
    assert table.order == 6
    assert table.moment(3) == pytest.approx(raw_moment(spec, 3), rel=1e-12)


def test_error_hierarchy() -> None:
    assert issubclass(DomainError, ValueError)
    assert issubclass(DomainError, IterDistError)
    assert issubclass(NumericalError, RuntimeError)
    assert issubclass(TailUnderflowError, NumericalError)

"""Tests del muestreador Monte-Carlo del s-iterado."""
import math

import numpy as np
import pytest

from app.core import DistributionSpec
from app.errors import DomainError
from app.iterate import IterationIndex, iterated_mean, iterated_tail, iterated_variance
from app.sampler import SampleBatch, empirical_tail, ks_distance, sample_iterated

CASES = [
    (DistributionSpec.gamma(2.0), 4),
    (DistributionSpec.gamma(0.5), 3),
    (DistributionSpec.weibull(2.0), 3),
    (DistributionSpec.exponential(1.0), 7),
]


def test_sampling_is_reproducible_across_workers() -> None:
    spec = DistributionSpec.weibull(0.7)
    serial = sample_iterated(spec, 3, 10_000, seed=7, workers=1, chunk_size=1000)
    threaded = sample_iterated(spec, 3, 10_000, seed=7, workers=4, chunk_size=1000)
    assert np.array_equal(serial.values, threaded.values)
    assert not np.array_equal(serial.values, sample_iterated(spec, 3, 10_000, seed=8, chunk_size=1000).values)


@pytest.mark.parametrize(("spec", "s"), CASES + [(DistributionSpec.weibull(0.5), 3)])
def test_sample_moments_and_tail(spec: DistributionSpec, s: int) -> None:
    count = 100_000
    batch = sample_iterated(spec, s, count, seed=2024)
    se_mean = math.sqrt(iterated_variance(spec, s) / count)
    assert abs(batch.values.mean() - iterated_mean(spec, s)) < 4.0 * se_mean

    x = iterated_mean(spec, s)
    p = iterated_tail(spec, s, x)
    assert abs(empirical_tail(batch, x) - p) < 4.0 * math.sqrt(p * (1.0 - p) / count)


@pytest.mark.parametrize(("spec", "s"), CASES)
def test_ks_passes_in_most_repetitions(spec: DistributionSpec, s: int) -> None:
    # valor crítico de Kolmogorov-Smirnov al 1 %
    count = 100_000
    critical = 1.63 / math.sqrt(count)
    passed = sum(ks_distance(sample_iterated(spec, s, count, seed=seed)) < critical for seed in range(100))
    assert passed >= 95


def test_ks_detects_wrong_sample() -> None:
    spec = DistributionSpec.exponential(1.0)
    batch = SampleBatch(spec=spec, s=IterationIndex(s=2), seed=0, values=np.full(100, math.log(2.0)), count=100)
    assert ks_distance(batch) >= 0.5 - 1e-9


def test_first_iterate_is_the_base_law() -> None:
    batch = sample_iterated(DistributionSpec.gamma(3.0), 1, 50_000, seed=3)
    assert abs(batch.values.mean() - 3.0) < 4.0 * math.sqrt(3.0 / 50_000)


def test_batch_csv_lines() -> None:
    batch = sample_iterated(DistributionSpec.gamma(2.0), 4, 3, seed=7)
    lines = batch.csv_lines()
    assert lines[:4] == ["# spec=gamma(shape=2, scale=1)", "# s=4", "# seed=7", "value"]
    assert len(lines) == 7
    assert float(lines[4]) == pytest.approx(batch.values[0], rel=1e-11)


def test_sampling_validation() -> None:
    with pytest.raises(DomainError):
        sample_iterated(DistributionSpec.gamma(2.0), 2, 0, seed=1)
    with pytest.raises(DomainError):
        sample_iterated(DistributionSpec.gamma(2.0), 2, 10, seed=-1)
    with pytest.raises(DomainError):
        sample_iterated(DistributionSpec.gamma(2.0), 0, 10, seed=1)
    batch = sample_iterated(DistributionSpec.gamma(2.0), 2, 10, seed=1)
    with pytest.raises(ValueError):
        batch.values[0] = 1.0

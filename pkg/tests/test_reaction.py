import math

import numpy as np
import pytest
from scipy.special import gammainc

from dsskit.errors import DomainError, InvalidParamsError
from dsskit.reaction import (
    ReactionTimeSampler,
    ShiftedGammaParams,
    cdf,
    pdf,
    quantile,
    sample,
)
from dsskit.solvers import bisect


def test_default_moments():
    params = ShiftedGammaParams()
    assert params.mean == pytest.approx(0.7)
    assert params.variance == pytest.approx(0.045)


def test_samples_respect_shift_and_mean():
    params = ShiftedGammaParams()
    n = 100_000
    draws = np.asarray(sample(params, seed=11, n=n))
    assert draws.min() >= params.t0
    stderr = math.sqrt(params.variance / n)
    assert abs(draws.mean() - params.mean) <= 3 * stderr


def test_sampler_is_deterministic():
    first = ReactionTimeSampler(seed=5).sample(50)
    second = ReactionTimeSampler(seed=5).sample(50)
    other = ReactionTimeSampler(seed=6).sample(50)
    assert first == second
    assert first != other


def test_sample_edge_counts():
    sampler = ReactionTimeSampler()
    assert sampler.sample(0) == []
    with pytest.raises(DomainError):
        sampler.sample(-1)


def test_metadata():
    meta = ReactionTimeSampler(seed=42).metadata()
    assert meta["algorithm"] == "PCG64"
    assert meta["seed"] == 42
    assert meta["distribution"] == "shifted_gamma"
    assert (meta["t0"], meta["k"], meta["theta"]) == (0.4, 2.0, 0.15)


def test_density_is_zero_below_shift():
    params = ShiftedGammaParams()
    assert pdf(params, 0.3) == 0.0
    assert cdf(params, 0.4) == 0.0
    assert pdf(params, 0.7) > 0.0


def test_quantile():
    params = ShiftedGammaParams()
    probs = [0.01, 0.1, 0.5, 0.9, 0.99]
    values = [quantile(params, p) for p in probs]
    assert values == sorted(values)
    assert values[0] > params.t0
    for p, t in zip(probs, values):
        assert cdf(params, t) == pytest.approx(p, abs=1e-9)


def test_exponential_quantile_closed_form():
    params = ShiftedGammaParams(t0=0.4, k=1.0, theta=0.3)
    assert quantile(params, 1 - math.exp(-1)) == pytest.approx(0.7, abs=1e-9)


def test_median_matches_incomplete_gamma_root():
    params = ShiftedGammaParams()
    root = bisect(
        lambda t: gammainc(params.k, (t - params.t0) / params.theta) - 0.5,
        params.t0,
        params.t0 + 50 * params.theta,
        tol=1e-12,
    ).root
    assert quantile(params, 0.5) == pytest.approx(root, abs=1e-9)


def test_concentrated_distribution():
    params = ShiftedGammaParams(t0=0.7, k=1e-6, theta=1e-6)
    draws = sample(params, seed=2, n=1000)
    assert all(t >= 0.7 for t in draws)
    assert draws == pytest.approx([0.7] * 1000, abs=1e-5)


def test_sample_variance():
    params = ShiftedGammaParams()
    draws = np.asarray(sample(params, seed=13, n=100_000))
    # 样本方差的相对标准误约为 sqrt((2 + 6 / k) / n)
    assert draws.var(ddof=1) == pytest.approx(params.variance, rel=0.03)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_outside_open_interval(p):
    with pytest.raises(DomainError):
        quantile(ShiftedGammaParams(), p)


@pytest.mark.parametrize(
    "kwargs", [{"k": 0.0}, {"theta": -0.1}, {"t0": -0.2}, {"k": math.nan}]
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParamsError):
        ShiftedGammaParams(**kwargs)

from __future__ import annotations

import math

import numpy as np
import pytest

from infovol import mdhsim
from infovol.errors import ArgumentError


def test_zero_information_gives_zero_series():
    s = mdhsim.simulate(mdhsim.MdhParams(1.0, 1.0, 1.0, mdhsim.Constant(0.0), n=100, seed=1))
    assert not s.returns.values.any() and not s.volume.values.any()


def test_constant_info_return_variance():
    n = 100_000
    s = mdhsim.simulate(mdhsim.MdhParams(1.0, 1.0, 1.0, mdhsim.Constant(4.0), n=n, seed=2))
    r = s.returns.values
    v = r.var()
    # standard error of the sample variance of a N(0, 4) sample
    se = 4.0 * math.sqrt(2.0 / n)
    assert abs(v - 4.0) < 3 * se


def test_same_seed_same_sample_and_seed_only_changes_values():
    p = mdhsim.MdhParams(0.01, 3.0, 1.0, mdhsim.Poisson(2.0), n=500, seed=9)
    a, b = mdhsim.simulate(p), mdhsim.simulate(p)
    for x, y in zip(a, b):
        assert x.values.tobytes() == y.values.tobytes()
    q = mdhsim.MdhParams(0.01, 3.0, 1.0, mdhsim.Poisson(2.0), n=500, seed=10)
    c = mdhsim.simulate(q)
    assert len(c.returns) == len(a.returns) == 500
    assert not np.array_equal(c.returns.values, a.returns.values)
    assert {k: v for k, v in q.to_dict().items() if k != "seed"} == \
        {k: v for k, v in p.to_dict().items() if k != "seed"}


def test_info_is_non_negative_and_lengths_match():
    for proc in (mdhsim.Poisson(0.5), mdhsim.LogNormal(0.0, 1.0), mdhsim.Constant(2.0)):
        s = mdhsim.simulate(mdhsim.MdhParams(0.01, 1.0, 0.5, proc, n=1000, seed=3))
        assert (s.info.values >= 0).all()
        assert len(s.returns) == len(s.volume) == len(s.info) == 1000


def test_theoretical_covariance_examples():
    assert mdhsim.theoretical_r2v_cov(mdhsim.MdhParams(1.0, 3.0, 1.0, mdhsim.Constant(5.0))) == 0.0
    assert mdhsim.theoretical_r2v_cov(mdhsim.MdhParams(1.0, 3.0, 1.0, mdhsim.Poisson(2.0))) == 6.0
    assert mdhsim.theoretical_r2v_cov(mdhsim.MdhParams(1.0, 3.0, 1.0, mdhsim.LogNormal(0.0, 0.0))) == 0.0


def test_covariance_uses_squared_return_scale():
    # sigma1 = 0.1 distinguishes sigma1^2 * mu2 * lam (0.02) from sigma1 * mu2 * lam (0.2)
    p = mdhsim.MdhParams(0.1, 1.0, 1.0, mdhsim.Poisson(2.0), n=400_000, seed=4)
    s = mdhsim.simulate(p)
    c = np.cov(s.returns.values ** 2, s.volume.values)[0, 1]
    assert c == pytest.approx(0.02, rel=0.1)


def test_lognormal_variance_formula():
    p = mdhsim.LogNormal(0.3, 0.5)
    x = p.draw(np.random.default_rng(0), 2_000_000)
    assert x.var() == pytest.approx(p.variance, rel=0.02)


def test_conditional_normality_given_info():
    from infovol._special import kolmogorov_sf

    k = 3.0
    s = mdhsim.simulate(mdhsim.MdhParams(0.5, 1.0, 1.0, mdhsim.Constant(k), n=20_000, seed=5))
    z = np.sort(s.returns.values / (0.5 * math.sqrt(k)))
    cdf = 0.5 * (1.0 + np.array([math.erf(v / math.sqrt(2.0)) for v in z]))
    n = z.size
    d = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    assert kolmogorov_sf(math.sqrt(n) * d) > 0.01


def test_negative_volume_warning(caplog):
    with caplog.at_level("WARNING"):
        mdhsim.simulate(mdhsim.MdhParams(1.0, 0.1, 5.0, mdhsim.Poisson(1.0), n=1000, seed=0))
    assert "negative" in caplog.text


def test_parameter_validation():
    with pytest.raises(ArgumentError):
        mdhsim.MdhParams(1.0, 1.0, 1.0, n=0)
    with pytest.raises(ArgumentError):
        mdhsim.MdhParams(-1.0, 1.0, 1.0)
    with pytest.raises(ArgumentError):
        mdhsim.Poisson(0.0)
    with pytest.raises(ArgumentError):
        mdhsim.LogNormal(0.0, -1.0)
    with pytest.raises(ArgumentError):
        mdhsim.Constant(-1.0)

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infovol import evalstats as ev
from infovol.errors import ArgumentError, DegenerateInputError, ReliabilityError
from infovol.garchcore import FitOptions, ModelSpec, ParamVector, simulate

from oracles import ks_statistic, pearson

finite = st.floats(-1e6, 1e6, allow_nan=False)


# -- Mincer-Zarnowitz / OLS --------------------------------------------------

def test_mz_hand_example():
    res = ev.ols_line([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])
    assert res.a == pytest.approx(2.0, abs=1e-10)
    assert res.b == pytest.approx(0.0, abs=1e-10)
    assert res.r_squared == pytest.approx(1.0, abs=1e-10)


def test_mz_perfect_forecast():
    r = np.random.default_rng(0).normal(size=100)
    res = ev.mz_regression(r * r, r)
    assert (res.a, res.r_squared) == (pytest.approx(1.0), pytest.approx(1.0))
    assert abs(res.b) < 1e-12
    assert res.f_p == 0.0


def test_mz_against_statsmodels():
    sm = pytest.importorskip("statsmodels.api")
    rng = np.random.default_rng(1)
    x = rng.exponential(size=300)
    y = 0.3 * x + rng.normal(size=300)
    ours = ev.ols_line(x, y)
    ref = sm.OLS(y, sm.add_constant(x)).fit()
    assert ours.b == pytest.approx(ref.params[0], rel=1e-10)
    assert ours.a == pytest.approx(ref.params[1], rel=1e-10)
    assert ours.r_squared == pytest.approx(ref.rsquared, rel=1e-10)
    assert ours.f_stat == pytest.approx(ref.fvalue, rel=1e-10)
    assert ours.f_p == pytest.approx(ref.f_pvalue, rel=1e-8)


def test_mz_independent_forecasts_calibrated():
    rng = np.random.default_rng(2)
    r2 = []
    rejections = 0
    for _ in range(200):
        res = ev.mz_regression(rng.exponential(size=10_000), rng.normal(size=10_000))
        r2.append(res.r_squared)
        rejections += res.f_p < 0.05
    assert np.median(r2) < 0.001
    assert 2 <= rejections <= 20


def test_mz_errors():
    with pytest.raises(DegenerateInputError):
        ev.mz_regression(np.ones(20), np.arange(20.0))
    with pytest.raises(ArgumentError):
        ev.ols_line([1.0, 2.0], [1.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, 30, elements=finite), arrays(np.float64, 30, elements=finite))
def test_r_squared_is_pcc_squared(x, y):
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    mz = ev.ols_line(x, y)
    pc = ev.pcc_test(x, y)
    assert 0.0 <= mz.r_squared <= 1.0 and 0.0 <= mz.f_p <= 1.0
    assert mz.r_squared == pytest.approx(pc.rho ** 2, abs=1e-10)


# -- Pearson -----------------------------------------------------------------

def test_pcc_examples():
    x = np.random.default_rng(3).normal(size=50)
    assert ev.pcc_test(x, 3 * x + 1).rho == pytest.approx(1.0)
    assert ev.pcc_test(x, 3 * x + 1).p_value < 1e-12
    assert ev.pcc_test(x, -x).rho == pytest.approx(-1.0)
    y = np.random.default_rng(4).normal(size=50)
    assert ev.pcc_test(x, y).rho == pytest.approx(pearson(list(x), list(y)), abs=1e-13)
    with pytest.raises(DegenerateInputError):
        ev.pcc_test(np.ones(20), np.arange(20.0))


def test_pcc_pvalue_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(5)
    x = rng.normal(size=40)
    y = 0.2 * x + rng.normal(size=40)
    assert ev.pcc_test(x, y).p_value == pytest.approx(stats.pearsonr(x, y)[1], rel=1e-9)


def test_pcc_pvalues_uniform_under_independence():
    rng = np.random.default_rng(6)
    ps = np.array([ev.pcc_test(rng.normal(size=10_000), rng.normal(size=10_000)).p_value
                   for _ in range(300)])
    # Kolmogorov distance to the uniform cdf
    ps.sort()
    d = np.max(np.abs(ps - np.arange(1, ps.size + 1) / ps.size))
    assert d < 1.63 / np.sqrt(ps.size)


# -- likelihood ratio --------------------------------------------------------

def test_lr_examples():
    eq = ev.lr_test(-100.0, -100.0)
    assert eq.statistic == 0.0 and eq.p_value == 1.0
    res = ev.lr_test(-100.0, -105.0, 1)
    assert res.statistic == pytest.approx(10.0)
    assert res.p_value == pytest.approx(0.001565402258, abs=1e-9)
    worse = ev.lr_test(-100.0, -97.0)
    assert worse.statistic == 0.0 and worse.raw_statistic == pytest.approx(-6.0)
    with pytest.raises(ArgumentError):
        ev.lr_test(float("nan"), 1.0)


@settings(max_examples=100, deadline=None)
@given(finite, finite, st.floats(-1e5, 1e5))
def test_lr_shift_invariance(a, b, c):
    x, y = ev.lr_test(a, b), ev.lr_test(a + c, b + c)
    assert x.statistic == pytest.approx(y.statistic, abs=1e-6 * max(1.0, abs(a), abs(b), abs(c)))


def test_lr_null_distribution_percentile():
    # identical models: twice the NLLH difference from nested OLS fits on pure noise
    rng = np.random.default_rng(7)
    stats = []
    for _ in range(1000):
        y = rng.normal(size=200)
        x = rng.normal(size=200)
        n = y.size
        s0 = np.mean((y - y.mean()) ** 2)
        fit = ev.ols_line(x, y)
        s1 = np.mean((y - fit.a * x - fit.b) ** 2)
        stats.append(ev.lr_test(0.5 * n * np.log(s0), 0.5 * n * np.log(s1)).statistic)
    q95 = np.quantile(stats, 0.95)
    assert 3.4 <= q95 <= 4.4


# -- Kolmogorov-Smirnov ------------------------------------------------------

def test_ks_examples():
    assert ev.ks_two_sample([1, 2, 3, 4], [3, 4, 5, 6]).statistic == 0.5
    same = ev.ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert same.statistic == 0.0 and same.p_value == 1.0
    assert ev.ks_two_sample([-3.0, -2.0], [1.0, 5.0, 7.0]).statistic == 1.0
    with pytest.raises(ArgumentError):
        ev.ks_two_sample([], [1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=30),
       st.lists(st.integers(-20, 20), min_size=1, max_size=30))
def test_ks_matches_bruteforce_and_is_symmetric(a, b):
    ab, ba = ev.ks_two_sample(a, b), ev.ks_two_sample(b, a)
    assert ab.statistic == pytest.approx(ks_statistic(a, b), abs=1e-15)
    assert ab.statistic == ba.statistic
    assert 0.0 <= ab.statistic <= 1.0 and 0.0 <= ab.p_value <= 1.0


def test_ks_against_scipy():
    stats = pytest.importorskip("scipy.stats")
    sp = pytest.importorskip("scipy.special")
    rng = np.random.default_rng(8)
    a, b = rng.normal(size=300), rng.normal(0.2, 1.0, size=250)
    ours = ev.ks_two_sample(a, b)
    assert ours.statistic == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-15)
    ne = 300 * 250 / 550
    assert ours.p_value == pytest.approx(sp.kolmogorov(np.sqrt(ne) * ours.statistic), abs=1e-12)


# -- segment bootstrap -------------------------------------------------------

@pytest.fixture(scope="module")
def small_garch():
    p = ParamVector(0.0, 4e-7, 0.1, 0.5)
    return simulate(ModelSpec("GARCH"), p, 1500, seed=3)


def test_bootstrap_zero_exog_gives_identical_distributions(small_garch):
    n = len(small_garch)
    bc = ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch, np.zeros(n),
                              n_segments=10, seg_len=300, seed=1,
                              options=FitOptions(restarts=2))
    np.testing.assert_allclose(bc.nllh_base, bc.nllh_extended, rtol=1e-6)
    assert bc.ks_p > 0.99


def test_bootstrap_split_points_and_determinism(small_garch):
    n = len(small_garch)
    x = np.random.default_rng(0).exponential(size=n)
    kw = dict(n_segments=12, seg_len=400, seed=5, options=FitOptions(restarts=1))
    a = ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch, x, **kw)
    b = ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch, x, **kw)
    assert a.to_dict() == b.to_dict()
    assert np.all(a.split_points >= 400) and np.all(a.split_points <= n - 400)
    assert len(a.nllh_base) == len(a.nllh_extended) <= 12
    assert 0.0 <= a.ks_stat <= 1.0


def test_bootstrap_fits_use_only_training_half(small_garch, monkeypatch):
    seen = []
    real = ev.fit

    def spy(spec, r, *args, **kw):
        seen.append(np.asarray(r).copy())
        return real(spec, r, *args, **kw)

    monkeypatch.setattr(ev, "fit", spy)
    n = len(small_garch)
    r = small_garch.values
    bc = ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch,
                              np.ones(n), n_segments=10, seg_len=300, seed=2,
                              options=FitOptions(restarts=1))
    starts = {int(s) - 300 for s in bc.split_points}
    for seg in seen:
        assert seg.size == 300
        assert any(np.array_equal(seg, r[s:s + 300]) for s in starts)


def test_bootstrap_errors(small_garch):
    n = len(small_garch)
    with pytest.raises(ArgumentError):
        ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch, np.ones(n),
                             n_segments=10, seg_len=800)
    with pytest.raises(ArgumentError):
        ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch, np.ones(n - 1),
                             n_segments=10, seg_len=300)


def test_bootstrap_reliability_error(small_garch, monkeypatch):
    from infovol.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("no")

    monkeypatch.setattr(ev, "_segment", boom)
    with pytest.raises(ReliabilityError):
        ev.bootstrap_compare(ModelSpec("GARCH"), ModelSpec("GARCH", True), small_garch,
                             np.ones(len(small_garch)), n_segments=10, seg_len=300)

"""Distribution tail functions needed by the test statistics.

Series / continued-fraction evaluations accurate to ~1e-14 absolute, which
keeps the package free of a scipy runtime dependency.
"""
from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAXIT = 10_000


def _gamma_series(a: float, x: float) -> float:
    # lower regularized P(a, x), converges fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # upper regularized Q(a, x) by modified Lentz, for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Survival function of the chi-squared distribution."""
    if x <= 0:
        return 1.0
    return gammaincc(0.5 * df, 0.5 * x)


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def _stirling_tail(x: float) -> float:
    # lgamma(x) - [(x - 0.5) ln x - x + 0.5 ln(2 pi)], accurate for x >= 10
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def _lgamma_ratio(a: float, b: float) -> float:
    """lgamma(a + b) - lgamma(a) without cancellation when a is large."""
    if a < 10.0:
        return math.lgamma(a + b) - math.lgamma(a)
    ab = a + b
    return ((a - 0.5) * math.log1p(b / a) + b * math.log(ab) - b
            + _stirling_tail(ab) - _stirling_tail(a))


def betainc(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta function I_x(a, b).

    ``xc`` may carry ``1 - x`` computed without cancellation.
    """
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    big, small = (a, b) if a >= b else (b, a)
    lbt = (_lgamma_ratio(big, small) - math.lgamma(small)
           + a * math.log(x) + b * math.log(xc))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _beta_cf(b, a, xc) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    t2 = t * t
    return betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))


def f_sf(f: float, d1: float, d2: float) -> float:
    """Survival function of the F(d1, d2) distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    den = d2 + d1 * f
    return betainc(0.5 * d2, 0.5 * d1, d2 / den, d1 * f / den)


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the limiting Kolmogorov distribution."""
    if lam <= 0.1:
        # the theta series is below 1e-50 here
        return 1.0
    if lam < 1.0:
        # theta-function form converges quickly for small lam
        s = 0.0
        c = math.pi ** 2 / (8.0 * lam * lam)
        for k in range(1, 200):
            term = math.exp(-(2 * k - 1) ** 2 * c)
            s += term
            if term < 1e-18:
                break
        return 1.0 - math.sqrt(2.0 * math.pi) / lam * s
    s = 0.0
    for k in range(1, 200):
        term = math.exp(-2.0 * k * k * lam * lam)
        s += term if k % 2 else -term
        if term < 1e-18:
            break
    return min(1.0, max(0.0, 2.0 * s))

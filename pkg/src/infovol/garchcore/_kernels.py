"""Compiled variance recursions.

Parameters reach the kernels as a flat vector
``[omega, alpha, beta, gamma, delta, rho, theta, phi]``; unused slots are 0.
A kernel returns -1 on success or the first index ``t`` whose variance is
non-positive or non-finite.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

GARCH, EGARCH, CGARCH, TGARCH = 0, 1, 2, 3

# E|z| for a standard normal z
ABS_MEAN = math.sqrt(2.0 / math.pi)


@njit(cache=True)
def _step(fam, th, e_prev, s_prev, q_prev, i_prev):
    """One-step-ahead variance (and permanent component for CGARCH)."""
    omega, alpha, beta, gamma = th[0], th[1], th[2], th[3]
    e2 = e_prev * e_prev
    if fam == GARCH:
        return omega + alpha * e2 + beta * s_prev + gamma * i_prev, 0.0
    if fam == EGARCH:
        z = e_prev / math.sqrt(s_prev)
        lns = (omega + alpha * (abs(z) - ABS_MEAN) + th[4] * z
               + beta * math.log(s_prev) + gamma * i_prev)
        return math.exp(lns), 0.0
    if fam == CGARCH:
        q = omega + th[5] * q_prev + th[6] * (e2 - s_prev)
        s = q + alpha * (e2 - q_prev) + beta * (s_prev - q_prev) + gamma * i_prev
        return s, q
    # TGARCH: recursion on the conditional standard deviation
    a = abs(e_prev)
    sd = omega + alpha * a + beta * math.sqrt(s_prev) + gamma * i_prev
    if e_prev < 0.0:
        sd += th[7] * a
    if sd <= 0.0:
        return -1.0, 0.0
    return sd * sd, 0.0


@njit(cache=True)
def recurse(fam, th, eps, exog, s0, has_init, e_init, s_init, q_init, i_init, sig2, q):
    """Fill ``sig2`` (and ``q``) for the residual path ``eps``."""
    n = eps.shape[0]
    if n == 0:
        return -1
    if has_init:
        s, qq = _step(fam, th, e_init, s_init, q_init, i_init)
    else:
        s, qq = s0, s0
    sig2[0] = s
    q[0] = qq
    if not (s > 0.0 and math.isfinite(s)):
        return 0
    for t in range(1, n):
        s, qq = _step(fam, th, eps[t - 1], sig2[t - 1], q[t - 1], exog[t - 1])
        sig2[t] = s
        q[t] = qq
        if not (s > 0.0 and math.isfinite(s)):
            return t
    return -1


@njit(cache=True)
def nllh(fam, th, eps, exog, s0, sig2, q):
    """Gaussian negative log-likelihood, +inf when the recursion breaks down."""
    bad = recurse(fam, th, eps, exog, s0, False, 0.0, 0.0, 0.0, 0.0, sig2, q)
    if bad >= 0:
        return np.inf
    total = 0.0
    for t in range(eps.shape[0]):
        total += math.log(sig2[t]) + eps[t] * eps[t] / sig2[t]
    return 0.5 * total + 0.5 * eps.shape[0] * math.log(2.0 * math.pi)


@njit(cache=True)
def simulate(fam, th, mu, z, exog, s0, sig2, q, r):
    """Generate returns ``r = mu + sqrt(sigma^2) z`` along the recursion."""
    n = z.shape[0]
    sig2[0] = s0
    q[0] = s0
    r[0] = mu + math.sqrt(s0) * z[0]
    for t in range(1, n):
        s, qq = _step(fam, th, r[t - 1] - mu, sig2[t - 1], q[t - 1], exog[t - 1])
        if not (s > 0.0 and math.isfinite(s)):
            return t
        sig2[t] = s
        q[t] = qq
        r[t] = mu + math.sqrt(s) * z[t]
    return -1

"""Derivative-free simplex minimization (Nelder-Mead)."""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool


def nelder_mead(fun: Callable[[np.ndarray], float], x0, step=0.25, tol: float = 1e-8,
                max_iter: int = 2000, callback: Callable[[int, float], None] | None = None
                ) -> SimplexResult:
    """Minimize ``fun`` starting from a right-angled simplex around ``x0``.

    Stops when the spread of function values across the simplex drops to
    ``tol * max(1, |f_best|)`` or after ``max_iter`` iterations.  ``fun`` may
    return ``inf`` for infeasible points.  ``callback(it, f_best)`` is called
    once per iteration with the incumbent value.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    sim = np.tile(x0, (n + 1, 1))
    sim[1:] += np.diag(steps)
    fs = np.array([fun(x) for x in sim])
    nfev = n + 1

    # standard coefficients: reflection, expansion, contraction, shrink
    rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    it = 0
    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.isfinite(fs[-1]) and fs[-1] - fs[0] <= tol * max(1.0, abs(fs[0])):
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        xbar = sim[:-1].mean(axis=0)
        xr = xbar + rho * (xbar - sim[-1])
        fr = fun(xr)
        nfev += 1
        if fr < fs[0]:
            xe = xbar + chi * (xr - xbar)
            fe = fun(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = xbar + psi * (xr - xbar)
                fc = fun(xc)
                nfev += 1
                accept = fc <= fr
            else:
                xc = xbar - psi * (xbar - sim[-1])
                fc = fun(xc)
                nfev += 1
                accept = fc < fs[-1]
            if accept:
                sim[-1], fs[-1] = xc, fc
            else:
                sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
                fs[1:] = [fun(x) for x in sim[1:]]
                nfev += n
        if callback is not None:
            callback(it, float(min(fs.min(), fs[0])))
    return SimplexResult(sim[0].copy(), float(fs[0]), it, nfev, converged)

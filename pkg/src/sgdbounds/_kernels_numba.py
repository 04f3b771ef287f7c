"""Numba simulation kernel: one compiled per-seed loop.

Mirrors the numpy kernel's semantics exactly (same pre-generated random
inputs, same recording and divergence rules); scalar accumulation order
differs from numpy's vectorized reductions, so the two backends agree to
rounding error rather than bitwise.  Compiled with ``nogil`` so an ensemble
can run seeds on a thread pool, and ``cache=True`` so compilation cost is
paid once per machine.

This module must only be imported when numba is available.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Kind codes, duplicated as plain ints for nopython use (values pinned by
# tests to the problems module).
_LS = 0
_PR = 1
_HT = 2
_BZ = 3
_L2 = 4
_L1 = 5


@njit(cache=True, nogil=True)
def _log1pexp(t):
    if t <= 0.0:
        return math.log1p(math.exp(t))
    return t + math.log1p(math.exp(-t))


@njit(cache=True, nogil=True)
def _sigmoid(z):
    return 0.5 * (1.0 + math.tanh(z / 2.0))


@njit(cache=True, nogil=True)
def _objective(kind, A, b, lam, nu, x):
    n, d = A.shape
    acc = 0.0
    x2 = 0.0
    for t in range(d):
        x2 += x[t] * x[t]
    for i in range(n):
        u = 0.0
        for t in range(d):
            u += x[t] * A[i, t]
        if kind == _LS:
            r = u - b[i]
            acc += r * r
        elif kind == _PR:
            r = abs(u) - b[i]
            acc += r * r
        elif kind == _HT:
            r = b[i] - u
            acc += math.log1p(r * r)
        elif kind == _BZ:
            r = b[i] - u
            acc += math.log(nu + math.exp(-(r * r)))
        else:
            acc += _log1pexp(-b[i] * u)
    if kind == _LS:
        return 0.5 * acc
    if kind == _PR:
        return acc / (2.0 * n)
    if kind == _HT:
        return 0.5 * acc / n + 0.5 * lam * x2
    if kind == _BZ:
        return -0.5 * acc / n + 0.5 * lam * x2
    if kind == _L2:
        return acc / n + lam * x2
    # _L1
    l1 = 0.0
    for t in range(d):
        l1 += abs(x[t])
    return acc / n + lam * l1


@njit(cache=True, nogil=True)
def _psi(kind, u, bi, nu):
    if kind == _LS:
        return u - bi
    if kind == _PR:
        s = 0.0
        if u > 0.0:
            s = 1.0
        elif u < 0.0:
            s = -1.0
        return u - bi * s
    if kind == _HT:
        r = bi - u
        return -r / (1.0 + r * r)
    if kind == _BZ:
        r = bi - u
        e = math.exp(-(r * r))
        return -r * e / (nu + e)
    return -bi * _sigmoid(-bi * u)


@njit(cache=True, nogil=True)
def _add_reg(kind, x, lam, g):
    d = x.shape[0]
    if kind == _HT or kind == _BZ:
        for t in range(d):
            g[t] += lam * x[t]
    elif kind == _L2:
        for t in range(d):
            g[t] += 2.0 * lam * x[t]
    elif kind == _L1:
        for t in range(d):
            if x[t] > 0.0:
                g[t] += lam
            elif x[t] < 0.0:
                g[t] -= lam


@njit(cache=True, nogil=True)
def _grad_rows(kind, A, b, rows, x, lam, nu, grad_scale, g):
    """Gradient estimate from the given sample rows, written into ``g``."""
    d = x.shape[0]
    m = rows.shape[0]
    for t in range(d):
        g[t] = 0.0
    for j in range(m):
        i = rows[j]
        u = 0.0
        for t in range(d):
            u += x[t] * A[i, t]
        p = _psi(kind, u, b[i], nu)
        for t in range(d):
            g[t] += p * A[i, t]
    scale = grad_scale / m
    for t in range(d):
        g[t] *= scale
    _add_reg(kind, x, lam, g)


@njit(cache=True, nogil=True)
def _grad_full(kind, A, b, x, lam, nu, grad_scale, g):
    n, d = A.shape
    for t in range(d):
        g[t] = 0.0
    for i in range(n):
        u = 0.0
        for t in range(d):
            u += x[t] * A[i, t]
        p = _psi(kind, u, b[i], nu)
        for t in range(d):
            g[t] += p * A[i, t]
    scale = grad_scale / n
    for t in range(d):
        g[t] *= scale
    _add_reg(kind, x, lam, g)


@njit(cache=True, nogil=True)
def simulate_seed(
    kind,
    A,
    b,
    lam,
    nu,
    grad_scale,
    xs,
    f_star,
    mirror,
    x1,
    etas_full,
    beta,
    idx,
    noise,
    oracle,
    guard,
):
    """One trajectory; same contract as the numpy kernel, single lane.

    ``oracle``: 0 minibatch (uses ``idx`` (T+1, b)), 1 additive (uses
    ``noise`` (T+1, d), pre-scaled), 2 full.  Returns
    (dist2, fgap, dxn2, xt2, diverged_at, x_final) with arrays of length T+2.
    """
    d = x1.shape[0]
    T = etas_full.shape[0] - 2
    dist2 = np.full(T + 2, np.nan)
    fgap = np.full(T + 2, np.nan)
    dxn2 = np.full(T + 2, np.nan)
    xt2 = np.full(T + 2, np.nan)

    x = x1.copy()
    xprev = x1.copy()
    v = np.zeros(d)
    g = np.zeros(d)
    diverged_at = -1

    for k in range(1, T + 2):
        d2 = 0.0
        for t in range(d):
            dd = x[t] - xs[t]
            d2 += dd * dd
        sign = 1.0
        if mirror:
            d2m = 0.0
            for t in range(d):
                dm = x[t] + xs[t]
                d2m += dm * dm
            if d2m < d2:
                d2 = d2m
                sign = -1.0
        f = _objective(kind, A, b, lam, nu, x) - f_star
        x2 = 0.0
        dx2 = 0.0
        for t in range(d):
            if beta > 0.0:
                xt = (x[t] - beta * xprev[t]) / (1.0 - beta)
            else:
                xt = x[t]
            dt = xt - sign * xs[t]
            x2 += dt * dt
            dxt = x[t] - xprev[t]
            dx2 += dxt * dxt

        dist2[k] = d2
        fgap[k] = f
        xt2[k] = x2
        dxn2[k] = dx2

        if not (math.isfinite(d2) and d2 <= guard):
            diverged_at = k
            break
        if k == T + 1:
            break

        if oracle == 0:
            _grad_rows(kind, A, b, idx[k], x, lam, nu, grad_scale, g)
        else:
            _grad_full(kind, A, b, x, lam, nu, grad_scale, g)
            if oracle == 1:
                for t in range(d):
                    g[t] += noise[k, t]

        eta = etas_full[k]
        for t in range(d):
            v[t] = beta * v[t] + (1.0 - beta) * g[t]
            xp = x[t]
            x[t] = xp - eta * v[t]
            xprev[t] = xp

    return dist2, fgap, dxn2, xt2, diverged_at, x

"""Compiled grid kernels.

Hamiltonians and fluxes are dispatched by the integer codes of
:mod:`pathwise_hj.hamiltonians`.  Every catalog Hamiltonian is minimal at
``p = 0`` and monotone on each half-line, which the one-sided flux forms
below rely on.  Kernels operate on gauge-free forms (no additive offset).
"""

from __future__ import annotations

import math

import numba
import numpy as np

_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


@numba.njit(cache=True, inline="always")
def h_val(code, q, p, c):
    if code == 1:
        return abs(p) ** q
    if code == 2:
        return math.sqrt(1.0 + p * p) - 1.0
    if code == 3:
        return (1.0 + p * p) ** 0.25 - 1.0
    if code == 4:
        return 0.5 * p * p
    if code == 5:
        return 0.5 * p * p - c
    if code == 6:
        return c * math.sqrt(1.0 + p * p)
    if code == 7:
        return abs(p)
    return 0.0


@numba.njit(cache=True, inline="always")
def h_slope(code, q, p, c):
    """``|dH/dp|``."""
    ap = abs(p)
    if code == 1:
        return q * ap ** (q - 1.0) if ap > 0.0 else (0.0 if q > 1.0 else 1.0)
    if code == 2:
        return ap / math.sqrt(1.0 + p * p)
    if code == 3:
        return 0.5 * ap * (1.0 + p * p) ** -0.75
    if code == 4 or code == 5:
        return ap
    if code == 6:
        return abs(c) * ap / math.sqrt(1.0 + p * p)
    if code == 7:
        return 1.0
    return 0.0


@numba.njit(cache=True, inline="always")
def f_val(code, delta, alpha, a, w, p):
    if code == 1:
        return delta * p
    if code == 2:
        return delta * math.atan(p)
    if code == 3:
        s = 1.0 if p >= 0.0 else -1.0
        return s * abs(p) ** alpha
    if code == 4:
        return a * w * _SQRT_HALF_PI * math.erf(p / (math.sqrt(2.0) * w))
    return 0.0


@numba.njit(cache=True)
def f_max_slope(code, delta, alpha, a, pmax):
    if code == 1 or code == 2:
        return delta
    if code == 3:
        return alpha * pmax ** (alpha - 1.0)
    if code == 4:
        return a
    return 0.0


@numba.njit(cache=True)
def _max_abs(v):
    m = 0.0
    for x in v:
        ax = abs(x)
        if ax > m:
            m = ax
    return m


@numba.njit(cache=True)
def _lip_bound(code, q, coef, pbound):
    m = 0.0
    for i in range(coef.size):
        s = h_slope(code, q, pbound, coef[i])
        if s > m:
            m = s
    if code == 3:
        # non-monotone slope: the maximum of |H'| sits at p^2 = 2
        s = h_slope(code, q, min(pbound, math.sqrt(2.0)), 0.0)
        if s > m:
            m = s
    return m


@numba.njit(cache=True)
def godunov_evolve(u, code, q, coef, sign, t, cfl, pmax):
    """March ``u_t = sign * H(x, u_x)`` for time ``t`` with a Godunov flux.

    Returns the new state, the number of steps and the number of clamped
    one-sided gradients.
    """
    n = u.size
    dx = 1.0 / n
    u = u.copy()
    new = np.empty(n)
    elapsed = 0.0
    steps = 0
    clamps = 0
    while elapsed < t:
        gmax = 0.0
        for i in range(n):
            g = abs(u[(i + 1) % n] - u[i]) / dx
            if g > gmax:
                gmax = g
        lip = _lip_bound(code, q, coef, min(gmax, pmax))
        if code == 5 or code == 6:
            # flat data still moves under x-dependent H; keep the step bounded
            lip = max(lip, 1.0)
        if lip <= 0.0:
            break
        dt = cfl * dx / lip
        if elapsed + dt > t:
            dt = t - elapsed
        for i in range(n):
            a = (u[i] - u[i - 1]) / dx
            b = (u[(i + 1) % n] - u[i]) / dx
            if a > pmax:
                a = pmax
                clamps += 1
            elif a < -pmax:
                a = -pmax
                clamps += 1
            if b > pmax:
                b = pmax
                clamps += 1
            elif b < -pmax:
                b = -pmax
                clamps += 1
            c = coef[i]
            if sign > 0:
                h1 = h_val(code, q, min(a, 0.0), c)
                h2 = h_val(code, q, max(b, 0.0), c)
                new[i] = u[i] + dt * max(h1, h2)
            else:
                h1 = h_val(code, q, max(a, 0.0), c)
                h2 = h_val(code, q, min(b, 0.0), c)
                new[i] = u[i] - dt * max(h1, h2)
        u, new = new, u
        elapsed += dt
        steps += 1
    return u, steps, clamps


@numba.njit(cache=True)
def eo_substeps(v, code, q, dxi, cfl, pmax):
    """Sub-cycled Engquist-Osher steps of ``v_t = d/dx (H(v)) * lambda``.

    ``v[j]`` is the forward difference of ``u`` at node ``j``; the total
    signed driver increment is ``dxi``.  The node flux
    ``H(v[j-1]^-) + H(v[j]^+)`` (rising driver) or ``H(v[j-1]^+) + H(v[j]^-)``
    (falling driver) sums to ``sum_j H(v[j])`` because ``H(0) = 0``, so the
    spatial mean of ``u`` moves by exactly ``N * d(xi)`` per substep.

    Returns the new ``v``, the mean increment of ``u``, the number of
    substeps and the number of clamped values.
    """
    n = v.size
    dx = 1.0 / n
    v = v.copy()
    flux = np.empty(n)
    total = abs(dxi)
    if total == 0.0:
        return v, 0.0, 0, 0
    sgn = 1.0 if dxi > 0 else -1.0
    done = 0.0
    dmean = 0.0
    steps = 0
    clamps = 0
    while done < total:
        vm = _max_abs(v)
        if vm > pmax:
            for j in range(n):
                if v[j] > pmax:
                    v[j] = pmax
                    clamps += 1
                elif v[j] < -pmax:
                    v[j] = -pmax
                    clamps += 1
            vm = pmax
        lip = h_slope(code, q, vm, 0.0)
        if code == 3:
            lip = h_slope(code, q, min(vm, math.sqrt(2.0)), 0.0)
        if lip <= 0.0:
            # flat flux on the current range: only the mean moves
            nsum = 0.0
            for j in range(n):
                nsum += h_val(code, q, v[j], 0.0)
            dmean += sgn * (total - done) * nsum * dx
            break
        ds = cfl * dx / lip
        if done + ds > total:
            ds = total - done
        nsum = 0.0
        for i in range(n):
            left = v[i - 1]
            right = v[i]
            if sgn > 0:
                flux[i] = h_val(code, q, min(left, 0.0), 0.0) + h_val(code, q, max(right, 0.0), 0.0)
            else:
                flux[i] = h_val(code, q, max(left, 0.0), 0.0) + h_val(code, q, min(right, 0.0), 0.0)
            nsum += flux[i]
        r = sgn * ds / dx
        for j in range(n):
            v[j] += r * (flux[(j + 1) % n] - flux[j])
        dmean += sgn * ds * nsum * dx
        done += ds
        steps += 1
    return v, dmean, steps, clamps


@numba.njit(cache=True)
def parabolic_substeps(v, fcode, delta, alpha, a, w, t, cfl):
    """Explicit conservative steps of ``v_t = (F(v))_xx`` for total time ``t``."""
    n = v.size
    dx = 1.0 / n
    v = v.copy()
    fv = np.empty(n)
    elapsed = 0.0
    steps = 0
    if t <= 0.0:
        return v, 0
    while elapsed < t:
        slope = f_max_slope(fcode, delta, alpha, a, _max_abs(v))
        if slope <= 0.0:
            break
        dt = cfl * dx * dx / slope
        if elapsed + dt > t:
            dt = t - elapsed
        for j in range(n):
            fv[j] = f_val(fcode, delta, alpha, a, w, v[j])
        r = dt / (dx * dx)
        for j in range(n):
            v[j] += r * (fv[(j + 1) % n] - 2.0 * fv[j] + fv[j - 1])
        elapsed += dt
        steps += 1
    return v, steps


@numba.njit(cache=True)
def maxplus_1d(u, weights, kmax):
    """``out[i] = max_{|k| <= kmax} u[(i + k) % n] - weights[k + kmax]``."""
    n = u.size
    out = np.empty(n)
    for i in range(n):
        best = -np.inf
        for k in range(-kmax, kmax + 1):
            wk = weights[k + kmax]
            if wk == np.inf:
                continue
            val = u[(i + k) % n] - wk
            if val > best:
                best = val
        out[i] = best
    return out


@numba.njit(cache=True)
def minplus_1d(u, weights, kmax):
    """``out[i] = min_{|k| <= kmax} u[(i - k) % n] + weights[k + kmax]``."""
    n = u.size
    out = np.empty(n)
    for i in range(n):
        best = np.inf
        for k in range(-kmax, kmax + 1):
            wk = weights[k + kmax]
            if wk == np.inf:
                continue
            val = u[(i - k) % n] + wk
            if val < best:
                best = val
        out[i] = best
    return out


@numba.njit(cache=True)
def _running_extremum(row, radius, use_max, out):
    """Periodic running max/min over ``|k| <= radius`` in O(n) (van Herk / Gil-Werman)."""
    n = row.size
    if 2 * radius + 1 >= n:
        e = row[0]
        for i in range(n):
            if (row[i] > e) if use_max else (row[i] < e):
                e = row[i]
        for i in range(n):
            out[i] = e
        return
    w = 2 * radius + 1
    m = n + 2 * radius
    ext = np.empty(m)
    for j in range(m):
        ext[j] = row[(j - radius) % n]
    pre = np.empty(m)
    suf = np.empty(m)
    for j in range(m):
        if j % w == 0:
            pre[j] = ext[j]
        else:
            a = pre[j - 1]
            b = ext[j]
            pre[j] = (a if a > b else b) if use_max else (a if a < b else b)
    for j in range(m - 1, -1, -1):
        if j == m - 1 or (j + 1) % w == 0:
            suf[j] = ext[j]
        else:
            a = suf[j + 1]
            b = ext[j]
            suf[j] = (a if a > b else b) if use_max else (a if a < b else b)
    for i in range(n):
        a = suf[i]
        b = pre[i + w - 1]
        out[i] = (a if a > b else b) if use_max else (a if a < b else b)


@numba.njit(cache=True)
def window_extremum_rows(u, radius, frac, use_max):
    """Running max (or min) over ``|k| <= radius`` along axis 1, then one
    upwind step with Courant number ``frac`` for the fractional remainder."""
    m, n = u.shape
    out = np.empty_like(u)
    if radius == 0:
        out[:, :] = u
    else:
        for r in range(m):
            _running_extremum(u[r], radius, use_max, out[r])
    if frac > 0.0:
        res = np.empty_like(out)
        for r in range(m):
            for i in range(n):
                c = out[r, i]
                lft = out[r, i - 1]
                rgt = out[r, (i + 1) % n]
                if use_max:
                    g = max(lft - c, rgt - c, 0.0)
                    res[r, i] = c + frac * g
                else:
                    g = max(c - lft, c - rgt, 0.0)
                    res[r, i] = c - frac * g
        return res
    return out


@numba.njit(cache=True)
def sl_minplus(u, K, steps):
    """``steps`` applications of ``out[i] = min_k u[i - k] + K[i, k + R]``.

    ``K[i, k + R]`` is the cost of moving from node ``i - k`` to node ``i``
    in one time step.
    """
    n = u.size
    R = (K.shape[1] - 1) // 2
    u = u.copy()
    out = np.empty(n)
    for _ in range(steps):
        for i in range(n):
            best = np.inf
            for k in range(-R, R + 1):
                val = u[(i - k) % n] + K[i, k + R]
                if val < best:
                    best = val
            out[i] = best
        u, out = out, u
    return u


@numba.njit(cache=True)
def sl_maxplus(u, K, steps):
    """Adjoint of :func:`sl_minplus`: ``out[i] = max_k u[i + k] - K[i + k, k + R]``."""
    n = u.size
    R = (K.shape[1] - 1) // 2
    u = u.copy()
    out = np.empty(n)
    for _ in range(steps):
        for i in range(n):
            best = -np.inf
            for k in range(-R, R + 1):
                j = (i + k) % n
                val = u[j] - K[j, k + R]
                if val > best:
                    best = val
            out[i] = best
        u, out = out, u
    return u

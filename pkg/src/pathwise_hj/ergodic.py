"""Long-time structure of ``du + H(x, Du) o dxi = 0`` for convex ``H``.

Convention of this module: ``S_H(t)`` solves ``u_t + H(x, u_x) = 0`` and
``S_{-H}(t)`` solves ``u_t - H(x, u_x) = 0``.  The ergodic constant ``c``
is the growth rate of ``S_H(T) u`` (``S_H(T) u - c T`` converges), so
``c + H(x, D phi) = 0`` is solvable; ``Hhat = H + c``.  Along a path,
rising segments apply ``S_H`` and falling segments ``S_{-H}``.

x-dependent Hamiltonians are evolved by a min-plus transport operator
with time step ``step`` and its max-plus adjoint, so forward/backward
ordering relations hold exactly on the grid; along a path the driver is
rounded to multiples of ``step`` (an ``O(step)`` sup-norm perturbation).

Limits ``T -> infinity`` are realized as finite-time limits stopped when
the sup-norm change over one unit of time drops below ``tol``
(x-independent Hamiltonians use doubling times, since their images are
exact Lax-Oleinik formulas).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import _kernels as K_
from .grid import GridFunction
from .hamiltonians import HamiltonianSpec
from .paths import SamplePath, extrema_skeleton, monotone_runs
from .semigroup import lax_oleinik_minus, lax_oleinik_plus
from .solver import Trajectory

__all__ = [
    "ConjugatePair",
    "StationarySolution",
    "ForwardDecomposition",
    "LimitResult",
    "hat",
    "semigroup",
    "semigroup_limit",
    "evolve_along",
    "ergodic_constant",
    "aubry_limits",
    "conjugate_pair",
    "stationary_solution",
    "forward_decomposition",
    "support_extremes",
]


def hat(H: HamiltonianSpec, c: float) -> HamiltonianSpec:
    """``H + c``."""
    return replace(H, offset=H.offset + c)


STEP_DEFAULT = 1.0 / 16.0


def _coefficient_antiderivative(H: HamiltonianSpec, n: int, refine: int = 64) -> tuple[np.ndarray, float]:
    """Values of ``int_0^x c`` at the nodes and the period integral, by fine quadrature."""
    xf = np.arange(n * refine + 1) / (n * refine)
    cf = H.coeff(xf)
    cum = integrate.cumulative_trapezoid(cf, xf, initial=0.0)
    return cum[::refine][:n].copy(), float(cum[-1])


@lru_cache(maxsize=32)
def transport_kernel(H: HamiltonianSpec, n: int, step: float = STEP_DEFAULT) -> np.ndarray:
    """One-step costs ``K[i, k + R]`` of moving from node ``i - k`` to node ``i``.

    ``K = step * L(x, k dx / step)`` with the Lagrangian ``L`` of ``H``:
    ``v**2 / 2 + <V>`` for ``eikonal_potential`` (``<V>`` the exact average
    of ``V`` over the segment) and ``-sqrt(a**2 - v**2)`` averaged over the
    two endpoints for ``isotropic_front``.  The offset of ``H`` shifts
    ``L`` by ``-offset``.  Velocities are capped at ``R dx / step`` with
    ``R`` covering every velocity an ``H + c = 0`` solution can use.
    """
    if H.family not in ("eikonal_potential", "isotropic_front"):
        raise ValueError(f"no transport kernel for {H.family}")
    dx = 1.0 / n
    x = np.arange(n) * dx
    c = H.coeff.on_grid(n)
    if H.family == "eikonal_potential":
        osc_v = float(np.max(H.coeff.on_grid(4096)) - np.min(H.coeff.on_grid(4096)))
        vcap = 1.5 * math.sqrt(2.0 * osc_v) + 0.5
    else:
        vcap = float(np.max(np.abs(H.coeff.on_grid(4096))))
    R = min(int(math.ceil(vcap * step / dx)), (n - 1) // 2)
    ks = np.arange(-R, R + 1)
    v = ks * dx / step
    if H.family == "eikonal_potential":
        P, total = _coefficient_antiderivative(H, n)
        i = np.arange(n)[:, None]
        j = i - ks[None, :]
        Pj = P[j % n] + total * np.floor_divide(j, n)
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = (P[i] - Pj) / (ks[None, :] * dx)
        avg[:, R] = c
        K = step * (0.5 * v[None, :] ** 2 + avg)
    else:
        cj = c[(np.arange(n)[:, None] - ks[None, :]) % n]
        with np.errstate(invalid="ignore"):
            Li = -np.sqrt(c[:, None] ** 2 - v[None, :] ** 2)
            Lj = -np.sqrt(cj ** 2 - v[None, :] ** 2)
        K = step * 0.5 * (Li + Lj)
        K[~np.isfinite(K)] = np.inf
    K = K - step * H.offset
    K.setflags(write=False)
    return K


def semigroup(u: GridFunction, H: HamiltonianSpec, t: float, sign: int = 1,
              step: float = STEP_DEFAULT) -> GridFunction:
    """``S_H(t) u`` (``sign = +1``, solves ``u_t + H = 0``) or ``S_{-H}(t) u`` (``sign = -1``).

    x-independent convex Hamiltonians use the exact Lax-Oleinik formulas.
    x-dependent ones use ``round(t / step)`` applications of the min-plus
    transport operator (``sign = +1``) or of its max-plus adjoint
    (``sign = -1``).  Because the two share one cost kernel,
    ``S_{-H}(t) S_H(t) <= Id <= S_H(t) S_{-H}(t)`` holds exactly on the grid.
    """
    if t == 0:
        return u
    if H.homogeneous and H.family != "custom":
        return lax_oleinik_minus(u, H, t) if sign > 0 else lax_oleinik_plus(u, H, t)
    if u.dim != 1:
        raise ValueError("x-dependent semigroups act on 1D grids")
    m = int(round(t / step))
    if m == 0:
        return u
    K = transport_kernel(H, u.n, step)
    vals = np.ascontiguousarray(u.values)
    out = K_.sl_minplus(vals, K, m) if sign > 0 else K_.sl_maxplus(vals, K, m)
    return GridFunction(out)


@dataclass(frozen=True)
class LimitResult:
    """Stabilized image ``S_{+-H}(T) u`` with its stopping data."""

    value: GridFunction
    T: float
    last_change: float
    converged: bool


def semigroup_limit(u: GridFunction, H: HamiltonianSpec, sign: int = 1, T_max: float = 200.0,
                    tol: float = 1e-8) -> LimitResult:
    """``S_{+-H}(infinity) u`` for ``H`` with zero ergodic constant."""
    doubling = H.homogeneous and H.family != "custom"
    w = u
    T = 0.0
    step = 1.0
    change = math.inf
    while T < T_max:
        nxt = semigroup(w, H, step, sign)
        change = float(np.max(np.abs(nxt.values - w.values)))
        w = nxt
        T += step
        if change < tol:
            return LimitResult(w, T, change, True)
        if doubling:
            step = T
    return LimitResult(w, T, change, False)


def evolve_along(u: GridFunction, H: HamiltonianSpec, path: SamplePath, s: float, t: float,
                 record: bool = False, step: float = STEP_DEFAULT):
    """Solve ``du + H(x, Du) o dxi = 0`` on ``[s, t]`` one monotone run at a time.

    For x-dependent ``H`` the driver values are rounded to multiples of
    ``step`` first (absolute rounding, so solves started at different
    times see the same driver).  With ``record``, returns
    ``(final, times, states)`` with states at the run ends (``s`` included).
    """
    if t < s:
        raise ValueError("t must not precede s")
    ts, vs = path.restrict(s, t)
    if ts.size < 2:
        return (u, np.array([s]), [u]) if record else u
    if not (H.homogeneous and H.family != "custom"):
        vs = step * np.round(vs / step)
    sub = SamplePath(ts, vs)
    bounds, incs = monotone_runs(sub)
    times, states = [float(ts[0])], [u]
    for j, d in enumerate(incs):
        if d != 0.0:
            u = semigroup(u, H, abs(float(d)), 1 if d > 0 else -1, step)
        if record:
            times.append(float(ts[bounds[j + 1]]))
            states.append(u)
    return (u, np.asarray(times), states) if record else u


# ---------------------------------------------------------------------------
# ergodic constant and Aubry limits


def ergodic_constant(H: HamiltonianSpec, u0: GridFunction, T_max: float = 200.0, tol: float = 1e-6,
                     return_info: bool = False):
    """Growth rate ``c`` of ``S_H(T) u0``.

    The unit-time increment ``S_H(T+1) u0 - S_H(T) u0`` is computed until
    its nodal spread is below ``tol``; ``c`` is its mean.  Failure to
    stabilize by ``T_max`` is reported with a warning (and in the info
    dictionary), not raised.
    """
    if H.homogeneous and u0.osc() == 0.0:
        c = -float(H(0.0))
        info = {"T": 0.0, "spread": 0.0, "converged": True}
        return (c, info) if return_info else c
    w = u0
    T = 0.0
    spread = math.inf
    c = math.nan
    while T < T_max:
        nxt = semigroup(w, H, 1.0, 1)
        inc = nxt.values - w.values
        spread = float(inc.max() - inc.min())
        c = float(inc.mean())
        w = nxt
        T += 1.0
        if spread < tol:
            break
    converged = spread < tol
    if not converged:
        warnings.warn(f"ergodic_constant: increments did not stabilize by T={T_max} "
                      f"(spread {spread:.3g})", RuntimeWarning, stacklevel=2)
    info = {"T": T, "spread": spread, "converged": converged}
    return (c, info) if return_info else c


@dataclass(frozen=True)
class ConjugatePair:
    """``(phi_plus, phi_minus)`` with ``phi_minus = S_{-Hhat}(infinity) phi_plus``.

    Attributes
    ----------
    residuals : dict
        ``fixed_plus`` = ``|S_Hhat(1) phi+ - phi+|``, ``fixed_minus`` =
        ``|S_{-Hhat}(1) phi- - phi-|``, ``round_trip`` =
        ``|S_Hhat(infinity) phi- - phi+|`` and ``order`` =
        ``max(phi- - phi+)`` (non-positive for a valid pair).
    """

    phi_plus: GridFunction
    phi_minus: GridFunction
    c: float
    residuals: dict = field(default_factory=dict)
    converged: bool = True


def _pair_residuals(pp: GridFunction, pm: GridFunction, Hh: HamiltonianSpec, T_max: float,
                    tol: float) -> dict:
    fp = float(np.max(np.abs(semigroup(pp, Hh, 1.0, 1).values - pp.values)))
    fm = float(np.max(np.abs(semigroup(pm, Hh, 1.0, -1).values - pm.values)))
    back = semigroup_limit(pm, Hh, 1, T_max, tol)
    rt = float(np.max(np.abs(back.value.values - pp.values)))
    return {"fixed_plus": fp, "fixed_minus": fm, "round_trip": rt,
            "order": float(np.max(pm.values - pp.values))}


def conjugate_pair(phi_plus_seed: GridFunction, H: HamiltonianSpec, c: float, T_max: float = 200.0,
                   tol: float = 1e-8) -> ConjugatePair:
    """Complete ``S_Hhat(infinity) seed`` into a conjugate pair."""
    Hh = hat(H, c)
    plus = semigroup_limit(phi_plus_seed, Hh, 1, T_max, tol)
    minus = semigroup_limit(plus.value, Hh, -1, T_max, tol)
    res = _pair_residuals(plus.value, minus.value, Hh, T_max, tol)
    ok = plus.converged and minus.converged
    if not ok:
        warnings.warn("conjugate_pair: limits did not stabilize", RuntimeWarning, stacklevel=2)
    return ConjugatePair(plus.value, minus.value, c, res, ok)


def aubry_limits(u0: GridFunction, H: HamiltonianSpec, c: float, T_max: float = 200.0,
                 tol: float = 1e-8) -> ConjugatePair:
    """``phi+ = S_Hhat(infinity) u0`` and its conjugate ``phi- = S_{-Hhat}(infinity) phi+``.

    ``phi-`` is taken from ``phi+`` (not from ``u0``) so the result is a
    conjugate pair; ``S_{-Hhat}(infinity) u0`` is in general a different
    element of the backward set.
    """
    return conjugate_pair(u0, H, c, T_max, tol)


def support_extremes(u0: GridFunction, H: HamiltonianSpec, c: float, T_max: float = 200.0,
                     tol: float = 1e-8) -> tuple[GridFunction, GridFunction]:
    """Smallest and largest possible forward limits ``phi+``.

    ``S_Hhat(infinity) u0`` and ``S_Hhat(infinity) S_{-Hhat}(infinity) u0``;
    the first lies below the second nodewise (checked, warning if not).
    """
    Hh = hat(H, c)
    low = semigroup_limit(u0, Hh, 1, T_max, tol)
    mid = semigroup_limit(u0, Hh, -1, T_max, tol)
    high = semigroup_limit(mid.value, Hh, 1, T_max, tol)
    if not (low.converged and mid.converged and high.converged):
        warnings.warn("support_extremes: limits did not stabilize", RuntimeWarning, stacklevel=2)
    if np.any(low.value.values > high.value.values + max(tol, 1e-12) * 10):
        warnings.warn("support_extremes: extremes are not ordered", RuntimeWarning, stacklevel=2)
    return low.value, high.value


# ---------------------------------------------------------------------------
# stationary solutions


@dataclass
class StationarySolution:
    """Global solution ``psi`` bracketed by a conjugate pair.

    Attributes
    ----------
    pair : ConjugatePair
    trajectory : Trajectory
        States of ``psi`` (clipped into ``[phi-, phi+]``) at the run ends of
        the path on ``[0, T]``.
    construction_gap : float
        ``|psi^{n,+}(0) - psi^{n,-}(0)|`` for the last backward start used.
    upper, lower : list of GridFunction
        Unclipped evolutions started from ``phi+`` and ``phi-``.
    sandwich_violation : float
        Largest distance the unclipped midpoint left ``[phi-, phi+]``.
    starts_used : int
        Number of backward record times tried.
    converged : bool
        ``construction_gap < tol``.
    """

    pair: ConjugatePair
    trajectory: Trajectory
    construction_gap: float
    upper: list
    lower: list
    sandwich_violation: float
    starts_used: int
    converged: bool

    def raw(self, k: int) -> np.ndarray:
        return 0.5 * (self.upper[k].values + self.lower[k].values)


def stationary_solution(pair: ConjugatePair, H: HamiltonianSpec, path: SamplePath, tol: float = 1e-2,
                        min_displacement: float = 0.0) -> StationarySolution:
    """Build ``psi`` for ``d psi + Hhat(x, D psi) o dxi = 0`` from the backward records of ``path``.

    ``path`` must cover ``[-T0, T]`` with ``T0 > 0``.  Starting from the
    first backward record time ``T^n`` (alternating minima and maxima,
    moving into the past), ``phi+`` and ``phi-`` are evolved to time 0
    until their gap drops below ``tol``.  Both evolutions then continue to
    ``T``; ``psi`` is their midpoint clipped into ``[phi-, phi+]``.
    """
    if path.t0 >= 0 or path.T < 0:
        raise ValueError("the path must cover negative times and 0")
    Hh = hat(H, pair.c)
    skel = extrema_skeleton(path, "backward", origin=0.0)
    starts = [float(t) for t, k in zip(skel.times, skel.kinds) if k != "origin"]
    if min_displacement > 0:
        disp = np.abs(skel.displacements)
        if disp.size == 0 or disp.max() < min_displacement:
            raise ValueError("backward window shows no displacement above the configured floor")
    gap = math.inf
    up0, lo0 = pair.phi_plus, pair.phi_minus
    used = 0
    pp, pm = pair.phi_plus.values, pair.phi_minus.values
    if np.max(np.abs(pp - pm)) < tol:
        gap = float(np.max(np.abs(pp - pm)))
    else:
        for s in starts:
            used += 1
            up0 = evolve_along(pair.phi_plus, Hh, path, s, 0.0)
            lo0 = evolve_along(pair.phi_minus, Hh, path, s, 0.0)
            gap = float(np.max(np.abs(up0.values - lo0.values)))
            if gap < tol:
                break
    converged = gap < tol
    if not converged:
        warnings.warn(f"stationary_solution: backward window exhausted with gap {gap:.3g}",
                      RuntimeWarning, stacklevel=2)
    _, times, ups = evolve_along(up0, Hh, path, 0.0, path.T, record=True)
    _, _, los = evolve_along(lo0, Hh, path, 0.0, path.T, record=True)
    states, viol = [], 0.0
    for a, b in zip(ups, los):
        mid = 0.5 * (a.values + b.values)
        viol = max(viol, float(np.max(mid - pp)), float(np.max(pm - mid)))
        states.append(GridFunction(np.clip(mid, pm, pp)))
    traj = Trajectory(times, states, {}, {"solver": "stationary", "c": pair.c, "gap": gap,
                                          "backward_starts": used})
    return StationarySolution(pair, traj, gap, ups, los, max(viol, 0.0), used, converged)


# ---------------------------------------------------------------------------
# forward decomposition


@dataclass
class ForwardDecomposition:
    """``u(t) = c xi(t) + psi(t) + residual``.

    Attributes
    ----------
    times : ndarray
        Run ends of the forward path.
    residual : ndarray
        ``|u(t) - c xi(t) - psi(t)|`` at ``times``.
    record_times : ndarray
        Forward extrema record times of the path.
    record_residual : ndarray
        Residual at the record times.
    pair : ConjugatePair
        Pair identified from ``u`` at the latest settled minimum record.
    stationary : StationarySolution
    u_trajectory : Trajectory
    settled : bool
        The identified pair reproduces ``u`` at the latest maximum record
        within ``tol``.
    """

    times: np.ndarray
    residual: np.ndarray
    record_times: np.ndarray
    record_residual: np.ndarray
    pair: ConjugatePair
    stationary: StationarySolution
    u_trajectory: Trajectory
    settled: bool


def forward_decomposition(u0: GridFunction, H: HamiltonianSpec, c: float, path: SamplePath,
                          backward: SamplePath | None = None, tol: float = 1e-2,
                          T_max: float = 200.0, limit_tol: float = 1e-8) -> ForwardDecomposition:
    """Decompose the solution of ``du + H(x, Du) o dxi = 0`` started at time 0.

    ``path`` is the forward driver on ``[0, T]`` (a two-sided path is split
    at 0).  ``backward`` extends it to negative times for the stationary
    solution; if omitted and ``path`` starts at 0, the time-reversed forward
    path is used.  The pair is identified at the latest forward minimum
    record: ``phi+ = S_Hhat(infinity) (u - c xi)`` there, completed into a
    conjugate pair.
    """
    if path.T <= 0:
        raise ValueError("forward path must extend beyond 0")
    if path.t0 < 0:
        two = path
    else:
        if path.t0 != 0:
            raise ValueError("forward path must start at 0")
        back = backward if backward is not None else path.reversed()
        if back.T != 0:
            raise ValueError("backward extension must end at 0")
        bv = back.values - back.values[-1] + path.values[0]
        two = SamplePath(np.concatenate([back.times[:-1], path.times]),
                         np.concatenate([bv[:-1], path.values]))
    xi0 = float(two(0.0))
    fwd_t, fwd_v = two.restrict(0.0, two.T)
    fwd = SamplePath(fwd_t, fwd_v - xi0)
    # u along the forward path (original H), reported as w = u - c xi
    _, times, us = evolve_along(u0, H, fwd, 0.0, fwd.T, record=True)
    xi_at = np.asarray(fwd(times))
    ws = [GridFunction(s.values - c * x) for s, x in zip(us, xi_at)]
    skel = extrema_skeleton(fwd, "forward")
    rec_t = np.asarray(skel.times, dtype=float)
    mins = [t for t, k in zip(skel.times, skel.kinds) if k == "min"]
    maxs = [t for t, k in zip(skel.times, skel.kinds) if k == "max"]
    idx_of = {float(t): i for i, t in enumerate(times)}
    seed_t = float(mins[-1]) if mins else float(times[-1])
    seed = ws[_nearest(times, seed_t, idx_of)]
    pair = conjugate_pair(seed, H, c, T_max, limit_tol)
    settled = True
    if maxs:
        wmax = ws[_nearest(times, float(maxs[-1]), idx_of)]
        settled = float(np.max(np.abs(wmax.values - pair.phi_plus.values))) < tol
    shifted = SamplePath(two.times, two.values - xi0)
    stat = stationary_solution(pair, H, shifted, tol=tol)
    if stat.trajectory.times.shape != times.shape:
        raise RuntimeError("forward grids of u and psi differ")
    res = np.array([float(np.max(np.abs(w.values - stat.upper[k].values))) for k, w in enumerate(ws)])
    rec_idx = [_nearest(times, float(t), idx_of) for t in rec_t]
    utraj = Trajectory(times, ws, {}, {"solver": "forward", "c": c})
    return ForwardDecomposition(times, res, rec_t, res[rec_idx], pair, stat, utraj, settled)


def _nearest(times: np.ndarray, t: float, idx_of: dict) -> int:
    if t in idx_of:
        return idx_of[t]
    return int(np.argmin(np.abs(times - t)))

"""Deterministic solution operators on periodic grids.

Sign convention: ``lax_oleinik_plus(u, H, t)`` and
``monotone_hj_evolve(u, H, +1, t)`` solve ``u_t = H(x, u_x)``;
``lax_oleinik_minus`` and ``sign=-1`` solve ``u_t = -H(x, u_x)``.

The Lax-Oleinik operators are max-plus / min-plus convolutions on the
grid with the kernel ``t * L(k dx / t)``.  Because both use the same
kernel they form an adjoint pair, so for every grid function

    lax_oleinik_plus(lax_oleinik_minus(u)) <= u <= lax_oleinik_minus(lax_oleinik_plus(u))

holds exactly, not only up to discretization error.  The indicator
conjugate of ``|p|`` is the exception when ``t * n`` is fractional: the
remainder is handled by an upwind step, which keeps the operators monotone
but pairs them exactly only at whole-cell radii.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import _kernels as K
from .grid import GridFunction
from .hamiltonians import DissipationSpec, HamiltonianSpec, legendre_transform

__all__ = [
    "lax_oleinik_plus",
    "lax_oleinik_minus",
    "monotone_hj_evolve",
    "parabolic_step",
    "conservation_step",
    "forward_difference",
    "antiderivative",
    "CFL_DEFAULT",
]

CFL_DEFAULT = 0.4


def forward_difference(u: np.ndarray) -> np.ndarray:
    """``(u[i+1] - u[i]) / dx`` with periodic wrap."""
    n = u.shape[-1]
    return (np.roll(u, -1, axis=-1) - u) * n


def antiderivative(v: np.ndarray, mean: float) -> np.ndarray:
    """Inverse of :func:`forward_difference` with the spatial mean pinned."""
    n = v.size
    w = np.empty(n)
    w[0] = 0.0
    np.cumsum(v[:-1], out=w[1:])
    w /= n
    return w - w.mean() + mean


# ---------------------------------------------------------------------------
# Lax-Oleinik


def _is_indicator(H: HamiltonianSpec) -> bool:
    return H.family == "abs_component" or (H.family == "power" and H.q == 1)


def _lo_weights(H: HamiltonianSpec, n: int, t: float, osc: float) -> tuple[np.ndarray, int]:
    k = np.arange(-n, n + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        w = t * np.asarray(legendre_transform(H, k / (n * t)), dtype=float)
    # shifts whose penalty exceeds the oscillation can never win against k = 0
    w = np.where(w - w[n] > osc * (1 + 1e-12) + 1e-300, np.inf, w)
    finite = np.flatnonzero(np.isfinite(w))
    kmax = int(max(abs(finite[0] - n), abs(finite[-1] - n)))
    return np.ascontiguousarray(w[n - kmax: n + kmax + 1]), kmax


def _check_lo_input(u0: GridFunction, H: HamiltonianSpec, t: float) -> None:
    if u0.dim != 1:
        raise ValueError("Lax-Oleinik operators act on 1D grids")
    if t < 0:
        raise ValueError("t must be non-negative")
    if not (H.homogeneous and H.convex):
        raise ValueError("Lax-Oleinik operators need a convex x-independent Hamiltonian")


def _indicator_fraction(u: np.ndarray, frac: float, use_max: bool) -> np.ndarray:
    out = K.window_extremum_rows(u[None, :], 0, frac, use_max)
    return out[0]


def lax_oleinik_plus(u0: GridFunction, H: HamiltonianSpec, t: float) -> GridFunction:
    """``max_y u0(y) - t L((y - x) / t)`` over grid nodes ``y`` within one period.

    Solves ``u_t = H(u_x)``.  For the indicator conjugate of ``|p|`` the
    window radius ``t`` is split into whole cells plus one upwind step for
    the fractional remainder.
    """
    _check_lo_input(u0, H, t)
    if t == 0:
        return u0
    u = u0.values
    n = u.size
    if _is_indicator(H):
        r = t * n
        whole = min(int(math.floor(r)), n)
        res = K.window_extremum_rows(u[None, :], whole, r - whole if whole < n else 0.0, True)[0]
        return GridFunction(res + t * H.offset)
    w, kmax = _lo_weights(H, n, t, float(u.max() - u.min()))
    return GridFunction(K.maxplus_1d(np.ascontiguousarray(u), w, kmax))


def lax_oleinik_minus(u0: GridFunction, H: HamiltonianSpec, t: float) -> GridFunction:
    """``min_y u0(y) + t L((x - y) / t)``; solves ``u_t = -H(u_x)``."""
    _check_lo_input(u0, H, t)
    if t == 0:
        return u0
    u = u0.values
    n = u.size
    if _is_indicator(H):
        r = t * n
        whole = min(int(math.floor(r)), n)
        res = K.window_extremum_rows(u[None, :], whole, r - whole if whole < n else 0.0, False)[0]
        return GridFunction(res - t * H.offset)
    w, kmax = _lo_weights(H, n, t, float(u.max() - u.min()))
    return GridFunction(K.minplus_1d(np.ascontiguousarray(u), w, kmax))


# ---------------------------------------------------------------------------
# monotone finite-difference evolution


def monotone_hj_evolve(u0: GridFunction, H: HamiltonianSpec, sign: int, t: float,
                       cfl: float = CFL_DEFAULT, return_info: bool = False):
    """Explicit monotone marching of ``u_t = sign * H(x, Du)``.

    1D: Godunov numerical Hamiltonian from one-sided differences, time step
    ``cfl * dx / Lip`` with ``Lip`` the largest ``|H_p|`` over the current
    gradient range.  2D: exact window operators for ``abs_component`` and
    a local Lax-Friedrichs flux for ``graph_mcf``.  Gradients beyond
    ``H.p_max`` are clamped with a warning.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if t < 0:
        raise ValueError("t must be non-negative")
    if not 0 < cfl < 1:
        raise ValueError("cfl must lie in (0, 1)")
    if not H.convex:
        raise ValueError("monotone evolution needs a convex Hamiltonian")
    info = {"steps": 0, "clamps": 0}
    if t == 0:
        return (u0, info) if return_info else u0
    if u0.dim == 2:
        out = _evolve_2d(u0.values, H, sign, t, cfl)
        res = GridFunction(out)
        return (res, info) if return_info else res
    coef = np.ascontiguousarray(H.coefficient_on_grid(u0.n))
    u, steps, clamps = K.godunov_evolve(np.ascontiguousarray(u0.values), H.code, float(H.q), coef,
                                        sign, float(t), float(cfl), float(H.p_max))
    if H.offset:
        u = u + sign * t * H.offset
    if clamps:
        warnings.warn(f"monotone_hj_evolve: {clamps} gradients clamped at |p| = {H.p_max}",
                      RuntimeWarning, stacklevel=2)
    info.update(steps=int(steps), clamps=int(clamps))
    res = GridFunction(u)
    return (res, info) if return_info else res


def _evolve_2d(u: np.ndarray, H: HamiltonianSpec, sign: int, t: float, cfl: float) -> np.ndarray:
    n = u.shape[0]
    if H.family == "abs_component":
        r = t * n
        whole = min(int(math.floor(r)), n)
        frac = r - whole if whole < n else 0.0
        arr = u if H.axis == 1 else u.T
        out = K.window_extremum_rows(np.ascontiguousarray(arr), whole, frac, sign > 0)
        out = out if H.axis == 1 else out.T
        return np.ascontiguousarray(out) + sign * t * H.offset
    if H.family == "graph_mcf":
        dx = 1.0 / n
        dt0 = cfl * dx / 2.0
        nsteps = max(1, int(math.ceil(t / dt0)))
        dt = t / nsteps
        u = u.copy()
        for _ in range(nsteps):
            a1 = (u - np.roll(u, 1, 0)) / dx
            b1 = (np.roll(u, -1, 0) - u) / dx
            a2 = (u - np.roll(u, 1, 1)) / dx
            b2 = (np.roll(u, -1, 1) - u) / dx
            p1 = 0.5 * (a1 + b1)
            p2 = 0.5 * (a2 + b2)
            ham = np.sqrt(1.0 + p1 * p1 + p2 * p2) - 1.0
            u = u + dt * (sign * ham + 0.5 * (b1 - a1) + 0.5 * (b2 - a2))
        return u + sign * t * H.offset
    raise ValueError(f"2D evolution not available for {H.family}")


# ---------------------------------------------------------------------------
# parabolic and conservation substeps


def _flux_args(F: DissipationSpec) -> tuple:
    return (F.code, float(F.delta), float(F.alpha), float(F.a), float(F.w))


def parabolic_step(u: GridFunction, F: DissipationSpec, dt: float,
                   cfl: float = CFL_DEFAULT) -> GridFunction:
    """Advance ``u_t = d/dx F(u_x)`` by ``dt``.

    Conservative explicit scheme: interface gradients are the forward
    differences (centered at the half nodes), and sub-steps obey
    ``dt_sub <= cfl * dx**2 / max F'`` over the current gradient range.
    The spatial mean of ``u`` is preserved exactly by reconstruction.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if u.dim != 1:
        raise ValueError("parabolic_step acts on 1D grids")
    if F.is_zero:
        return u
    vals = u.values
    v, _ = K.parabolic_substeps(forward_difference(vals), *_flux_args(F), float(dt), float(cfl))
    return GridFunction(antiderivative(v, float(vals.mean())))


def conservation_step(v: GridFunction, H: HamiltonianSpec, dxi: float, dt_report: float = 1.0,
                      cfl: float = CFL_DEFAULT, return_mean_shift: bool = False):
    """One monotone-flux step of ``v_t = d/dx (H(v) * lam)``, ``lam = dxi / dt_report``.

    Engquist-Osher node fluxes built from the increasing and decreasing
    parts of ``H``, sub-cycled so that ``|lam| * max|H'| * dt_sub <= cfl * dx``.
    Mass ``sum(v)`` is preserved to rounding and every convex entropy
    ``sum(E(v)) dx`` is non-increasing per substep.  With
    ``return_mean_shift`` the exact increment of the mean of the matching
    ``u`` is also returned.
    """
    if not dt_report > 0:
        raise ValueError("dt_report must be positive")
    if v.dim != 1:
        raise ValueError("conservation_step acts on 1D grids")
    if not H.homogeneous:
        raise ValueError("conservation steps need an x-independent Hamiltonian")
    if dxi == 0 or H.family == "zero":
        return (v, 0.0) if return_mean_shift else v
    out, dmean, _, clamps = K.eo_substeps(np.ascontiguousarray(v.values), H.code, float(H.q),
                                          float(dxi), float(cfl), float(H.p_max))
    if clamps:
        warnings.warn(f"conservation_step: {clamps} values clamped at |p| = {H.p_max}",
                      RuntimeWarning, stacklevel=2)
    res = GridFunction(out)
    return (res, dmean + H.offset * dxi) if return_mean_shift else res

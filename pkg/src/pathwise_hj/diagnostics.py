"""Grid functionals and decay-rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .grid import GridFunction

__all__ = [
    "osc",
    "derivative",
    "antiderivative",
    "lq_norm",
    "tv_norm",
    "entropy_series",
    "EntropySeries",
    "DecayFit",
    "fit_decay",
    "lambda1",
    "LAMBDA1",
    "TRANSIENT_FRACTION",
]

TRANSIENT_FRACTION = 0.2


def lambda1(n: int | None = None) -> float:
    """First nonzero eigenvalue of ``-d^2/dx^2`` on the unit torus.

    With ``n`` given, the value of the periodic three-point Laplacian on
    ``n`` nodes, ``(2 - 2 cos(2 pi / n)) n**2``, which tends to ``4 pi**2``.
    """
    if n is None:
        return 4.0 * math.pi**2
    return (2.0 - 2.0 * math.cos(2.0 * math.pi / n)) * n * n


LAMBDA1 = lambda1()


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def osc(u) -> float:
    """``max - min`` of nodal values."""
    v = _values(u)
    return float(v.max() - v.min())


def derivative(u: GridFunction, scheme: str = "staggered") -> GridFunction:
    """Periodic difference quotient of a 1D grid function.

    ``staggered`` (default) is ``(u[i+1] - u[i]) / dx``, the centered
    difference at the half node ``x_i + dx/2``; it is exactly inverted by
    :func:`antiderivative`.  ``centered`` is ``(u[i+1] - u[i-1]) / (2 dx)``
    at the nodes.  Both outputs have zero mean up to rounding.
    """
    if u.dim != 1:
        raise ValueError("derivative acts on 1D grids")
    v = u.values
    if scheme == "staggered":
        return GridFunction((np.roll(v, -1) - v) * u.n)
    if scheme == "centered":
        return GridFunction((np.roll(v, -1) - np.roll(v, 1)) * (0.5 * u.n))
    raise ValueError(f"unknown scheme {scheme!r}")


def antiderivative(v: GridFunction, mean: float = 0.0) -> GridFunction:
    """Inverse of the staggered :func:`derivative` with prescribed mean.

    ``v`` must have zero mean (periodicity); the result is unique up to the
    pinned constant.
    """
    from .semigroup import antiderivative as _anti

    return GridFunction(_anti(v.values, mean))


def lq_norm(v, q: float) -> float:
    """``(sum |v_i|**q dx)**(1/q)``; ``q = inf`` gives the max norm."""
    if q < 1:
        raise ValueError("q must be at least 1")
    a = np.abs(_values(v))
    if math.isinf(q):
        return float(a.max())
    n = a.shape[0]
    dx_vol = 1.0 / a.size if a.ndim == 1 else 1.0 / (n * n)
    m = float(a.max())
    if m == 0.0:
        return 0.0
    # scale out the max to avoid overflow for large q
    return m * float(np.sum((a / m) ** q) * dx_vol) ** (1.0 / q)


def tv_norm(u) -> float:
    """Periodic total variation ``sum |u[i+1] - u[i]|``."""
    v = _values(u)
    if v.ndim != 1:
        raise ValueError("tv_norm acts on 1D grids")
    return float(np.sum(np.abs(np.roll(v, -1) - v)))


@dataclass(frozen=True)
class EntropySeries:
    """``t -> int E(v(., t)) dx`` with the DC split when ``E`` is a Hamiltonian."""

    times: np.ndarray
    values: np.ndarray
    part1: np.ndarray | None = None
    part2: np.ndarray | None = None


def entropy_series(traj, E: Callable | None = None, H=None, max_abs: float | None = None) -> EntropySeries:
    """Integrate ``E(u_x)`` over the torus at every recorded state of ``traj``.

    Parameters
    ----------
    traj : Trajectory
        1D trajectory; ``u_x`` is taken with the staggered difference.
    E : callable, optional
        Integrand.  Omitted when ``H`` is given, in which case ``E = H`` and
        the convex parts ``H1``, ``H2`` are integrated alongside.
    H : HamiltonianSpec, optional
        Catalog Hamiltonian supplying the split.
    max_abs : float, optional
        Tabulated range of the integrand; values beyond it raise.
    """
    if E is None and H is None:
        raise ValueError("give an integrand E or a Hamiltonian H")
    f = E if E is not None else (lambda p: H(p) - H.offset)
    limit = max_abs if max_abs is not None else (H.p_max if H is not None else math.inf)
    vals, p1, p2 = [], [], []
    for state in traj.states:
        if state.dim != 1:
            raise ValueError("entropy series need 1D states")
        v = derivative(state).values
        if np.max(np.abs(v)) > limit:
            raise ValueError("derivative outside the tabulated range of E")
        vals.append(float(np.mean(f(v))))
        if H is not None:
            p1.append(float(np.mean(H.h1(v))))
            p2.append(float(np.mean(H.h2(v))))
    times = np.asarray(traj.times, dtype=float)
    if H is None:
        return EntropySeries(times, np.array(vals))
    return EntropySeries(times, np.array(vals), np.array(p1), np.array(p2))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay fit.

    ``power``: ``log y = intercept + rate * log t``.
    ``exponential``: ``log y = intercept + rate * t``.
    """

    model: str
    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    def predict(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.log(t) if self.model == "power" else t
        return np.exp(self.intercept + self.rate * x)

    def to_dict(self) -> dict:
        return {"model": self.model, "rate": self.rate, "intercept": self.intercept,
                "r_squared": self.r_squared, "window": list(self.window), "n_points": self.n_points}


def fit_decay(t: Iterable[float], y: Iterable[float], model: str = "power",
              window: tuple[float, float] | None = None,
              transient: float = TRANSIENT_FRACTION) -> DecayFit:
    """Fit a power law or an exponential to positive samples.

    The window defaults to the full range of ``t``; the first ``transient``
    fraction of the window (in ``log t`` for power fits, in ``t`` for
    exponential fits) is dropped before fitting.  At least five points
    must remain.
    """
    if model not in ("power", "exponential"):
        raise ValueError("model must be 'power' or 'exponential'")
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape:
        raise ValueError("t and y must have the same shape")
    lo, hi = (float(t.min()), float(t.max())) if window is None else map(float, window)
    if not hi > lo:
        raise ValueError("empty fitting window")
    if model == "power":
        if lo <= 0:
            lo = float(np.min(t[t > 0]))
        cut = math.exp(math.log(lo) + transient * (math.log(hi) - math.log(lo)))
    else:
        cut = lo + transient * (hi - lo)
    sel = (t >= cut) & (t <= hi)
    if np.count_nonzero(sel) < 5:
        raise ValueError("fewer than five points in the fitting window")
    ys = y[sel]
    if np.any(ys <= 0):
        raise ValueError("decay fits need positive samples")
    x = np.log(t[sel]) if model == "power" else t[sel]
    ly = np.log(ys)
    A = np.vstack([x, np.ones_like(x)]).T
    (rate, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (rate * x + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(model, float(rate), float(intercept), float(min(max(r2, 0.0), 1.0)),
                    (float(cut), float(hi)), int(np.count_nonzero(sel)))

"""Pathwise solvers for ``du = d/dx F(u_x) dt + H(u_x) o dxi`` along piecewise-linear paths.

Every linear path segment is a time-changed deterministic problem, so a
solution along the path is a composition of deterministic operators.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from .diagnostics import lq_norm
from .grid import GridFunction
from .hamiltonians import DissipationSpec, HamiltonianSpec, gauge_shift
from .paths import SamplePath, monotone_runs
from .semigroup import (
    CFL_DEFAULT,
    antiderivative,
    forward_difference,
    lax_oleinik_minus,
    lax_oleinik_plus,
    monotone_hj_evolve,
    parabolic_step,
)

__all__ = [
    "Trajectory",
    "SplitOptions",
    "SplitProblem",
    "RefinementResult",
    "solve_convex_exact",
    "solve_split",
    "solve_2d_homogeneous",
    "refine_until_converged",
    "mean_evolution_check",
    "GRAPH_MEAN_CURVATURE",
]

GRAPH_MEAN_CURVATURE = "graph_mean_curvature"

_SERIES = ("t", "xi", "osc", "mean", "N", "N1", "N2", "vmax", "l2", "lq")


@dataclass
class Trajectory:
    """Recorded solution along a path.

    Attributes
    ----------
    times : ndarray
        Snapshot times (a subsampling of the path knots).
    states : list of GridFunction
        Reported states at ``times`` (gauge shift included).
    diagnostics : dict of str to ndarray
        Per-knot series: ``t``, ``xi``, ``osc``, ``mean``, ``N`` (integral
        of the Hamiltonian of the equation at ``u_x``), ``N1``, ``N2``
        (integrals of the convex parts), ``vmax`` (max of ``|u_x|``),
        ``l2`` and ``lq`` (norms of ``u_x``).  Empty for 2D runs except
        ``t``, ``osc`` and ``mean``.
    meta : dict
        Specs, path provenance, grid size and scheme options.
    """

    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> GridFunction:
        return self.states[-1]

    def series(self, key: str) -> tuple[np.ndarray, np.ndarray]:
        return self.diagnostics["t"], self.diagnostics[key]

    def write(self, out_dir: str | Path, prefix: str = "state") -> Path:
        """Snapshots as grid CSVs, the diagnostics as one CSV, plus a JSON manifest."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for k, (t, s) in enumerate(zip(self.times, self.states)):
            name = f"{prefix}_{k:05d}.csv"
            s.to_csv(out / name)
            files.append({"t": float(t), "file": name})
        keys = [k for k in _SERIES if k in self.diagnostics]
        if keys:
            arr = np.column_stack([self.diagnostics[k] for k in keys])
            np.savetxt(out / "diagnostics.csv", arr, delimiter=",", header=",".join(keys),
                       comments="", fmt="%.17g")
        manifest = {"meta": _jsonable(self.meta), "snapshots": files}
        path = out / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2))
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


@dataclass(frozen=True)
class SplitOptions:
    """Scheme options for :func:`solve_split`.

    Attributes
    ----------
    v_level : bool
        Evolve ``v = u_x`` in conservation form (default).  Otherwise the
        Hamiltonian substep is a monotone scheme on ``u``; required for
        x-dependent Hamiltonians.
    cfl : float
        Courant number for every substep.
    record_every : int
        Keep a state snapshot every this many knots (the final state is
        always kept).  Diagnostics are recorded at every knot.
    q_norm : float
        Exponent of the ``lq`` diagnostic.
    """

    v_level: bool = True
    cfl: float = CFL_DEFAULT
    record_every: int = 1
    q_norm: float = 2.0


class _Recorder:
    def __init__(self, H_eq: HamiltonianSpec | None, shift: float, q_norm: float, xi0: float):
        self.H = H_eq
        self.shift = shift
        self.q = q_norm
        self.xi0 = xi0
        self.rows = {k: [] for k in _SERIES}

    def add(self, t: float, xi: float, u: np.ndarray, v: np.ndarray | None = None) -> None:
        if v is None:
            v = forward_difference(u)
        r = self.rows
        r["t"].append(t)
        r["xi"].append(xi)
        r["osc"].append(float(u.max() - u.min()))
        r["mean"].append(float(u.mean()) + self.shift * (xi - self.xi0))
        if self.H is not None and self.H.homogeneous:
            h1 = float(np.mean(self.H.h1(v)))
            h2 = float(np.mean(self.H.h2(v)))
            n = float(np.mean(self.H(v)))
        else:
            h1 = h2 = n = math.nan
        r["N"].append(n + self.shift)
        r["N1"].append(h1)
        r["N2"].append(h2)
        r["vmax"].append(float(np.max(np.abs(v))))
        r["l2"].append(lq_norm(v, 2.0))
        r["lq"].append(lq_norm(v, self.q))

    def finish(self) -> dict:
        return {k: np.asarray(v, dtype=float) for k, v in self.rows.items()}


def _check_support(u0: GridFunction, path: SamplePath) -> None:
    if u0.dim != 1:
        raise ValueError("1D solver needs a 1D grid function")
    if path.n_knots < 2:
        raise ValueError("path needs at least two knots")


def _h_meta(H: HamiltonianSpec) -> dict:
    return H.describe() if isinstance(H, HamiltonianSpec) else {"family": str(H)}


# ---------------------------------------------------------------------------
# exact composition for convex first-order problems


def solve_convex_exact(u0: GridFunction, H: HamiltonianSpec, path: SamplePath,
                       q_norm: float | None = None) -> Trajectory:
    """Compose Lax-Oleinik operators along the monotone runs of ``path``.

    A rising run of total increment ``D`` applies ``lax_oleinik_plus`` with
    time ``D``, a falling run ``lax_oleinik_minus`` with time ``|D|``.  Adjacent
    segments with the same direction are merged first, so a monotone path
    is a single call.  States are recorded at the ends of the runs.
    """
    _check_support(u0, path)
    if not (H.convex and H.homogeneous):
        raise ValueError("exact composition needs a convex x-independent Hamiltonian")
    Hs, shift = gauge_shift(H)
    q = q_norm if q_norm is not None else (H.q if H.family == "power" else 2.0)
    bounds, incs = monotone_runs(path)
    ts, vs = path.times, path.values
    rec = _Recorder(Hs, shift, q, float(vs[0]))
    u = u0
    rec.add(float(ts[0]), float(vs[0]), u.values)
    times = [float(ts[0])]
    states = [u0]
    constant = u0.osc() == 0.0
    for j, d in enumerate(incs):
        if not constant and d != 0.0:
            u = lax_oleinik_plus(u, Hs, d) if d > 0 else lax_oleinik_minus(u, Hs, -d)
        k = int(bounds[j + 1])
        t, xi = float(ts[k]), float(vs[k])
        rec.add(t, xi, u.values)
        times.append(t)
        states.append(u + shift * (xi - float(vs[0])) if shift else u)
    meta = {"solver": "convex_exact", "H": _h_meta(H), "gauge_shift": shift, "n": u0.n,
            "path": {"t0": path.t0, "T": path.T, "knots": path.n_knots, **path.meta}}
    return Trajectory(np.asarray(times), states, rec.finish(), meta)


# ---------------------------------------------------------------------------
# operator splitting


def _flux_args(F: DissipationSpec) -> tuple:
    return (F.code, float(F.delta), float(F.alpha), float(F.a), float(F.w))


def solve_split(u0: GridFunction, F: DissipationSpec, H: HamiltonianSpec, path: SamplePath,
                opts: SplitOptions | None = None) -> Trajectory:
    """Strang splitting along the knots of ``path``.

    Per knot interval ``[t_k, t_{k+1}]`` with ``d = xi(t_{k+1}) - xi(t_k)``:
    Hamiltonian substep with increment ``d/2``, parabolic substep of
    duration ``t_{k+1} - t_k``, Hamiltonian substep with ``d/2``.

    At the ``v = u_x`` level the Hamiltonian substep is an Engquist-Osher
    conservation step that also returns the exact increment of the mean
    of ``u``; ``u`` is rebuilt from ``v`` with that mean.  A Hamiltonian
    with ``H(0) != 0`` is gauge shifted and ``H(0) * (xi(t) - xi(t0))`` is
    added back to the reported states.
    """
    _check_support(u0, path)
    opts = opts or SplitOptions()
    if opts.record_every < 1:
        raise ValueError("record_every must be positive")
    if H.homogeneous:
        Hs, shift = gauge_shift(H)
    else:
        Hs, shift = H, 0.0
    v_level = opts.v_level and Hs.homogeneous
    if not v_level and not Hs.convex:
        raise ValueError("the u-level substep needs a convex Hamiltonian")
    ts, xs = path.times, path.values
    xi0 = float(xs[0])
    rec = _Recorder(Hs, shift, opts.q_norm, xi0)
    u = np.array(u0.values)
    rec.add(float(ts[0]), xi0, u)
    times = [float(ts[0])]
    states = [u0]
    no_h = Hs.family == "zero"
    no_f = F.is_zero
    fargs = _flux_args(F)
    short = Hs.homogeneous and u0.osc() == 0.0
    clamps = 0
    pmax = float(Hs.p_max)
    code = Hs.code if Hs.family != "custom" else -1
    if v_level and code < 0:
        raise ValueError("custom Hamiltonians are not supported by the conservation kernel")
    nk = path.n_knots
    for k in range(nk - 1):
        dt = float(ts[k + 1] - ts[k])
        d = float(xs[k + 1] - xs[k])
        if not short:
            if v_level:
                v = forward_difference(u)
                dmean = 0.0
                if not no_h and d != 0.0:
                    v, dm, _, c1 = K.eo_substeps(v, code, float(Hs.q), 0.5 * d, opts.cfl, pmax)
                    dmean += dm
                    clamps += c1
                if not no_f:
                    v, _ = K.parabolic_substeps(v, *fargs, dt, opts.cfl)
                if not no_h and d != 0.0:
                    v, dm, _, c2 = K.eo_substeps(v, code, float(Hs.q), 0.5 * d, opts.cfl, pmax)
                    dmean += dm
                    clamps += c2
                u = antiderivative(v, float(u.mean()) + dmean + Hs.offset * d)
            else:
                g = GridFunction(u)
                if not no_h and d != 0.0:
                    g = _hj_half(g, Hs, 0.5 * d, opts.cfl)
                if not no_f:
                    g = parabolic_step(g, F, dt, opts.cfl)
                if not no_h and d != 0.0:
                    g = _hj_half(g, Hs, 0.5 * d, opts.cfl)
                u = np.array(g.values)
        t, xi = float(ts[k + 1]), float(xs[k + 1])
        rec.add(t, xi, u)
        if (k + 1) % opts.record_every == 0 or k == nk - 2:
            times.append(t)
            states.append(GridFunction(u + shift * (xi - xi0)) if shift else GridFunction(u))
    if clamps:
        warnings.warn(f"solve_split: {clamps} values clamped at |p| = {pmax}", RuntimeWarning,
                      stacklevel=2)
    meta = {"solver": "split", "v_level": v_level, "H": _h_meta(H), "F": F.describe(),
            "gauge_shift": shift, "n": u0.n, "cfl": opts.cfl, "clamps": clamps,
            "path": {"t0": path.t0, "T": path.T, "knots": nk, **path.meta}}
    return Trajectory(np.asarray(times), states, rec.finish(), meta)


def _hj_half(g: GridFunction, H: HamiltonianSpec, d: float, cfl: float) -> GridFunction:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return monotone_hj_evolve(g, H, 1 if d > 0 else -1, abs(d), cfl)


# ---------------------------------------------------------------------------
# 2D demo


def _mcf_graph_2d(u: np.ndarray, t: float, cfl: float) -> np.ndarray:
    """``u_t = sqrt(1 + |Du|^2) div(Du / sqrt(1 + |Du|^2))`` by explicit central differences."""
    n = u.shape[0]
    dx = 1.0 / n
    nsteps = max(1, int(math.ceil(t / (cfl * dx * dx / 4.0))))
    dt = t / nsteps
    u = u.copy()
    for _ in range(nsteps):
        ux = (np.roll(u, -1, 0) - np.roll(u, 1, 0)) / (2 * dx)
        uy = (np.roll(u, -1, 1) - np.roll(u, 1, 1)) / (2 * dx)
        uxx = (np.roll(u, -1, 0) - 2 * u + np.roll(u, 1, 0)) / dx**2
        uyy = (np.roll(u, -1, 1) - 2 * u + np.roll(u, 1, 1)) / dx**2
        uxy = (np.roll(np.roll(u, -1, 0), -1, 1) - np.roll(np.roll(u, -1, 0), 1, 1)
               - np.roll(np.roll(u, 1, 0), -1, 1) + np.roll(np.roll(u, 1, 0), 1, 1)) / (4 * dx**2)
        num = (1 + uy**2) * uxx - 2 * ux * uy * uxy + (1 + ux**2) * uyy
        u = u + dt * num / (1 + ux**2 + uy**2)
    return u


def solve_2d_homogeneous(u0: GridFunction, F, H_list: Sequence[HamiltonianSpec],
                         paths: Sequence[SamplePath], record_every: int = 1,
                         cfl: float = CFL_DEFAULT) -> Trajectory:
    """Dimensional splitting for ``du = F(Du, D^2u) dt + sum_i H_i(Du) o dxi_i`` on the 2D torus.

    ``F`` is a first-order drift given as a :class:`HamiltonianSpec`
    (``abs_component`` or ``graph_mcf``), the string
    :data:`GRAPH_MEAN_CURVATURE`, or ``None``.  The paths must share
    their knots.  Per knot: drift for ``dt``, then each ``H_i`` for its
    increment (sign selects the direction of the monotone step).
    """
    if u0.dim != 2:
        raise ValueError("solve_2d_homogeneous needs a 2D grid function")
    if len(H_list) != len(paths):
        raise ValueError("one path per Hamiltonian")
    if len(H_list) > 2:
        raise ValueError("at most two noise terms")
    allowed = ("abs_component", "graph_mcf")
    for Hi in H_list:
        if Hi.family not in allowed:
            raise ValueError(f"unsupported 2D Hamiltonian {Hi.family}")
    if isinstance(F, HamiltonianSpec) and F.family not in allowed:
        raise ValueError(f"unsupported 2D drift {F.family}")
    if F is not None and not isinstance(F, HamiltonianSpec) and F != GRAPH_MEAN_CURVATURE:
        raise ValueError(f"unsupported 2D drift {F!r}")
    if not paths:
        raise ValueError("at least one path is needed to fix the time grid")
    ts = paths[0].times
    for p in paths[1:]:
        if p.times.shape != ts.shape or not np.allclose(p.times, ts):
            raise ValueError("paths must share their knots")
    u = u0
    times, states = [float(ts[0])], [u0]
    osc_s, mean_s, t_s = [u0.osc()], [u0.mean()], [float(ts[0])]
    constant = u0.osc() == 0.0
    for k in range(ts.size - 1):
        dt = float(ts[k + 1] - ts[k])
        if not constant:
            if isinstance(F, HamiltonianSpec):
                u = monotone_hj_evolve(u, F, 1, dt, cfl)
            elif F == GRAPH_MEAN_CURVATURE:
                u = GridFunction(_mcf_graph_2d(u.values, dt, cfl))
            for Hi, p in zip(H_list, paths):
                d = float(p.values[k + 1] - p.values[k])
                if d != 0.0:
                    u = monotone_hj_evolve(u, Hi, 1 if d > 0 else -1, abs(d), cfl)
        t = float(ts[k + 1])
        t_s.append(t)
        osc_s.append(u.osc())
        mean_s.append(u.mean())
        if (k + 1) % record_every == 0 or k == ts.size - 2:
            times.append(t)
            states.append(u)
    diag = {"t": np.asarray(t_s), "osc": np.asarray(osc_s), "mean": np.asarray(mean_s)}
    meta = {"solver": "split_2d", "F": _h_meta(F) if F is not None else None,
            "H": [_h_meta(h) for h in H_list], "n": u0.n,
            "paths": [{"t0": p.t0, "T": p.T, **p.meta} for p in paths]}
    return Trajectory(np.asarray(times), states, diag, meta)


# ---------------------------------------------------------------------------
# refinement and mean identity


@dataclass(frozen=True)
class SplitProblem:
    """A 1D split problem that can be re-discretized.

    Attributes
    ----------
    initial : callable
        ``x -> u0(x)`` on the unit torus.
    F, H : specs
        Dissipation and Hamiltonian.
    path_at : callable
        ``level -> SamplePath``; level ``l`` should refine level ``l - 1``
        (e.g. Brownian paths with ``dt / 2**l`` from the same seed).
    n0 : int
        Grid size at level 0; doubled per level.
    opts : SplitOptions
    """

    initial: Callable[[np.ndarray], np.ndarray]
    F: DissipationSpec
    H: HamiltonianSpec
    path_at: Callable[[int], SamplePath]
    n0: int = 64
    opts: SplitOptions = field(default_factory=SplitOptions)

    def solve(self, level: int) -> Trajectory:
        n = self.n0 * 2**level
        u0 = GridFunction(self.initial(np.arange(n) / n))
        opts = replace(self.opts, record_every=10**9)
        return solve_split(u0, self.F, self.H, self.path_at(level), opts)


@dataclass(frozen=True)
class RefinementResult:
    trajectory: Trajectory
    achieved_gap: float
    gaps: tuple[float, ...]
    levels_used: int
    converged: bool


def refine_until_converged(problem: SplitProblem, tol: float, max_levels: int = 4) -> RefinementResult:
    """Double path and grid resolution until successive final states agree to ``tol``.

    The gap between levels is the max-norm difference of the final states
    at the coarse nodes.  Non-convergence is reported, not raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    prev = problem.solve(0)
    gaps: list[float] = []
    for level in range(1, max_levels + 1):
        cur = problem.solve(level)
        step = cur.final.n // prev.final.n
        gap = float(np.max(np.abs(cur.final.values[::step] - prev.final.values)))
        gaps.append(gap)
        prev = cur
        if gap < tol:
            return RefinementResult(cur, gap, tuple(gaps), level, True)
    return RefinementResult(prev, gaps[-1] if gaps else math.inf, tuple(gaps), max_levels, False)


def mean_evolution_check(traj: Trajectory, path: SamplePath | None = None) -> float:
    """Largest defect of the mean identity over recorded pairs ``(s, t)``.

    ``int u(t) - int u(s) = N(t) (xi(t) - xi(s)) - int_s^t (xi - xi(s)) dN``,
    with the Stieltjes integral taken by the trapezoidal rule over the
    recorded ``N`` series.  Pairs are ``(t_0, t_k)`` and consecutive knots.
    """
    d = traj.diagnostics
    if not d or "N" not in d or np.all(np.isnan(d["N"])):
        raise ValueError("trajectory carries no entropy diagnostics")
    t, m, N = d["t"], d["mean"], d["N"]
    xi = d["xi"] if path is None else np.asarray(path(t))
    dN = np.diff(N)
    worst = 0.0
    # pairs from the origin
    X = xi - xi[0]
    stieltjes = np.concatenate([[0.0], np.cumsum(0.5 * (X[1:] + X[:-1]) * dN)])
    defect = (m - m[0]) - (N * X - stieltjes)
    worst = max(worst, float(np.max(np.abs(defect))))
    # consecutive pairs
    inc = np.diff(xi)
    local = np.diff(m) - (N[1:] * inc - 0.5 * inc * dN)
    if local.size:
        worst = max(worst, float(np.max(np.abs(local))))
    return worst



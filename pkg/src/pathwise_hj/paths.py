"""Scalar driving paths and their functionals.

A :class:`SamplePath` is a piecewise-linear signal given by strictly
increasing knot times and knot values.  Every functional in this module
is exact for that class: oscillations use knot values plus interpolated
endpoints, crossing times are found by solving on linear pieces, and the
excursion functional integrates linear pieces in closed form.

Brownian paths are generated with a counter-based generator
(``numpy.random.Philox``, 4x64 rounds) keyed by ``(seed, stream)``.  The
construction is a Levy midpoint bisection on a dyadic hierarchy whose
coarsest spacing lies in ``[1, 2)`` for ``dt <= 1``.  Halving ``dt``
therefore adds midpoints conditioned on the existing knots and leaves the
coarse path embedded, which is what path-refinement studies need.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numba
import numpy as np

__all__ = [
    "SamplePath",
    "ExtremaSkeleton",
    "sample_brownian",
    "sample_two_sided_brownian",
    "linear_path",
    "oscillation",
    "one_sided_runup",
    "crossing_times",
    "gamma_functional",
    "gamma_hitting_time",
    "extrema_skeleton",
    "monotone_runs",
]

_STREAM_BITS = 64


@dataclass(frozen=True)
class SamplePath:
    """Piecewise-linear real signal.

    Parameters
    ----------
    times : array_like
        Strictly increasing knot times.
    values : array_like
        Finite knot values, same length as ``times`` (at least 2).
    seed : int, optional
        Generation provenance, recorded for serialization.
    """

    times: np.ndarray
    values: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.size != v.size:
            raise ValueError("times and values must be 1D arrays of equal length")
        if t.size < 2:
            raise ValueError("a path needs at least two knots")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("path knots must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot times must be strictly increasing")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def n_knots(self) -> int:
        return int(self.times.size)

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def __call__(self, t):
        """Evaluate by linear interpolation; outside the support is an error."""
        ta = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        if np.any(ta < lo) or np.any(ta > hi):
            raise ValueError(f"evaluation outside path support [{lo}, {hi}]")
        out = np.interp(ta, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def restrict(self, s: float, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Knots of the path restricted to ``[s, t]`` with interpolated endpoints."""
        _check_interval(self, s, t)
        inner = (self.times > s) & (self.times < t)
        ts = np.concatenate(([s], self.times[inner], [t]))
        vs = np.concatenate(([self(s)], self.values[inner], [self(t)]))
        if t == s:
            ts, vs = ts[:1], vs[:1]
        return ts, vs

    def scaled(self, factor: float) -> "SamplePath":
        return SamplePath(self.times, factor * self.values, self.seed)

    def shifted(self, offset: float) -> "SamplePath":
        return SamplePath(self.times, self.values + offset, self.seed)

    def reversed(self) -> "SamplePath":
        """Time reversal ``s -> path(-s)`` on the negated support."""
        return SamplePath(-self.times[::-1], self.values[::-1], self.seed)

    def subsample(self, every: int) -> "SamplePath":
        """Keep every ``every``-th knot plus the final knot."""
        idx = np.arange(0, self.n_knots, every)
        if idx[-1] != self.n_knots - 1:
            idx = np.append(idx, self.n_knots - 1)
        return SamplePath(self.times[idx], self.values[idx], self.seed)

    def to_csv(self, path: str | Path) -> None:
        """Write ``time,value`` rows and a JSON sidecar with the seed."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "value"])
            for t, v in zip(self.times, self.values):
                w.writerow([repr(float(t)), repr(float(v))])
        sidecar = path.with_suffix(".json")
        sidecar.write_text(json.dumps({"seed": self.seed, "n_knots": self.n_knots,
                                       **self.meta}, indent=2))

    @classmethod
    def from_csv(cls, path: str | Path) -> "SamplePath":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        seed = None
        sidecar = path.with_suffix(".json")
        if sidecar.exists():
            seed = json.loads(sidecar.read_text()).get("seed")
        return cls(data[:, 0], data[:, 1], seed)


@dataclass(frozen=True)
class ExtremaSkeleton:
    """Alternating running-record times of a path.

    ``kinds`` holds ``"max"`` or ``"min"`` for each record; ``displacements``
    are the signed value increments between consecutive records.
    """

    times: np.ndarray
    values: np.ndarray
    kinds: tuple[str, ...]
    direction: Literal["forward", "backward"]

    @property
    def displacements(self) -> np.ndarray:
        return np.diff(self.values)

    def __len__(self) -> int:
        return int(self.times.size)


def _check_interval(path: SamplePath, s: float, t: float) -> None:
    if s > t:
        raise ValueError(f"interval start {s} exceeds end {t}")
    if s < path.times[0] or t > path.times[-1]:
        raise ValueError(f"interval [{s}, {t}] outside path support")


# ---------------------------------------------------------------------------
# Brownian sampling


def _normals(seed: int, stream: int, size: int) -> np.ndarray:
    key = (int(seed) % (1 << 64)) | (int(stream) << _STREAM_BITS)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(size)


def _dyadic_levels(dt: float) -> tuple[float, int]:
    """Coarsest spacing and number of bisection levels reaching ``dt``."""
    if dt >= 1.0:
        return dt, 0
    levels = int(math.ceil(math.log2(1.0 / dt) - 1e-12))
    return dt * 2.0**levels, levels


def _brownian_grid(seed: int, tag: int, span: float, dt: float) -> tuple[np.ndarray, float]:
    """Values at multiples of ``dt`` on ``[0, >= span]`` by Levy bisection."""
    h0, levels = _dyadic_levels(dt)
    n_coarse = max(1, int(math.ceil(span / h0 - 1e-9)))
    vals = np.zeros(n_coarse + 1)
    vals[1:] = np.cumsum(math.sqrt(h0) * _normals(seed, tag * 64, n_coarse))
    h = h0
    for j in range(1, levels + 1):
        z = _normals(seed, tag * 64 + j, vals.size - 1)
        mid = 0.5 * (vals[:-1] + vals[1:]) + math.sqrt(h / 4.0) * z
        fine = np.empty(2 * vals.size - 1)
        fine[0::2] = vals
        fine[1::2] = mid
        vals = fine
        h *= 0.5
    return vals, h


def _brownian_on(seed: int, tag: int, t0: float, T: float, dt: float) -> np.ndarray:
    vals, h = _brownian_grid(seed, tag, T - t0, dt)
    n_full = int(math.floor((T - t0) / dt + 1e-9))
    times = t0 + dt * np.arange(n_full + 1)
    out = vals[: n_full + 1]
    if T - times[-1] > 1e-12 * max(1.0, abs(T)):
        # bridge sample at the right endpoint between the two enclosing grid values
        a, b = out[-1], vals[n_full + 1]
        frac = (T - times[-1]) / h
        z = _normals(seed, tag * 64 + 63, 1)[0]
        end = a + frac * (b - a) + math.sqrt(h * frac * (1.0 - frac)) * z
        times = np.append(times, T)
        out = np.append(out, end)
    else:
        times[-1] = T
    return np.stack([times, out])


def sample_brownian(seed: int, t0: float, T: float, dt: float) -> SamplePath:
    """Sample a standard Brownian path on ``[t0, T]`` started at 0.

    Parameters
    ----------
    seed : int
        64-bit seed; the path is a deterministic function of
        ``(seed, t0, T, dt)`` and coarse knots do not depend on ``dt``.
    t0, T : float
        Support, ``T > t0``.
    dt : float
        Knot spacing, ``0 < dt <= T - t0``.  When ``T - t0`` is not a
        multiple of ``dt`` a final knot at ``T`` is drawn from the
        Brownian bridge between the enclosing grid values.

    Returns
    -------
    SamplePath
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not T > t0:
        raise ValueError("T must exceed t0")
    if dt > T - t0 + 1e-12:
        raise ValueError("dt must not exceed T - t0")
    times, values = _brownian_on(seed, 0, t0, T, dt)
    return SamplePath(times, values, seed, {"kind": "brownian", "dt": dt})


def sample_two_sided_brownian(seed: int, T0: float, T: float, dt: float) -> SamplePath:
    """Two-sided Brownian path on ``[-T0, T]`` with value 0 at time 0.

    The forward half coincides with ``sample_brownian(seed, 0, T, dt)``;
    the backward half uses an independent stream of the same seed.
    """
    if not (T0 > 0 and T > 0):
        raise ValueError("T0 and T must be positive")
    fwd_t, fwd_v = _brownian_on(seed, 0, 0.0, T, dt)
    bwd_t, bwd_v = _brownian_on(seed, 1, 0.0, T0, dt)
    times = np.concatenate((-bwd_t[::-1], fwd_t[1:]))
    values = np.concatenate((bwd_v[::-1], fwd_v[1:]))
    return SamplePath(times, values, seed, {"kind": "two_sided_brownian", "dt": dt})


def linear_path(t0: float, T: float, n_knots: int, slope: float = 1.0,
                offset: float = 0.0) -> SamplePath:
    """Deterministic path ``offset + slope * (t - t0)`` with equispaced knots."""
    times = np.linspace(t0, T, n_knots)
    return SamplePath(times, offset + slope * (times - t0))


# ---------------------------------------------------------------------------
# Functionals


def oscillation(path: SamplePath, s: float | None = None, t: float | None = None) -> float:
    """Max minus min of the path on ``[s, t]`` (whole support by default)."""
    s = path.t0 if s is None else s
    t = path.T if t is None else t
    _, vs = path.restrict(s, t)
    return float(vs.max() - vs.min())


def one_sided_runup(path: SamplePath, s0: float | None = None, t0: float | None = None) -> float:
    """``max_t (path(t) - min_{[s0, t]} path)`` over ``t`` in ``[s0, t0]``.

    On a linear piece the running minimum is either constant (rising piece,
    gap maximal at its end) or equal to the value (falling piece, gap zero),
    so the maximum over knots is exact.
    """
    s0 = path.t0 if s0 is None else s0
    t0 = path.T if t0 is None else t0
    _, vs = path.restrict(s0, t0)
    return float(np.max(vs - np.minimum.accumulate(vs)))


@numba.njit(cache=True)
def _crossing_scan(ts, vs, C):
    out = [ts[0]]
    hi = vs[0]
    lo = vs[0]
    for i in range(ts.size - 1):
        a = vs[i]
        b = vs[i + 1]
        t_a = ts[i]
        dt = ts[i + 1] - ts[i]
        # walk along the piece from (t_a, a), possibly crossing several times
        while True:
            if b > hi and b - lo >= C:
                target = lo + C
            elif b < lo and hi - b >= C:
                target = hi - C
            else:
                if b > hi:
                    hi = b
                if b < lo:
                    lo = b
                break
            frac = (target - vs[i]) / (b - vs[i])
            tc = ts[i] + frac * dt
            if tc < t_a:
                tc = t_a
            out.append(tc)
            hi = target
            lo = target
            t_a = tc
    return out


def crossing_times(path: SamplePath, C: float) -> tuple[np.ndarray, int]:
    """Successive times at which the path accumulates oscillation ``C``.

    ``taus[0]`` is the start of the support; ``taus[k+1]`` is the first time
    after ``taus[k]`` at which the oscillation over ``[taus[k], t]`` equals
    ``C``.  The list is capped by the end of the support, and ``count`` is
    the number of indices ``k >= 1`` with ``taus[k] < T``.
    """
    if not C > 0:
        raise ValueError("threshold C must be positive")
    taus = np.asarray(_crossing_scan(path.times, path.values, float(C)))
    T = path.T
    taus = taus[taus < T]
    count = int(taus.size - 1)
    if taus.size == 1 and path.values.max() - path.values.min() < C:
        return taus, 0
    taus = np.append(taus, T)
    return taus, count


@numba.njit(cache=True)
def _next_strictly_smaller(vs):
    n = vs.size
    nxt = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n - 1, -1, -1):
        while top > 0 and vs[stack[top - 1]] >= vs[i]:
            top -= 1
        if top > 0:
            nxt[i] = stack[top - 1]
        stack[top] = i
        top += 1
    return nxt


@numba.njit(cache=True)
def _excursion_areas(ts, vs, nxt):
    n = ts.size
    # prefix integral of the path at knots, trapezoid is exact on linear pieces
    area = np.zeros(n)
    for k in range(1, n):
        area[k] = area[k - 1] + 0.5 * (vs[k - 1] + vs[k]) * (ts[k] - ts[k - 1])
    out = np.zeros(n)
    for i in range(n):
        j = nxt[i]
        if j == -1:
            e = ts[n - 1]
            a_e = area[n - 1]
        else:
            if j == i + 1:
                continue
            top = vs[j - 1]
            frac = (top - vs[i]) / (top - vs[j])
            e = ts[j - 1] + frac * (ts[j] - ts[j - 1])
            a_e = area[j - 1] + 0.5 * (top + vs[i]) * (e - ts[j - 1])
        val = (a_e - area[i]) - vs[i] * (e - ts[i])
        out[i] = val if val > 0.0 else 0.0
    return out


def gamma_functional(path: SamplePath, S: float | None = None, T: float | None = None) -> float:
    """Largest area of an excursion above a starting level inside ``[S, T]``.

    Returns ``sup_s int_s^{t(s) ^ T} (path(u) - path(s)) du`` where ``t(s)``
    is the first time after ``s`` at which the path drops strictly below
    ``path(s)``.  On a rising piece the integrand shrinks as ``s`` moves
    right, so the supremum is attained at a knot or at ``S`` itself.
    """
    S = path.t0 if S is None else S
    T = path.T if T is None else T
    if S > T:
        raise ValueError("S must not exceed T")
    ts, vs = path.restrict(S, T)
    if ts.size < 2:
        return 0.0
    return float(_excursion_areas(ts, vs, _next_strictly_smaller(vs)).max())


def gamma_hitting_time(path: SamplePath, t: float, K: float) -> float:
    """First ``s > t`` with ``gamma_functional(path, t, s) >= K``; ``inf`` if none."""
    if not K > 0:
        raise ValueError("K must be positive")
    if t < path.t0 or t > path.T:
        raise ValueError("t outside path support")
    if gamma_functional(path, t, path.T) < K:
        return math.inf
    knots = path.times[path.times > t]
    lo_i, hi_i = 0, knots.size - 1
    # gamma is non-decreasing in the right end, bisect over knots first
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if gamma_functional(path, t, knots[mid]) >= K:
            hi_i = mid
        else:
            lo_i = mid + 1
    hi = float(knots[lo_i])
    lo = float(knots[lo_i - 1]) if lo_i > 0 else float(t)
    for _ in range(200):
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if gamma_functional(path, t, mid) >= K:
            hi = mid
        else:
            lo = mid
    return hi


def _records(ts: np.ndarray, vs: np.ndarray) -> tuple[list[int], list[str]]:
    idx: list[int] = []
    kinds: list[str] = []
    hi = lo = vs[0]
    for i in range(1, vs.size):
        v = vs[i]
        if v > hi:
            hi = v
            kind = "max"
        elif v < lo:
            lo = v
            kind = "min"
        else:
            continue
        if kinds and kinds[-1] == kind:
            idx[-1] = i
        else:
            idx.append(i)
            kinds.append(kind)
    return idx, kinds


def extrema_skeleton(path: SamplePath,
                     direction: Literal["forward", "backward"] = "forward",
                     origin: float | None = None) -> ExtremaSkeleton:
    """Alternating strict running records of the path.

    Forward: scanning from ``origin`` (default: start of support) to the
    right, each run of new maxima (or minima) is represented by its last
    record.  Backward: the same construction applied to ``s -> path(-s)``
    scanning left from ``origin`` (default: 0 if inside the support, else
    the right end); times are returned in decreasing order and include the
    origin itself as the first entry.
    """
    if direction == "forward":
        origin = path.t0 if origin is None else origin
        ts, vs = path.restrict(origin, path.T)
        idx, kinds = _records(ts, vs)
        return ExtremaSkeleton(ts[idx], vs[idx], tuple(kinds), "forward")
    if direction != "backward":
        raise ValueError("direction must be 'forward' or 'backward'")
    if origin is None:
        origin = 0.0 if path.t0 <= 0.0 <= path.T else path.T
    ts, vs = path.restrict(path.t0, origin)
    ts, vs = ts[::-1], vs[::-1]
    idx, kinds = _records(ts, vs)
    idx = [0] + idx
    kinds = ["origin"] + kinds
    return ExtremaSkeleton(ts[idx], vs[idx], tuple(kinds), "backward")


def monotone_runs(path: SamplePath) -> tuple[np.ndarray, np.ndarray]:
    """Knot indices delimiting maximal monotone runs and the run increments.

    Consecutive pieces whose increments share a sign (zero increments join
    the current run) are merged.
    """
    inc = np.diff(path.values)
    sgn = np.sign(inc)
    # carry the previous sign through zero increments
    nz = np.flatnonzero(sgn)
    if nz.size == 0:
        return np.array([0, path.n_knots - 1]), np.array([0.0])
    filled = sgn.copy()
    last = sgn[nz[0]]
    for k in range(filled.size):
        if filled[k] == 0:
            filled[k] = last
        else:
            last = filled[k]
    breaks = np.flatnonzero(np.diff(filled) != 0) + 1
    bounds = np.concatenate(([0], breaks, [inc.size]))
    return bounds, path.values[bounds[1:]] - path.values[bounds[:-1]]

"""Registered experiments: per-seed runs and aggregation into verdicts.

Each experiment provides ``run_seed(cfg, seed) -> SeedResult`` and
``aggregate(cfg, results) -> Aggregate``; ``criteria(cfg)`` lists the
verdict names it must produce.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from ..diagnostics import DecayFit, derivative, fit_decay, lambda1, lq_norm, tv_norm
from ..ergodic import aubry_limits, ergodic_constant, forward_decomposition
from ..grid import GridFunction
from ..hamiltonians import entropy_companion, g_transform, gauge_shift, hamiltonian
from ..paths import (
    SamplePath,
    crossing_times,
    gamma_functional,
    linear_path,
    one_sided_runup,
    oscillation,
    sample_two_sided_brownian,
)
from ..semigroup import lax_oleinik_minus, lax_oleinik_plus, monotone_hj_evolve
from ..solver import SplitOptions, solve_2d_homogeneous, solve_convex_exact, solve_split
from .common import (
    LATE,
    Aggregate,
    brownian,
    build_dissipation,
    build_hamiltonian,
    initial_profile,
    median_series,
    parse_catalog_entry,
    still_path,
)
from .report import SeedResult, Series, Verdict


def _u0(cfg, amplitude: float | None = None, preset: str | None = None) -> GridFunction:
    ic = cfg.initial_condition
    return initial_profile(preset or ic.get("preset", "cos"),
                           float(ic.get("amplitude", 1.0) if amplitude is None else amplitude),
                           cfg.n, int(cfg.grid.get("dim", 1)))


def _opts(record_every: int = LATE, q_norm: float = 2.0) -> SplitOptions:
    return SplitOptions(record_every=record_every, q_norm=q_norm)


def _loglog_fit(x, y) -> DecayFit:
    """Power-law fit through a handful of points (no minimum count)."""
    x = np.asarray(x, dtype=float)
    lr = stats.linregress(np.log(x), np.log(np.asarray(y, dtype=float)))
    return DecayFit("power", float(lr.slope), float(lr.intercept), float(lr.rvalue**2),
                    (float(x.min()), float(x.max())), int(x.size))


def _max(values) -> float:
    vals = [float(v) for v in values if not math.isnan(float(v))]
    return max(vals) if vals else math.nan


# ---------------------------------------------------------------------------
# semigroup_lemmas


def _random_profile(seed: int, n: int, modes: int) -> GridFunction:
    rng = np.random.default_rng(seed)
    k = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / k**2
    b = rng.normal(size=modes) / k**2
    x = np.arange(n) / n
    v = (a[:, None] * np.cos(2 * np.pi * k[:, None] * x) + b[:, None] * np.sin(2 * np.pi * k[:, None] * x)).sum(0)
    return GridFunction(v)


def lemmas_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    P = cfg.params
    u0 = _random_profile(seed, cfg.n, int(P["modes"]))
    slope = 1.0 if seed % 2 == 0 else -1.0
    path = linear_path(0.0, cfg.T, int(round(cfg.T / cfg.dt)) + 1, slope=slope)
    exact = solve_convex_exact(u0, H, path).final
    Hs, shift = gauge_shift(H)
    D = float(path.values[-1] - path.values[0])
    direct = lax_oleinik_plus(u0, Hs, D) if D > 0 else lax_oleinik_minus(u0, Hs, -D)
    direct = direct.values + shift * D
    exact_diff = float(np.max(np.abs(exact.values - direct)))
    split = solve_split(u0, build_dissipation({"key": "zero"}), H, path, _opts()).final
    split_err = float(np.max(np.abs(split.values - exact.values)))

    times = P["sandwich_times"]
    t = float(times[seed % len(times)])
    m = int(P["sandwich_n"])
    w = _random_profile(seed + 1000, m, int(P["modes"]))
    worst, worst_fd = 0.0, 0.0
    for entry in P["sandwich_family"]:
        Hk = parse_catalog_entry(entry)
        lower = lax_oleinik_plus(lax_oleinik_minus(w, Hk, t), Hk, t)
        upper = lax_oleinik_minus(lax_oleinik_plus(w, Hk, t), Hk, t)
        v = max(float(np.max(lower.values - w.values)), float(np.max(w.values - upper.values)), 0.0)
        worst = max(worst, v * m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            lo_fd = monotone_hj_evolve(monotone_hj_evolve(w, Hk, -1, t), Hk, 1, t)
            hi_fd = monotone_hj_evolve(monotone_hj_evolve(w, Hk, 1, t), Hk, -1, t)
        v_fd = max(float(np.max(lo_fd.values - w.values)), float(np.max(w.values - hi_fd.values)), 0.0)
        worst_fd = max(worst_fd, v_fd * m)
    return SeedResult(seed, {"exact_diff": exact_diff, "split_err": split_err, "sandwich_t": t,
                             "sandwich_cells": worst, "sandwich_cells_marching": worst_fd,
                             "path_direction": "up" if slope > 0 else "down"})


def lemmas_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    ex = _max(r.summary["exact_diff"] for r in results)
    sp = _max(r.summary["split_err"] for r in results)
    sw = _max(r.summary["sandwich_cells"] for r in results)
    fd = _max(r.summary["sandwich_cells_marching"] for r in results)
    seeds = [r.seed for r in results]
    return Aggregate(
        {"exact_diff_max": ex, "split_err_max": sp, "sandwich_cells_max": sw,
         "sandwich_cells_marching_max": fd},
        [],
        [Verdict("monotone_exact", ex <= tol["exact_abs"], ex, 0.0, tol["exact_abs"]),
         Verdict("split_vs_exact", sp <= tol["split_abs"], sp, 0.0, tol["split_abs"]),
         Verdict("sandwich", sw <= tol["sandwich_cells"], sw, 0.0, tol["sandwich_cells"],
                 note=f"finite-difference marching reaches {fd:.3g} cells")],
        [Series("split_error_by_seed", np.asarray(seeds, dtype=float),
                {"split_err": [r.summary["split_err"] for r in results]}, xlabel="seed",
                ylabel="max |split - exact|")],
    )


# ---------------------------------------------------------------------------
# qualitative_1d


def qual1d_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    u0 = _u0(cfg)
    tr = solve_split(u0, F, H, brownian(seed, cfg.T, cfg.dt), _opts())
    d = tr.diagnostics
    inc = lambda a: float(np.max(np.diff(a))) if a.size > 1 else 0.0  # noqa: E731
    return SeedResult(seed, {
        "n1_max_increase": inc(d["N1"]), "n2_max_increase": inc(d["N2"]),
        "osc_max_increase": inc(d["osc"]), "mean_shift": float(d["mean"][-1] - d["mean"][0]),
        "osc_final": float(d["osc"][-1]),
    }, {"t": d["t"], "N1": d["N1"], "osc": d["osc"]})


def qual1d_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    n = cfg.n
    ent = _max(max(r.summary["n1_max_increase"], r.summary["n2_max_increase"]) for r in results)
    ent_tol = tol["entropy_per_step"] * n
    osc_inc = _max(r.summary["osc_max_increase"] for r in results)
    osc0 = _u0(cfg).osc()
    osc_tol = tol["osc_abs"] * max(1.0, osc0)
    shifts = np.array([r.summary["mean_shift"] for r in results])
    S = shifts.size
    if S >= 2:
        se = float(shifts.std(ddof=1) / math.sqrt(S))
        bound = tol["mean_sigmas"] * se
        mean_ok = abs(float(shifts.mean())) <= bound
        note = f"{S} seeds"
    else:
        se, bound, mean_ok, note = math.nan, math.nan, False, "needs at least two seeds"
    t = results[0].data["t"]
    return Aggregate(
        {"entropy_max_increase": ent, "osc_max_increase": osc_inc, "mean_shift_mean": float(shifts.mean()),
         "mean_shift_stderr": se},
        [],
        [Verdict("entropy_monotone", ent <= ent_tol, ent, 0.0, ent_tol),
         Verdict("mean_martingale", bool(mean_ok), float(shifts.mean()), 0.0, bound, note=note),
         Verdict("osc_nonincreasing", osc_inc <= osc_tol, osc_inc, 0.0, osc_tol)],
        [Series("entropy_N1", t, {"median N1": median_series([r.data["N1"] for r in results])},
                ylabel="int H1(u_x)"),
         Series("oscillation", t, {"median osc": median_series([r.data["osc"] for r in results])},
                ylabel="osc u")],
    )


# ---------------------------------------------------------------------------
# q_decay


def _qdecay_power(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    P = cfg.params
    path = brownian(seed, cfg.T, cfg.dt)
    amp = float(cfg.initial_condition.get("amplitude", 1.0))
    k_max = int(math.floor(P["snapshots_per_octave"] * math.log2(cfg.T) + 1e-9))
    grid = 2.0 ** (np.arange(0, k_max + 1) / P["snapshots_per_octave"])
    out = {}
    for tag, a in (("base", amp), ("scaled", amp * P["amplitude_factor"])):
        tr = solve_convex_exact(_u0(cfg, a), H, path, q_norm=H.q)
        idx = np.searchsorted(tr.times, grid, side="right") - 1
        ts = tr.times[idx]
        out[tag] = np.array([lq_norm(derivative(tr.states[i]), H.q) for i in idx])
        out["t"] = ts
    out["osc"] = np.array([oscillation(path, 0.0, t) if t > 0 else 0.0 for t in out["t"]])
    return SeedResult(seed, {"norm_final": float(out["base"][-1]), "osc_final": float(out["osc"][-1])}, out)


def _qdecay_tv(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    P = cfg.params
    path = brownian(seed, cfg.T, cfg.dt)
    u0 = _u0(cfg)
    taus, count = crossing_times(path, P["crossing_C"] / H.C1)
    K = min(int(P["max_halvings"]), count)
    # crossing times become knots of the same piecewise-linear path
    ts = np.union1d(path.times, taus[1:K + 1])
    path = SamplePath(ts, np.interp(ts, path.times, path.values), seed=path.seed)
    tr = solve_convex_exact(u0, H, path)
    excess, tvs = [], []
    for k in range(1, K + 1):
        i = int(np.searchsorted(tr.times, taus[k]))
        tv = tv_norm(tr.states[i])
        tvs.append(tv)
        excess.append(tv - u0.osc() / 2**k)
    return SeedResult(seed, {"crossings": count, "tv_excess_max": _max(excess) if excess else math.nan,
                             "halvings_checked": len(excess)}, {"tv": np.array(tvs)})


def qdecay_seed(cfg, seed: int) -> SeedResult:
    q = float(cfg.hamiltonian.get("q", 2.0))
    return _qdecay_tv(cfg, seed) if q == 1.0 else _qdecay_power(cfg, seed)


def qdecay_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    q = float(cfg.hamiltonian.get("q", 2.0))
    if q == 1.0:
        ex = _max(r.summary["tv_excess_max"] for r in results)
        checked = sum(r.summary["halvings_checked"] for r in results)
        ok = checked > 0 and ex <= tol["tv_abs"]
        return Aggregate({"tv_excess_max": ex, "halvings_checked": checked}, [],
                         [Verdict("tv_halving", bool(ok), ex, 0.0, tol["tv_abs"],
                                  note=f"{checked} stopping times checked")])
    base = median_series([r.data["base"] for r in results])
    scaled = median_series([r.data["scaled"] for r in results])
    osc = median_series([r.data["osc"] for r in results])
    t = results[0].data["t"]
    sel = osc > 0
    fit = fit_decay(osc[sel], base[sel], "power")
    expected = -1.0 / (q - 1.0)
    rel = abs(fit.rate - expected) / abs(expected)
    late = t >= cfg.params["late_fraction"] * cfg.T
    amp_change = float(np.max(np.abs(scaled[late] / base[late] - 1.0)))
    return Aggregate(
        {"fitted_exponent": fit.rate, "expected_exponent": expected, "amplitude_change": amp_change},
        [fit.to_dict()],
        [Verdict("power_exponent", rel <= tol["exponent_rel"], fit.rate, expected,
                 tol["exponent_rel"] * abs(expected)),
         Verdict("amplitude_independence", amp_change <= tol["amplitude_rel"], amp_change, 0.0,
                 tol["amplitude_rel"])],
        [Series(f"lq_norm_vs_osc_q{q:g}", osc[sel], {"median base": base[sel], "median scaled": scaled[sel]},
                xlabel="osc_0,t B", ylabel="|u_x|_Lq", logx=True, logy=True, fit=fit.to_dict())],
    )


def qdecay_criteria(cfg) -> tuple:
    q = float(cfg.hamiltonian.get("q", 2.0))
    return ("tv_halving",) if q == 1.0 else ("power_exponent", "amplitude_independence")


def qdecay_validate(cfg) -> None:
    if cfg.hamiltonian.get("key") != "power":
        raise ValueError("q_decay uses the power Hamiltonian")


# ---------------------------------------------------------------------------
# ratio experiments: osc_bound, fluct_interface, ohta_kawasaki


def ratio_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    P = cfg.params
    u0 = _u0(cfg)
    path = brownian(seed, cfg.T, cfg.dt)
    tr = solve_split(u0, F, H, path, _opts(int(P["record_every"])))
    Hs, _ = gauge_shift(H) if H.homogeneous else (H, 0.0)
    ts, ratios = [], []
    for t, s in zip(tr.times[1:], tr.states[1:]):
        if P["quantity"] == "H1":
            Q = float(np.mean(Hs.h1(derivative(s).values)))
        else:
            Q = float(np.max(np.abs(s.values - s.mean())))
        if P["path_functional"] == "runup":
            Pv = one_sided_runup(path, 0.0, t)
        else:
            Pv = oscillation(path, 0.0, t)
        ts.append(t)
        ratios.append(Q * Pv / u0.osc())
    ts, ratios = np.asarray(ts), np.asarray(ratios)
    d = tr.diagnostics
    inc = lambda a: float(np.max(np.diff(a))) if a.size > 1 else 0.0  # noqa: E731
    early = ts <= 0.5 * cfg.T
    return SeedResult(seed, {"ratio_early_max": float(ratios[early].max()) if early.any() else 0.0,
                             "ratio_late_max": float(ratios[~early].max()) if (~early).any() else 0.0,
                             "n1_max_increase": inc(d["N1"]), "n2_max_increase": inc(d["N2"])},
                      {"t": ts, "ratio": ratios})


def ratio_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    early = _max(r.summary["ratio_early_max"] for r in results)
    late = _max(r.summary["ratio_late_max"] for r in results)
    verdicts = [Verdict("ratio_bounded", late <= (1.0 + tol["ratio_rel"]) * early, late, early,
                        tol["ratio_rel"] * early, note="late-half maximum against early-half maximum")]
    agg = {"ratio_early_max": early, "ratio_late_max": late}
    if "entropy_split_monotone" in ratio_criteria(cfg):
        ent = _max(max(r.summary["n1_max_increase"], r.summary["n2_max_increase"]) for r in results)
        lim = tol["entropy_per_step"] * cfg.n
        verdicts.append(Verdict("entropy_split_monotone", ent <= lim, ent, 0.0, lim))
        agg["entropy_max_increase"] = ent
    t = results[0].data["t"]
    return Aggregate(agg, [], verdicts,
                     [Series("normalized_ratio", t, {"median": median_series([r.data["ratio"] for r in results]),
                                                     "max": np.max(np.vstack([r.data["ratio"] for r in results]), 0)},
                             ylabel="quantity x path functional / osc u0")])


def ratio_criteria(cfg) -> tuple:
    if cfg.experiment == "ohta_kawasaki":
        return ("ratio_bounded", "entropy_split_monotone")
    return ("ratio_bounded",)


# ---------------------------------------------------------------------------
# lln_check


def lln_seed(cfg, seed: int) -> SeedResult:
    P = cfg.params
    T_values = sorted(float(t) for t in P["T_values"])
    path = brownian(seed, max(T_values), cfg.dt)
    counts = {}
    for T in T_values:
        sub = SamplePath(*path.restrict(0.0, T))
        for C in P["C_values"]:
            counts[f"C{C:g}_T{T:g}"] = crossing_times(sub, float(C))[1]
    return SeedResult(seed, counts)


def lln_aggregate(cfg, results) -> Aggregate:
    P, tol = cfg.params, cfg.tolerances
    T_values = sorted(float(t) for t in P["T_values"])
    Tm = T_values[-1]
    Cs = [float(c) for c in P["C_values"]]
    rate = {C: float(np.mean([r.summary[f"C{C:g}_T{Tm:g}"] for r in results])) / Tm for C in Cs}
    ys = np.array([rate[C] for C in Cs])
    if np.all(ys > 0):
        slope = float(np.polyfit(np.log(Cs), np.log(ys), 1)[0])
    else:
        slope = math.nan
    expected = P["expected_slope"]
    C0 = min(Cs)
    per_T = [float(np.mean([r.summary[f"C{C0:g}_T{T:g}"] for r in results])) / T for T in T_values]
    stab = abs(per_T[0] - per_T[-1]) / per_T[-1] if per_T[-1] > 0 else math.inf
    return Aggregate(
        {"rates": {f"{C:g}": rate[C] for C in Cs}, "slope": slope, "stability": stab,
         "rates_by_T": {f"{T:g}": v for T, v in zip(T_values, per_T)}},
        [],
        [Verdict("crossing_slope", bool(abs(slope - expected) <= tol["slope_abs"]), slope, expected,
                 tol["slope_abs"]),
         Verdict("crossing_stability", bool(stab <= tol["stability_rel"]), stab, 0.0, tol["stability_rel"])],
        [Series("crossing_rate_vs_C", np.asarray(Cs), {"mean N^C / T": ys}, xlabel="C",
                ylabel="mean N^C / T", logx=True, logy=True)],
    )


# ---------------------------------------------------------------------------
# quadratic_bessel


def bessel_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    Cg = float(cfg.params["C_g"])
    dim = 1.0 - 2.0 * Cg
    path = brownian(seed, cfg.T, cfg.dt)
    tr = solve_split(_u0(cfg), F, H, path, _opts())
    d = tr.diagnostics
    # comparison process driven by -B: squared Bessel scheme for Y = X^2
    dW = -np.diff(path.values)
    dts = np.diff(path.times)
    Y = np.zeros(path.n_knots)
    for k in range(dW.size):
        s = math.sqrt(Y[k]) + dW[k]
        Y[k + 1] = max(s * s + (dim - 1.0) * dts[k], 0.0)
    M = np.maximum.accumulate(np.sqrt(Y))
    sel = M > 0
    ratio = d["vmax"][sel] * M[sel]
    return SeedResult(seed, {"ratio_max": float(ratio.max()) if ratio.size else 0.0},
                      {"t": d["t"], "vmax": d["vmax"], "bound": np.where(M > 0, 1.0 / np.where(M > 0, M, 1.0), np.inf)})


def bessel_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    worst = _max(r.summary["ratio_max"] for r in results)
    r0 = results[0]
    fin = np.isfinite(r0.data["bound"])
    return Aggregate({"ratio_max": worst}, [],
                     [Verdict("bessel_bound", worst <= 1.0 + tol["ratio_abs"], worst, 1.0, tol["ratio_abs"],
                              note="max over snapshots of |u_x|_inf * max_s X_s")],
                     [Series("gradient_vs_bessel_bound", r0.data["t"][fin],
                             {"|u_x|_inf": r0.data["vmax"][fin], "1/max X": r0.data["bound"][fin]},
                             ylabel="", logy=True)])


def bessel_validate(cfg) -> None:
    F = build_dissipation(cfg.dissipation)
    Cg = float(cfg.params["C_g"])
    if not 0 <= Cg < 0.5:
        raise ValueError("C_g must lie in [0, 1/2)")
    if F.family != "bump":
        raise ValueError("quadratic_bessel uses the bump dissipation")
    if 2.0 * F.a * math.exp(-1.5) / F.w**2 > Cg + 1e-12:
        raise ValueError("bump curvature exceeds C_g")
    if cfg.hamiltonian.get("key") != "quadratic":
        raise ValueError("quadratic_bessel uses the quadratic Hamiltonian")


# ---------------------------------------------------------------------------
# dissipation_pm


def pm_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    path = brownian(seed, cfg.T, cfg.dt)
    cs, curves = [], []
    for preset, amp in cfg.params["initial_data"]:
        u0 = _u0(cfg, float(amp), preset)
        E0 = float(np.mean(entropy_companion(F, derivative(u0).values)))
        tr = solve_split(u0, F, H, path, _opts())
        d = tr.diagnostics
        r = d["t"] * d["l2"] ** 2 / E0
        cs.append(float(r.max()))
        curves.append(r)
    return SeedResult(seed, {"c": cs}, {"t": tr.diagnostics["t"], "curves": curves})


def pm_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    C = np.array([r.summary["c"] for r in results])  # seeds x initial data
    per_init = C.max(axis=0)
    mean = float(per_init.mean())
    spread = float(np.max(np.abs(per_init / mean - 1.0)))
    r0 = results[0]
    labels = [f"{p}:{a:g}" for p, a in cfg.params["initial_data"]]
    return Aggregate({"c_per_initial": dict(zip(labels, per_init.tolist())), "c_mean": mean,
                      "c_global": float(per_init.max())}, [],
                     [Verdict("constant_stable", spread <= tol["stable_rel"], spread, 0.0, tol["stable_rel"],
                              note="relative deviation of per-datum constants from their mean")],
                     [Series("t_l2sq_over_entropy", r0.data["t"][1:],
                             {lab: c[1:] for lab, c in zip(labels, r0.data["curves"])},
                             ylabel="t |v|_2^2 / int E(v0)", logx=True)])


# ---------------------------------------------------------------------------
# uniform_elliptic


def elliptic_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    tr = solve_split(_u0(cfg), F, H, brownian(seed, cfg.T, cfg.dt), _opts())
    d = tr.diagnostics
    t, l2 = d["t"], d["l2"]
    c = F.ellipticity
    bound = l2[0] * np.exp(-c * t / lambda1())
    excess = float(np.max(l2 / bound - 1.0))
    sel = l2 > cfg.params["l2_floor"]
    rate = -fit_decay(t[sel], l2[sel], "exponential", transient=0.0).rate if sel.sum() >= 5 else math.nan
    return SeedResult(seed, {"bound_excess": excess, "rate": rate}, {"t": t, "l2": l2})


def elliptic_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    F = build_dissipation(cfg.dissipation)
    c = F.ellipticity
    target = c / lambda1()
    excess = _max(r.summary["bound_excess"] for r in results)
    rate = float(np.nanmedian([r.summary["rate"] for r in results]))
    r0 = results[0]
    return Aggregate({"bound_excess": excess, "rate_median": rate, "paper_rate": target,
                      "poincare_rate": c * lambda1(cfg.n)}, [],
                     [Verdict("l2_bound", excess <= tol["bound_rel"], excess, 0.0, tol["bound_rel"]),
                      Verdict("l2_rate", rate >= tol["rate_factor"] * target, rate, target,
                              f">= {tol['rate_factor']:g} x expected")],
                     [Series("l2_decay", r0.data["t"], {"|u_x|_2": r0.data["l2"]}, ylabel="|u_x|_2", logy=True)])


def elliptic_validate(cfg) -> None:
    if build_dissipation(cfg.dissipation).ellipticity <= 0:
        raise ValueError("uniform_elliptic needs a uniformly elliptic (linear) dissipation")


# ---------------------------------------------------------------------------
# degenerate_diss


def degenerate_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    P = cfg.params
    u0 = _u0(cfg)
    v0 = derivative(u0).values
    E0 = float(np.mean(0.5 * v0 * v0))
    Eq = hamiltonian("quadratic")
    tr = solve_split(u0, F, H, brownian(seed, cfg.T, cfg.dt), _opts())
    d = tr.diagnostics
    ratios = {}
    for T in P["T_values"]:
        i = int(np.argmin(np.abs(d["t"] - float(T))))
        ratios[f"{float(T):g}"] = g_transform(F, Eq, float(d["vmax"][i])) ** 2 * float(T) / E0
    return SeedResult(seed, {"ratios": ratios})


def degenerate_aggregate(cfg, results) -> Aggregate:
    P, tol = cfg.params, cfg.tolerances
    keys = [f"{float(T):g}" for T in P["T_values"]]
    fit_keys = [f"{float(T):g}" for T in P["fit_T"]]
    R = {k: [r.summary["ratios"][k] for r in results] for k in keys}
    C = max(max(R[k]) for k in fit_keys)
    rest = [k for k in keys if k not in fit_keys]
    worst = max((max(R[k]) for k in rest), default=0.0)
    return Aggregate({"C": C, "max_ratio": {k: max(R[k]) for k in keys}}, [],
                     [Verdict("bounded_ratio", worst <= C * (1 + tol["ratio_rel"]), worst, C,
                              tol["ratio_rel"] * C, note="constant fitted on the first horizons")],
                     [Series("G2_T_over_entropy", np.array([float(k) for k in keys]),
                             {"max over seeds": [max(R[k]) for k in keys]}, xlabel="T",
                             ylabel="G^2(|u_x|_inf) T / int E", logx=True, logy=True)])


# ---------------------------------------------------------------------------
# gamma_bound


@lru_cache(maxsize=16)
def _g_table(F, H, r_max: float, nodes: int = 257) -> tuple[np.ndarray, np.ndarray]:
    rs = np.linspace(0.0, r_max, nodes)
    return rs, np.array([g_transform(F, H, float(r)) for r in rs])


def gamma_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    u0 = _u0(cfg)
    path = brownian(seed, cfg.T, cfg.dt)
    tr = solve_split(u0, F, H, path, _opts(int(cfg.params["record_every"])))
    r_max = float(np.max(np.abs(derivative(u0).values))) * 1.0001
    rs, Gs = _g_table(F, H, min(r_max, H.p_max))
    ts, ratios = [], []
    for t, s in zip(tr.times[1:], tr.states[1:]):
        gam = gamma_functional(path, 0.0, t)
        if gam <= 0:
            continue
        vm = float(np.max(np.abs(derivative(s).values)))
        lhs = float(np.interp(vm, rs, Gs)) ** 2
        ts.append(t)
        ratios.append(lhs * gam / u0.osc())
    return SeedResult(seed, {"ratio_max": _max(ratios) if ratios else 0.0},
                      {"t": np.asarray(ts), "ratio": np.asarray(ratios)})


def gamma_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    worst = _max(r.summary["ratio_max"] for r in results)
    r0 = results[0]
    return Aggregate({"ratio_max": worst}, [],
                     [Verdict("gamma_bound", worst <= 1.0 + tol["ratio_rel"], worst, 1.0, tol["ratio_rel"],
                              note="max of |G(u_x)|_inf^2 Gamma / osc u0")],
                     [Series("gamma_ratio", r0.data["t"], {"seed %d" % r0.seed: r0.data["ratio"]},
                             ylabel="|G(u_x)|^2 Gamma / osc u0", logy=True)])


def gamma_validate(cfg) -> None:
    F = build_dissipation(cfg.dissipation)
    H = build_hamiltonian(cfg.hamiltonian)
    if F.family not in ("linear", "arctan") or F.is_zero:
        raise ValueError("gamma_bound needs an odd flux with F' > 0 (linear or arctan)")
    if not (H.family in ("quadratic", "graph_mcf") or (H.family == "power" and H.q > 1)):
        raise ValueError("gamma_bound needs an even convex Hamiltonian")


# ---------------------------------------------------------------------------
# smcf_decay


def _first_below(t: np.ndarray, y: np.ndarray, level: float) -> float:
    hit = np.flatnonzero(y <= level)
    return float(t[hit[0]]) if hit.size else math.inf


def smcf_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    P = cfg.params
    if not P["noise"]:
        return SeedResult(seed, {"control": True})
    path = brownian(seed, cfg.T, cfg.dt)
    taus, rates = [], []
    for o in P["osc_values"]:
        u0 = _u0(cfg, 0.5 * float(o))
        d = solve_split(u0, F, H, path, _opts()).diagnostics
        taus.append(_first_below(d["t"], d["osc"], P["tau_level"]))
        sel = (d["vmax"] <= P["vmax_level"]) & (d["l2"] > P["l2_floor"])
        if sel.sum() >= 5:
            rates.append(-fit_decay(d["t"][sel], d["l2"][sel], "exponential", transient=0.0).rate)
        else:
            rates.append(math.nan)
    return SeedResult(seed, {"tau": taus, "rate": rates})


def _half_times(cfg) -> list[float]:
    F = build_dissipation(cfg.dissipation)
    P = cfg.params
    still = still_path(float(P["control_T"]), cfg.dt)
    zero = hamiltonian("zero")
    out = []
    for o in P["osc_values"]:
        u0 = _u0(cfg, 0.5 * float(o))
        d = solve_split(u0, F, zero, still, _opts()).diagnostics
        out.append(_first_below(d["t"], d["osc"], 0.5 * u0.osc()))
    return out


def smcf_aggregate(cfg, results) -> Aggregate:
    P, tol = cfg.params, cfg.tolerances
    oscs = np.array([float(o) for o in P["osc_values"]])
    if not P["noise"]:
        th = np.array(_half_times(cfg))
        if np.all(np.isfinite(th)) and np.all(th > 0):
            fit = _loglog_fit(oscs, th)
            slope, fits = fit.rate, [fit.to_dict()]
        else:
            slope, fits = math.nan, []
        lim = 1.0 - tol["linear_exponent"]
        return Aggregate({"half_times": th.tolist(), "exponent": slope}, fits,
                         [Verdict("half_time_linear", bool(slope >= lim), slope, 1.0, f">= {lim:g}",
                                  note="noise off")],
                         [Series("deterministic_half_time", oscs, {"t_half": th}, xlabel="osc u0",
                                 ylabel="time to halve osc", logx=True, logy=True,
                                 fit=fits[0] if fits else None)])
    T = np.array([r.summary["tau"] for r in results])
    med = np.median(T, axis=0)
    d1 = np.diff(med)
    d2 = np.diff(d1)
    if not np.all(np.isfinite(med)):
        ratio, ok, note = math.inf, False, "some runs never reached the level"
    elif d1.mean() <= 0:
        ratio, ok, note = float(d2.mean() / max(abs(d1.mean()), 1e-300)), True, "no growth"
    else:
        ratio = float(d2.mean() / d1.mean())
        ok, note = ratio <= tol["convexity_ratio"], "mean second over mean first doubling increment"
    delta = build_dissipation(cfg.dissipation).delta
    target = delta / lambda1()
    rates = np.array([r.summary["rate"] for r in results], dtype=float)
    rate = float(np.nanmedian(rates)) if np.isfinite(rates).any() else math.nan
    return Aggregate({"tau_median": med.tolist(), "convexity_ratio": ratio, "l2_rate_median": rate,
                      "paper_rate": target, "poincare_rate": delta * lambda1(cfg.n)}, [],
                     [Verdict("tau_log_growth", bool(ok), ratio, 0.0, tol["convexity_ratio"], note=note),
                      Verdict("l2_rate", bool(rate >= tol["rate_factor"] * target), rate, target,
                              f">= {tol['rate_factor']:g} x expected")],
                     [Series("tau_vs_osc", oscs, {"median tau": med}, xlabel="osc u0", ylabel="tau",
                             logx=True)])


def smcf_criteria(cfg) -> tuple:
    return ("tau_log_growth", "l2_rate") if cfg.params["noise"] else ("half_time_linear",)


# ---------------------------------------------------------------------------
# polynomial_decay


def poly_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    d = solve_split(_u0(cfg), F, H, brownian(seed, cfg.T, cfg.dt), _opts()).diagnostics
    return SeedResult(seed, {"vmax_final": float(d["vmax"][-1])}, {"t": d["t"], "vmax": d["vmax"]})


def poly_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    H = build_hamiltonian(cfg.hamiltonian)
    F = build_dissipation(cfg.dissipation)
    a, b = F.alpha, H.q
    expected = -b / (2.0 * (b - 1.0) * (a + b - 1.0))
    expected_det = -1.0 / (a - 1.0)
    t = results[0].data["t"]
    med = median_series([r.data["vmax"] for r in results])
    window = (float(cfg.params["fit_start"]), cfg.T)
    fit = fit_decay(t, med, "power", window=window)
    d = solve_split(_u0(cfg), F, hamiltonian("zero"), still_path(cfg.T, cfg.dt), _opts()).diagnostics
    fit_det = fit_decay(d["t"], d["vmax"], "power", window=window)
    rel = abs(fit.rate - expected) / abs(expected)
    rel_det = abs(fit_det.rate - expected_det) / abs(expected_det)
    return Aggregate(
        {"stochastic_exponent": fit.rate, "deterministic_exponent": fit_det.rate,
         "expected_stochastic": expected, "expected_deterministic": expected_det},
        [fit.to_dict(), fit_det.to_dict()],
        [Verdict("stochastic_exponent", rel <= tol["exponent_rel"], fit.rate, expected,
                 tol["exponent_rel"] * abs(expected)),
         Verdict("deterministic_exponent", rel_det <= tol["exponent_rel"], fit_det.rate, expected_det,
                 tol["exponent_rel"] * abs(expected_det)),
         Verdict("faster_than_deterministic", fit.rate < fit_det.rate, fit.rate, f"< {fit_det.rate:.4g}", 0.0)],
        [Series("gradient_decay", t[1:], {"median noisy": med[1:], "deterministic": d["vmax"][1:]},
                ylabel="|u_x|_inf", logx=True, logy=True, fit=fit.to_dict())],
    )


# ---------------------------------------------------------------------------
# ergodic_demo


def mane_closed_form(H, u0: GridFunction) -> np.ndarray:
    """Forward limit of ``u0`` for ``H = p**2 / 2 - V(x)`` via the Peierls distance.

    ``d(x, y) = |int_x^y sqrt(2 (V - min V))|`` on the torus (shorter way
    round); the limit is ``min_z (min_y u0(y) + d(y, z)) + d(z, x)`` over
    the minimizers ``z`` of ``V``.
    """
    n = u0.n
    refine = 64
    xs = np.arange(n * refine + 1) / (n * refine)
    V = H.coeff(xs)
    vmin = float(np.min(H.coeff.on_grid(n)))
    prim = integrate.cumulative_trapezoid(np.sqrt(2.0 * np.maximum(V - vmin, 0.0)), xs, initial=0.0)
    Pn = prim[::refine][:n]
    L = float(prim[-1])
    diff = np.abs(Pn[:, None] - Pn[None, :])
    dist = np.minimum(diff, L - diff)
    Vn = H.coeff.on_grid(n)
    aubry = np.flatnonzero(Vn <= vmin + 1e-12)
    a_z = np.min(u0.values[:, None] + dist[:, aubry], axis=0)
    return np.min(a_z[None, :] + dist[aubry, :].T, axis=1)


@lru_cache(maxsize=4)
def _ergodic_base(cfg_json: str):
    import json

    from .config import resolve_config

    cfg = resolve_config(json.loads(cfg_json))
    H = build_hamiltonian(cfg.hamiltonian)
    u0 = _u0(cfg)
    P = cfg.params
    c, info = ergodic_constant(H, u0, T_max=P["T_max"], return_info=True)
    pair = aubry_limits(u0, H, c, T_max=P["T_max"], tol=P["limit_tol"])
    return c, info, pair


def ergodic_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    P = cfg.params
    c, _, _ = _ergodic_base(cfg.to_json())
    path = sample_two_sided_brownian(seed, float(P["T0"]), cfg.T, cfg.dt)
    fd = forward_decomposition(_u0(cfg), H, c, path, tol=P["stationary_tol"], T_max=P["T_max"],
                               limit_tol=P["limit_tol"])
    rr = fd.record_residual
    inc = float(np.max(np.diff(rr))) if rr.size > 1 else 0.0
    return SeedResult(seed, {"sandwich_violation": fd.stationary.sandwich_violation,
                             "construction_gap": fd.stationary.construction_gap,
                             "residual_final": float(fd.residual[-1]), "residual_max_increase": inc,
                             "records": int(rr.size), "settled": bool(fd.settled)},
                      {"t": fd.times, "residual": fd.residual})


def ergodic_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    H = build_hamiltonian(cfg.hamiltonian)
    c, info, pair = _ergodic_base(cfg.to_json())
    c_exact = float(np.min(H.coeff(np.arange(65536) / 65536)))
    phi = mane_closed_form(H, _u0(cfg))
    phi_err = float(np.max(np.abs(pair.phi_plus.values - phi)))
    sand = _max(r.summary["sandwich_violation"] for r in results)
    res = _max(r.summary["residual_final"] for r in results)
    inc = _max(r.summary["residual_max_increase"] for r in results)
    r0 = results[0]
    return Aggregate(
        {"c": c, "c_closed_form": c_exact, "c_info": info, "phi_plus_error": phi_err,
         "pair_residuals": pair.residuals, "sandwich_violation_max": sand, "residual_final_max": res,
         "residual_max_increase": inc},
        [],
        [Verdict("c_closed_form", abs(c - c_exact) <= tol["c_abs"], c, c_exact, tol["c_abs"]),
         Verdict("phi_plus_closed_form", phi_err <= tol["phi_plus_linf"], phi_err, 0.0, tol["phi_plus_linf"]),
         Verdict("sandwich_exact", sand <= tol["sandwich_abs"], sand, 0.0, tol["sandwich_abs"]),
         Verdict("residual_final", res < tol["residual_final"], res, 0.0, tol["residual_final"]),
         Verdict("residual_decreasing", inc <= tol["residual_monotone_abs"], inc, 0.0,
                 tol["residual_monotone_abs"])],
        [Series("forward_residual", r0.data["t"], {"seed %d" % r0.seed: r0.data["residual"]},
                ylabel="|u - c xi - psi|_inf", logy=True),
         Series("phi_plus", np.arange(cfg.n) / cfg.n, {"computed": pair.phi_plus.values, "closed form": phi,
                                                       "phi minus": pair.phi_minus.values}, xlabel="x")],
    )


def ergodic_validate(cfg) -> None:
    if cfg.hamiltonian.get("key") != "eikonal_potential":
        raise ValueError("ergodic_demo uses the eikonal_potential Hamiltonian")


# ---------------------------------------------------------------------------
# qualitative_2d


def q2d_seed(cfg, seed: int) -> SeedResult:
    H = build_hamiltonian(cfg.hamiltonian)
    drift = build_hamiltonian(cfg.params["drift"])
    tr = solve_2d_homogeneous(_u0(cfg), drift, [H], [brownian(seed, cfg.T, cfg.dt)], record_every=LATE)
    d = tr.diagnostics
    return SeedResult(seed, {"osc_final": float(d["osc"][-1])}, {"t": d["t"], "osc": d["osc"]})


def q2d_aggregate(cfg, results) -> Aggregate:
    tol = cfg.tolerances
    H = build_hamiltonian(cfg.hamiltonian)
    drift = build_hamiltonian(cfg.params["drift"])
    u0 = _u0(cfg)
    med = float(np.median([r.summary["osc_final"] for r in results]))
    still = still_path(cfg.T, cfg.dt)
    drift_only = solve_2d_homogeneous(u0, drift, [H], [still], record_every=LATE).final.osc()
    noise_only = solve_2d_homogeneous(u0, None, [H], [brownian(results[0].seed, cfg.T, cfg.dt)],
                                      record_every=LATE).final.osc()
    mode_osc = float(cfg.initial_condition.get("amplitude", 1.0))
    retained = min(drift_only, noise_only)
    r0 = results[0]
    step = max(1, r0.data["t"].size // 2000)
    return Aggregate({"osc_final_median": med, "drift_only_osc": drift_only, "noise_only_osc": noise_only,
                      "single_mode_osc": mode_osc}, [],
                     [Verdict("joint_flattening", med < tol["osc_final"], med, 0.0, tol["osc_final"]),
                      Verdict("controls_retain_mode", retained >= tol["retain_fraction"] * mode_osc, retained,
                              mode_osc, f">= {tol['retain_fraction']:g} x single-mode osc")],
                     [Series("oscillation_2d", r0.data["t"][::step], {"seed %d" % r0.seed: r0.data["osc"][::step]},
                             ylabel="osc u")])

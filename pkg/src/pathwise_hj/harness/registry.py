"""Experiment registry: defaults, criteria and runners for every key."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import experiments as ex

__all__ = ["Experiment", "REGISTRY", "experiment_keys"]


def _no_check(cfg) -> None:
    return None


@dataclass(frozen=True)
class Experiment:
    """A registered experiment.

    Attributes
    ----------
    key : str
        Registry key.
    target : str
        The property the experiment checks, in plain words.
    defaults : dict
        Config sections merged under user input.
    run_seed : callable
        ``(cfg, seed) -> SeedResult``.
    aggregate : callable
        ``(cfg, results) -> Aggregate``; must emit every name in ``criteria(cfg)``.
    criteria : callable or tuple
        Criterion names, possibly depending on the resolved config.
    validate : callable
        Raises ``ValueError`` for invalid catalog combinations.
    """

    key: str
    target: str
    defaults: dict
    run_seed: Callable
    aggregate: Callable
    criteria: Callable | tuple = ()
    validate_fn: Callable = field(default=_no_check)

    def criteria_for(self, cfg) -> tuple:
        return tuple(self.criteria(cfg)) if callable(self.criteria) else tuple(self.criteria)

    def validate(self, cfg) -> None:
        from .config import ConfigError

        try:
            self.validate_fn(cfg)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{self.key}: {exc}") from exc


def _path(T, dt, seeds):
    return {"T": T, "dt": dt, "seeds": seeds}


_RATIO_PARAMS = {"record_every": 16}

REGISTRY: dict[str, Experiment] = {}


def _register(e: Experiment) -> None:
    REGISTRY[e.key] = e


_register(Experiment(
    "semigroup_lemmas",
    "exactness of the explicit solution on monotone paths, agreement of the splitting scheme, "
    "and the sup/inf-convolution sandwich",
    {"hamiltonian": {"key": "quadratic"}, "dissipation": {"key": "zero"}, "grid": {"dim": 1, "n": 512},
     "path": _path(1.0, 2.0**-10, "0..4"), "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"exact_abs": 0.0, "split_abs": 2e-2, "sandwich_cells": 10.0},
     "params": {"modes": 4, "sandwich_times": [0.05, 0.1, 0.2, 0.4, 0.8], "sandwich_n": 256,
                "sandwich_family": ["quadratic", "graph_mcf", "power:1.5"]}},
    ex.lemmas_seed, ex.lemmas_aggregate, ("monotone_exact", "split_vs_exact", "sandwich"),
))

_register(Experiment(
    "qualitative_1d",
    "entropy monotonicity, flattening and the martingale mean for the full splitting scheme",
    {"hamiltonian": {"key": "graph_mcf"}, "dissipation": {"key": "arctan", "delta": 0.2},
     "grid": {"dim": 1, "n": 128}, "path": _path(1.0, 2.0**-8, "0..9"),
     "initial_condition": {"preset": "mix", "amplitude": 1.0},
     "tolerances": {"entropy_per_step": 1e-8, "mean_sigmas": 3.0, "osc_abs": 1e-9},
     "params": {}},
    ex.qual1d_seed, ex.qual1d_aggregate, ("entropy_monotone", "mean_martingale", "osc_nonincreasing"),
))

_register(Experiment(
    "q_decay",
    "power-law decay of the gradient in terms of the path oscillation (q > 1) and "
    "total-variation halving at crossing times (q = 1)",
    {"hamiltonian": {"key": "power", "q": 2.0}, "dissipation": {"key": "zero"}, "grid": {"dim": 1, "n": 256},
     "path": _path(256.0, 1.0 / 16, "0..29"), "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"exponent_rel": 0.15, "amplitude_rel": 0.1, "tv_abs": 0.05},
     "params": {"amplitude_factor": 2.0, "snapshots_per_octave": 4, "late_fraction": 0.25,
                "crossing_C": 1.0, "max_halvings": 6}},
    ex.qdecay_seed, ex.qdecay_aggregate, ex.qdecay_criteria, ex.qdecay_validate,
))

_register(Experiment(
    "osc_bound",
    "integral of the convex part of H times the one-sided run-up stays below the initial oscillation",
    {"hamiltonian": {"key": "quadratic"}, "dissipation": {"key": "linear", "delta": 0.05},
     "grid": {"dim": 1, "n": 128}, "path": _path(64.0, 2.0**-8, "0..9"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_rel": 0.1, "entropy_per_step": 1e-8},
     "params": {**_RATIO_PARAMS, "quantity": "H1", "path_functional": "runup"}},
    ex.ratio_seed, ex.ratio_aggregate, ex.ratio_criteria,
))

_register(Experiment(
    "lln_check",
    "law of large numbers for the number of C-crossings of Brownian motion",
    {"path": _path(200.0, 2.0**-8, "0..199"),
     "tolerances": {"slope_abs": 0.1, "stability_rel": 0.1},
     "params": {"C_values": [1.0, 4.0, 16.0], "T_values": [100.0, 200.0], "expected_slope": -0.5}},
    ex.lln_seed, ex.lln_aggregate, ("crossing_slope", "crossing_stability"),
))

_register(Experiment(
    "quadratic_bessel",
    "gradient bound by the running maximum of a Bessel comparison process driven by the same path",
    {"hamiltonian": {"key": "quadratic"}, "dissipation": {"key": "bump", "a": 0.5, "w": 1.2},
     "grid": {"dim": 1, "n": 128}, "path": _path(4.0, 2.0**-10, "0..19"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_abs": 0.0}, "params": {"C_g": 0.2}},
    ex.bessel_seed, ex.bessel_aggregate, ("bessel_bound",), ex.bessel_validate,
))

_register(Experiment(
    "dissipation_pm",
    "t |v(t)|_2^2 bounded by a constant times the initial entropy for porous-medium dissipation",
    {"hamiltonian": {"key": "power", "q": 1.25}, "dissipation": {"key": "porous_medium", "m": 1.5},
     "grid": {"dim": 1, "n": 128}, "path": _path(1.0, 2.0**-11, "0..9"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"stable_rel": 0.25},
     "params": {"initial_data": [["cos", 0.15915494309189535], ["cos", 0.3183098861837907],
                                 ["skewed", 0.15915494309189535]]}},
    ex.pm_seed, ex.pm_aggregate, ("constant_stable",),
))

_register(Experiment(
    "uniform_elliptic",
    "exponential L2 decay of the gradient under uniformly elliptic dissipation",
    {"hamiltonian": {"key": "graph_mcf"}, "dissipation": {"key": "linear", "delta": 0.5},
     "grid": {"dim": 1, "n": 128}, "path": _path(2.0, 2.0**-8, "0..4"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"bound_rel": 1e-6, "rate_factor": 0.8}, "params": {"l2_floor": 1e-9}},
    ex.elliptic_seed, ex.elliptic_aggregate, ("l2_bound", "l2_rate"), ex.elliptic_validate,
))

_register(Experiment(
    "degenerate_diss",
    "G^2(|u_x(T)|_inf) T bounded by one constant times the initial entropy across horizons",
    {"hamiltonian": {"key": "power", "q": 1.5}, "dissipation": {"key": "power", "alpha": 3.0},
     "grid": {"dim": 1, "n": 128}, "path": _path(8.0, 2.0**-6, "0..9"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_rel": 0.1},
     "params": {"T_values": [1.0, 2.0, 4.0, 8.0], "fit_T": [1.0, 2.0]}},
    ex.degenerate_seed, ex.degenerate_aggregate, ("bounded_ratio",),
))

_register(Experiment(
    "gamma_bound",
    "|G(u_x)|_inf^2 bounded by the initial oscillation over the excursion functional Gamma",
    {"hamiltonian": {"key": "graph_mcf"}, "dissipation": {"key": "arctan", "delta": 1.0},
     "grid": {"dim": 1, "n": 128}, "path": _path(8.0, 2.0**-8, "0..19"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_rel": 0.1}, "params": {"record_every": 8}},
    ex.gamma_seed, ex.gamma_aggregate, ("gamma_bound",), ex.gamma_validate,
))

_register(Experiment(
    "smcf_decay",
    "noise-driven flattening of the stochastic mean curvature flow: logarithmic dependence of the "
    "flattening time on the oscillation, exponential L2 decay, and the linear deterministic control",
    {"hamiltonian": {"key": "graph_mcf", "raw": True, "p_max": 1e4},
     "dissipation": {"key": "arctan", "delta": 1.0}, "grid": {"dim": 1, "n": 128},
     "path": _path(2.0, 2.0**-8, "0..19"), "initial_condition": {"preset": "plateau", "amplitude": 1.0},
     "tolerances": {"convexity_ratio": 0.25, "rate_factor": 0.8, "linear_exponent": 0.2},
     "params": {"osc_values": [4.0, 8.0, 16.0, 32.0], "noise": True, "tau_level": 2.0, "vmax_level": 1.0,
                "control_T": 5.0, "l2_floor": 1e-9}},
    ex.smcf_seed, ex.smcf_aggregate, ex.smcf_criteria,
))

_register(Experiment(
    "polynomial_decay",
    "power-law gradient decay for polynomial dissipation and Hamiltonian, against the noiseless control",
    {"hamiltonian": {"key": "power", "q": 1.5}, "dissipation": {"key": "power", "alpha": 3.0},
     "grid": {"dim": 1, "n": 256}, "path": _path(64.0, 2.0**-6, "0..29"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"exponent_rel": 0.2}, "params": {"fit_start": 1.0}},
    ex.poly_seed, ex.poly_aggregate, ("stochastic_exponent", "deterministic_exponent",
                                      "faster_than_deterministic"),
))

_register(Experiment(
    "fluct_interface",
    "fluctuating interface: deviation from the mean times the path oscillation stays bounded",
    {"hamiltonian": {"key": "graph_mcf", "raw": True}, "dissipation": {"key": "arctan", "delta": 0.1},
     "grid": {"dim": 1, "n": 128}, "path": _path(16.0, 2.0**-8, "0..9"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_rel": 0.1, "entropy_per_step": 1e-8},
     "params": {**_RATIO_PARAMS, "quantity": "deviation", "path_functional": "osc"}},
    ex.ratio_seed, ex.ratio_aggregate, ex.ratio_criteria,
))

_register(Experiment(
    "ohta_kawasaki",
    "Ohta-Kawasaki type noise: the ratio bound and monotone split entropies",
    {"hamiltonian": {"key": "ohta_kawasaki", "raw": True}, "dissipation": {"key": "arctan", "delta": 0.1},
     "grid": {"dim": 1, "n": 128}, "path": _path(16.0, 2.0**-8, "0..9"),
     "initial_condition": {"preset": "cos", "amplitude": 1.0},
     "tolerances": {"ratio_rel": 0.1, "entropy_per_step": 1e-8},
     "params": {**_RATIO_PARAMS, "quantity": "H1", "path_functional": "runup"}},
    ex.ratio_seed, ex.ratio_aggregate, ex.ratio_criteria,
))

_register(Experiment(
    "ergodic_demo",
    "ergodic constant, conjugate pair, stationary solution and the forward decomposition residual",
    {"hamiltonian": {"key": "eikonal_potential", "coeff": "sin2"}, "dissipation": {"key": "zero"},
     "grid": {"dim": 1, "n": 512}, "path": _path(100.0, 1.0 / 16, "0..4"),
     "initial_condition": {"preset": "cos", "amplitude": 0.5},
     "tolerances": {"c_abs": 1e-3, "phi_plus_linf": 1e-2, "sandwich_abs": 1e-12, "residual_final": 0.1,
                    "residual_monotone_abs": 1e-9},
     "params": {"T0": 50.0, "T_max": 200.0, "limit_tol": 1e-8, "stationary_tol": 1e-2}},
    ex.ergodic_seed, ex.ergodic_aggregate,
    ("c_closed_form", "phi_plus_closed_form", "sandwich_exact", "residual_final", "residual_decreasing"),
    ex.ergodic_validate,
))

_register(Experiment(
    "qualitative_2d",
    "joint flattening in 2D by a drift in one direction and noise in the other",
    {"hamiltonian": {"key": "abs_component", "axis": 1}, "dissipation": {"key": "zero"},
     "grid": {"dim": 2, "n": 128}, "path": _path(200.0, 1.0 / 16, "0..19"),
     "initial_condition": {"preset": "two_mode", "amplitude": 1.0},
     "tolerances": {"osc_final": 0.05, "retain_fraction": 0.5},
     "params": {"drift": {"key": "abs_component", "axis": 0}}},
    ex.q2d_seed, ex.q2d_aggregate, ("joint_flattening", "controls_retain_mode"),
))


def experiment_keys() -> list[str]:
    return sorted(REGISTRY)

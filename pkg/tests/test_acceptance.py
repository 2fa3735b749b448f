"""Acceptance criteria 1-15 at the stated tolerances and run-time budgets.

Each test prints (and records for the session summary) one line
``PASS|FAIL <n> <name>: ...``.
"""

from __future__ import annotations

import time
from functools import lru_cache

import pytest

from pathwise_hj.harness import monte_carlo

from .conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


@lru_cache(maxsize=None)
def _timed(key: str, overrides: tuple = ()):
    raw = {"experiment": key}
    for section, value in overrides:
        raw[section] = dict(value)
    t0 = time.perf_counter()
    report = monte_carlo(raw)
    return report, time.perf_counter() - t0


def run(key: str, **sections):
    frozen = tuple(sorted((k, tuple(sorted(v.items()))) for k, v in sections.items()))
    return _timed(key, frozen)


def record(number: int, name: str, verdicts, seconds: float, budget: float):
    ok_time = seconds <= budget
    passed = all(v.passed for v in verdicts) and ok_time
    detail = "; ".join(v.line() for v in verdicts)
    line = (f"{'PASS' if passed else 'FAIL'} {number:>2} {name}: {detail}; "
            f"runtime {seconds:.1f}s (budget {budget:.0f}s)")
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert passed, line


def test_01_monotone_path_exactness():
    rep, s = run("semigroup_lemmas")
    record(1, "monotone-path exactness", [rep.verdict("monotone_exact"), rep.verdict("split_vs_exact")], s, 10)


def test_02_monotonicity_sandwich():
    rep, s = run("semigroup_lemmas")
    record(2, "monotonicity sandwich", [rep.verdict("sandwich")], s, 30)


def test_03_entropy_monotonicity():
    smcf, s1 = run("qualitative_1d")
    power, s2 = run("qualitative_1d", hamiltonian={"key": "power", "q": 2.0},
                    dissipation={"key": "linear", "delta": 0.1})
    record(3, "entropy monotonicity", [smcf.verdict("entropy_monotone"), power.verdict("entropy_monotone")],
           s1 + s2, 120)


def test_04_crossing_lln():
    rep, s = run("lln_check")
    record(4, "crossing LLN", [rep.verdict("crossing_slope"), rep.verdict("crossing_stability")], s, 60)


def test_05_power_decay():
    verdicts, total = [], 0.0
    for q in (1.5, 2.0, 3.0):
        rep, s = run("q_decay", hamiltonian={"key": "power", "q": q})
        verdicts += [rep.verdict("power_exponent"), rep.verdict("amplitude_independence")]
        total += s
    record(5, "power decay", verdicts, total, 600)


def test_06_tv_halving():
    rep, s = run("q_decay", hamiltonian={"key": "power", "q": 1.0}, path={"seeds": "0..19"})
    record(6, "q=1 exponential decay", [rep.verdict("tv_halving")], s, 300)


GAMMA_PAIRS = (({"key": "graph_mcf"}, {"key": "arctan", "delta": 1.0}),
               ({"key": "quadratic"}, {"key": "linear", "delta": 0.5}))


def test_07_gamma_bound():
    verdicts, total = [], 0.0
    for ham, dis in GAMMA_PAIRS:
        rep, s = run("gamma_bound", hamiltonian=ham, dissipation=dis)
        verdicts.append(rep.verdict("gamma_bound"))
        total += s
    record(7, "Gamma bound", verdicts, total, 300)


def test_08_smcf_regularization():
    noisy, s1 = run("smcf_decay")
    still, s2 = run("smcf_decay", params={"noise": False})
    record(8, "SMCF regularization by noise",
           [noisy.verdict("tau_log_growth"), noisy.verdict("l2_rate"), still.verdict("half_time_linear")],
           s1 + s2, 1200)


def test_09_polynomial_decay():
    rep, s = run("polynomial_decay")
    record(9, "polynomial SPDE", [rep.verdict("stochastic_exponent"), rep.verdict("deterministic_exponent"),
                                  rep.verdict("faster_than_deterministic")], s, 900)


def test_10_dissipation_bound():
    rep, s = run("dissipation_pm")
    record(10, "porous-medium dissipation bound", [rep.verdict("constant_stable")], s, 300)


def test_11_degenerate_dissipation():
    rep, s = run("degenerate_diss")
    record(11, "degenerate dissipation", [rep.verdict("bounded_ratio")], s, 300)


def test_12_bessel_comparison():
    rep, s = run("quadratic_bessel")
    record(12, "Bessel comparison", [rep.verdict("bessel_bound")], s, 300)


def test_13_ergodic_pipeline():
    rep, s = run("ergodic_demo")
    record(13, "ergodic pipeline", list(rep.verdicts), s, 900)


def test_14_martingale_mean():
    rep, s = run("qualitative_1d", path={"seeds": "0..199"})
    record(14, "martingale mean", [rep.verdict("mean_martingale")], s, 300)


def test_15_qualitative_2d():
    rep, s = run("qualitative_2d")
    record(15, "2D qualitative", list(rep.verdicts), s, 1200)

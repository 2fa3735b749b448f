import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathwise_hj.diagnostics import (
    LAMBDA1,
    antiderivative,
    derivative,
    entropy_series,
    fit_decay,
    lambda1,
    lq_norm,
    osc,
    tv_norm,
)
from pathwise_hj.grid import GridFunction, sample
from pathwise_hj.hamiltonians import dissipation, hamiltonian
from pathwise_hj.paths import linear_path
from pathwise_hj.solver import SplitOptions, solve_split

profile_st = st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=64).map(np.array)


class TestNorms:
    def test_lq_of_cosine(self):
        u = sample(lambda x: np.cos(2 * np.pi * x), 64)
        assert lq_norm(u, 2) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
        assert lq_norm(u, math.inf) == 1.0

    def test_lq_rejects_small_q(self):
        with pytest.raises(ValueError):
            lq_norm(np.ones(4), 0.5)

    def test_lq_large_q_no_overflow(self):
        assert lq_norm(np.array([1e3, 1.0]), 400) == pytest.approx(1e3 * 0.5 ** (1 / 400))

    @given(profile_st, st.floats(1, 8), st.floats(1, 8))
    def test_lq_monotone_in_q(self, v, p, q):
        lo, hi = sorted((p, q))
        assert lq_norm(v, lo) <= lq_norm(v, hi) * (1 + 1e-12) + 1e-300

    @given(profile_st)
    def test_osc_bounded_by_half_tv(self, v):
        assert osc(v) <= 0.5 * tv_norm(v) + 1e-9

    def test_tv_example(self):
        assert tv_norm(np.array([0.0, 1.0, 0.0, 1.0])) == 4.0


class TestDerivative:
    @given(profile_st.filter(lambda v: v.size >= 2), st.floats(-5, 5))
    def test_round_trip(self, u, m):
        g = GridFunction(u)
        back = antiderivative(derivative(g), m).values
        np.testing.assert_allclose(back, u - u.mean() + m, atol=1e-9)

    def test_schemes_on_sine(self):
        n = 256
        u = sample(lambda x: np.sin(2 * np.pi * x), n)
        stag = derivative(u).values
        half = (np.arange(n) + 0.5) / n
        np.testing.assert_allclose(stag, 2 * np.pi * np.cos(2 * np.pi * half), atol=1e-3)
        cen = derivative(u, "centered").values
        np.testing.assert_allclose(cen, 2 * np.pi * np.cos(2 * np.pi * np.arange(n) / n), atol=1e-3)
        with pytest.raises(ValueError):
            derivative(u, "spectral")


class TestLambda1:
    def test_values(self):
        assert LAMBDA1 == pytest.approx(39.47841760435743)
        assert lambda1(4) == pytest.approx(32.0)
        assert lambda1(4096) == pytest.approx(LAMBDA1, rel=1e-6)


class TestFitDecay:
    def test_power_recovery(self):
        t = np.geomspace(1, 100, 30)
        f = fit_decay(t, 3.0 * t**-0.75)
        assert f.rate == pytest.approx(-0.75, abs=1e-12)
        assert f.r_squared == pytest.approx(1.0)
        np.testing.assert_allclose(f.predict([10.0]), 3.0 * 10**-0.75)

    def test_exponential_recovery(self):
        t = np.linspace(0, 2, 40)
        f = fit_decay(t, np.exp(-1.3 * t), model="exponential")
        assert f.rate == pytest.approx(-1.3, abs=1e-12)
        assert f.window[0] == pytest.approx(0.4)

    def test_transient_dropped(self):
        t = np.geomspace(1, 1e4, 41)
        y = np.where(t < 10, 1.0, 10.0 / t)
        assert fit_decay(t, y, transient=0.25).rate == pytest.approx(-1.0, abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_decay([1, 2, 3], [1, 1, 1])
        with pytest.raises(ValueError):
            fit_decay(np.arange(1, 11), -np.ones(10))
        with pytest.raises(ValueError):
            fit_decay(np.arange(1, 11), np.ones(10), model="log")

    def test_to_dict(self):
        d = fit_decay(np.arange(1, 21), np.arange(1, 21) ** -1.0).to_dict()
        assert set(d) == {"model", "rate", "intercept", "r_squared", "window", "n_points"}


class TestEntropySeries:
    def test_heat_energy_decay(self):
        u0 = sample(lambda x: np.cos(2 * np.pi * x) / (2 * np.pi), 128)
        path = linear_path(0.0, 0.1, 11, slope=0.0)
        tr = solve_split(u0, dissipation("linear"), hamiltonian("zero"), path, SplitOptions())
        es = entropy_series(tr, E=lambda p: 0.5 * p * p)
        assert es.values[0] == pytest.approx(0.25, rel=1e-3)
        ref = 0.25 * np.exp(-2 * lambda1(128) * es.times)
        np.testing.assert_allclose(es.values, ref, rtol=1e-2)

    def test_split_parts(self):
        u0 = sample(lambda x: 0.1 * np.cos(2 * np.pi * x), 64)
        tr = solve_split(u0, dissipation("zero"), hamiltonian("ohta_kawasaki"), linear_path(0, 0.1, 3))
        H = hamiltonian("ohta_kawasaki")
        es = entropy_series(tr, H=H)
        np.testing.assert_allclose(es.part1 - es.part2, es.values, atol=1e-12)

    def test_needs_integrand(self):
        with pytest.raises(ValueError):
            entropy_series(None)

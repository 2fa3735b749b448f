import math

import numpy as np
import pytest

from pathwise_hj.ergodic import (
    aubry_limits,
    ergodic_constant,
    evolve_along,
    forward_decomposition,
    hat,
    semigroup,
    semigroup_limit,
    support_extremes,
)
from pathwise_hj.grid import GridFunction, sample
from pathwise_hj.hamiltonians import hamiltonian
from pathwise_hj.paths import SamplePath, sample_brownian

N = 256
EIK = hamiltonian("eikonal_potential", coeff="sin2")
U0 = sample(lambda x: 0.5 * np.cos(2 * np.pi * x), N)


def _prim(y):
    # int_0^y sqrt(2) |sin(2 pi s)| ds on [0, 1]
    k = np.floor(2 * y)
    r = y - k / 2
    return math.sqrt(2) * (k / math.pi + (1 - np.cos(2 * math.pi * r)) / (2 * math.pi))


def _barrier(a, b):
    total = _prim(1.0)
    d = np.abs(_prim(a) - _prim(b))
    return np.minimum(d, total - d)


def _phi_plus_oracle(u0: GridFunction):
    x = u0.x
    out = np.full(x.size, np.inf)
    for z in (0.0, 0.5):
        reach = np.min(u0.values + _barrier(x, z))
        out = np.minimum(out, reach + _barrier(z, x))
    return out


@pytest.fixture(scope="module")
def pair():
    return aubry_limits(U0, EIK, 0.0)


class TestErgodicConstant:
    def test_homogeneous(self):
        assert ergodic_constant(hamiltonian("quadratic"), U0) == pytest.approx(0.0, abs=1e-9)
        assert ergodic_constant(hamiltonian("graph_mcf", raw=True), U0) == pytest.approx(-1.0, abs=1e-9)
        assert ergodic_constant(hamiltonian("graph_mcf", raw=True), GridFunction(np.zeros(8))) == -1.0

    @pytest.mark.parametrize("offset", [0.0, 0.3])
    def test_minimum_of_potential(self, offset):
        H = hamiltonian("eikonal_potential", coeff="sin2", coeff_offset=offset)
        assert ergodic_constant(H, U0) == pytest.approx(offset, abs=1e-3)

    def test_independent_of_initial_datum(self):
        data = [U0, sample(lambda x: np.sin(4 * np.pi * x), N), sample(lambda x: np.abs(x - 0.3), N)]
        cs = [ergodic_constant(EIK, u) for u in data]
        assert max(cs) - min(cs) < 1e-3

    def test_hat(self):
        assert hat(EIK, 0.25).offset == 0.25


class TestSemigroup:
    @pytest.mark.parametrize("t", [0.0625, 0.5, 2.0])
    def test_exact_sandwich(self, t):
        lower = semigroup(semigroup(U0, EIK, t, 1), EIK, t, -1).values
        upper = semigroup(semigroup(U0, EIK, t, -1), EIK, t, 1).values
        assert np.all(lower <= U0.values + 1e-13)
        assert np.all(U0.values <= upper + 1e-13)

    def test_constant_rises_by_potential_floor(self):
        out = semigroup(GridFunction(np.zeros(N)), EIK, 1.0, 1).values
        assert np.all(out >= -1e-12)

    def test_limit_reports_convergence(self):
        res = semigroup_limit(U0, EIK, 1, T_max=200.0, tol=1e-8)
        assert res.converged and res.last_change < 1e-8


class TestAubry:
    def test_phi_plus_closed_form(self, pair):
        assert np.max(np.abs(pair.phi_plus.values - _phi_plus_oracle(U0))) < 1e-2

    def test_pair_properties(self, pair):
        assert pair.converged
        assert pair.residuals["order"] <= 1e-12
        assert pair.residuals["fixed_plus"] < 1e-8
        assert pair.residuals["round_trip"] < 1e-6

    def test_fixed_at_aubry_nodes(self, pair):
        # phi+ and phi- coincide on the set where V is minimal
        for i in (0, N // 2):
            assert pair.phi_plus.values[i] == pytest.approx(pair.phi_minus.values[i], abs=1e-2)

    def test_support_extremes_ordered(self):
        low, high = support_extremes(U0, EIK, 0.0)
        assert np.all(low.values <= high.values + 1e-10)


class TestForward:
    def test_evolve_along_monotone_path(self):
        p = SamplePath([0.0, 1.0], [0.0, 1.0])
        a = evolve_along(U0, EIK, p, 0.0, 1.0)
        b = semigroup(U0, EIK, 1.0, 1)
        np.testing.assert_array_equal(a.values, b.values)
        with pytest.raises(ValueError):
            evolve_along(U0, EIK, p, 1.0, 0.5)

    def test_decomposition_small(self):
        n = 128
        u0 = sample(lambda x: 0.5 * np.cos(2 * np.pi * x), n)
        path = sample_brownian(0, 0.0, 40.0, 1 / 16)
        back = sample_brownian(1, 0.0, 40.0, 1 / 16).reversed()
        dec = forward_decomposition(u0, EIK, 0.0, path, backward=back)
        assert dec.stationary.sandwich_violation < 1e-12
        assert dec.residual[-1] <= dec.residual[0] + 1e-12
        assert dec.residual[-1] < 0.1

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pathwise_hj.hamiltonians import (
    DISSIPATION_KEYS,
    HAMILTONIAN_KEYS,
    CoefficientField,
    dc_check,
    dissipation,
    entropy_companion,
    evaluate,
    g_transform,
    gauge_shift,
    growth_check,
    hamiltonian,
    legendre_numeric,
    legendre_transform,
    power_conjugate_constant,
)


def _brute_conjugate(h, v, P=40.0, n=400_001):
    ps = np.linspace(-P, P, n)
    return float(np.max(ps * v - h(ps)))


class TestCatalog:
    def test_evaluate_examples(self):
        assert evaluate(hamiltonian("power", q=2), 0.0, 3.0) == pytest.approx(9.0)
        assert evaluate(hamiltonian("graph_mcf"), 0.0, 0.0) == 0.0
        assert evaluate(hamiltonian("graph_mcf", raw=True), 0.0, 0.0) == 1.0
        assert evaluate(hamiltonian("quadratic"), 0.0, -2.0) == pytest.approx(2.0)
        H = hamiltonian("eikonal_potential", coeff="sin2")
        assert evaluate(H, 0.25, 0.0) == pytest.approx(-1.0)
        assert evaluate(H, 0.0, 2.0) == pytest.approx(2.0)

    def test_range_check(self):
        with pytest.raises(ValueError):
            evaluate(hamiltonian("quadratic", p_max=10.0), 0.0, 11.0)

    def test_unknown_keys(self):
        with pytest.raises(ValueError):
            hamiltonian("cubic")
        with pytest.raises(ValueError):
            dissipation("cubic")
        with pytest.raises(ValueError):
            hamiltonian("power", q=0.5)
        with pytest.raises(ValueError):
            dissipation("porous_medium", m=2.5)

    def test_x_dependent_needs_x(self):
        with pytest.raises(ValueError):
            hamiltonian("eikonal_potential")(1.0)

    @pytest.mark.parametrize("key", [k for k in HAMILTONIAN_KEYS if k not in ("custom",)])
    def test_dp_matches_finite_difference(self, key):
        H = hamiltonian(key, coeff="cos_front", amp=0.5, coeff_offset=1.0) if key == "isotropic_front" \
            else hamiltonian(key)
        ps = np.array([-2.3, -0.7, 0.4, 1.9])
        x = 0.3 if not H.homogeneous else None
        h = 1e-6
        fd = (H(ps + h, x) - H(ps - h, x)) / (2 * h)
        np.testing.assert_allclose(H.dp(ps, x), fd, rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("key", ["power", "graph_mcf", "ohta_kawasaki", "quadratic"])
    def test_dpp_matches_finite_difference(self, key):
        H = hamiltonian(key, q=2.5)
        ps = np.array([-2.3, -0.7, 0.4, 1.9])
        h = 1e-4
        fd = (H.dp(ps + h) - H.dp(ps - h)) / (2 * h)
        np.testing.assert_allclose(H.dpp(ps), fd, rtol=1e-6)

    @pytest.mark.parametrize("key", [k for k in DISSIPATION_KEYS if k != "porous_medium"])
    def test_flux_derivative(self, key):
        F = dissipation(key, delta=0.7, alpha=1.5)
        ps = np.array([-1.7, -0.3, 0.6, 2.2])
        h = 1e-6
        np.testing.assert_allclose(F.dp(ps), (F(ps + h) - F(ps - h)) / (2 * h), rtol=1e-6, atol=1e-9)

    def test_coefficient_presets(self):
        assert CoefficientField("sin2")(0.25) == pytest.approx(1.0)
        assert CoefficientField("cos_unique", amp=2.0)(0.5) == pytest.approx(2.0)
        f = CoefficientField("sampled", samples=(0.0, 1.0))
        assert f(0.25) == pytest.approx(0.5)
        assert f(0.75) == pytest.approx(0.5)
        assert f(1.25) == pytest.approx(0.5)

    def test_coefficient_from_csv(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("# V\n0.0\n2.0\n")
        assert CoefficientField.from_csv(p)(0.5) == pytest.approx(2.0)


class TestSplit:
    @pytest.mark.parametrize("key", ["power", "graph_mcf", "ohta_kawasaki", "quadratic",
                                     "abs_component", "zero"])
    def test_dc_and_growth(self, key):
        H = hamiltonian(key, q=1.5)
        assert dc_check(H, p_range=20.0)
        assert growth_check(H, p_range=20.0)

    @settings(max_examples=50)
    @given(st.floats(-30, 30))
    def test_ohta_kawasaki_split_identity(self, p):
        H = hamiltonian("ohta_kawasaki")
        assert H.h1(p) - H.h2(p) == pytest.approx(float(H(p)), abs=1e-12)

    def test_ohta_kawasaki_not_convex(self):
        H = hamiltonian("ohta_kawasaki")
        assert not H.convex
        assert H.dpp(2.0) < 0


class TestGauge:
    def test_graph_mcf_shift(self):
        Hs, h0 = gauge_shift(hamiltonian("graph_mcf", raw=True))
        assert h0 == pytest.approx(1.0)
        assert Hs(0.0) == 0.0
        assert Hs(1.0) == pytest.approx(math.sqrt(2) - 1)

    def test_callable_shift(self):
        Hs, h0 = gauge_shift(lambda p: np.sqrt(1 + p * p))
        assert h0 == pytest.approx(1.0)
        assert Hs(0.0) == pytest.approx(0.0)

    def test_x_dependent_rejected(self):
        with pytest.raises(ValueError):
            gauge_shift(hamiltonian("eikonal_potential"))


class TestLegendre:
    def test_examples(self):
        assert legendre_transform(hamiltonian("quadratic"), 1.0) == pytest.approx(0.5)
        assert legendre_transform(hamiltonian("power", q=2), 2.0) == pytest.approx(1.0)
        assert legendre_transform(hamiltonian("graph_mcf"), 0.0) == 0.0
        assert math.isinf(legendre_transform(hamiltonian("graph_mcf"), 1.5))
        assert math.isinf(legendre_transform(hamiltonian("power", q=1), 1.01))

    def test_power_constant(self):
        assert power_conjugate_constant(2.0) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            power_conjugate_constant(1.0)

    @pytest.mark.parametrize("q", [1.25, 1.5, 2.0, 3.0])
    @pytest.mark.parametrize("v", [-1.3, 0.4, 2.0])
    def test_power_against_brute_force(self, q, v):
        H = hamiltonian("power", q=q)
        assert legendre_transform(H, v) == pytest.approx(_brute_conjugate(H, v), abs=1e-6)

    @pytest.mark.parametrize("v", [-0.9, -0.2, 0.5, 0.95])
    def test_graph_mcf_against_brute_force(self, v):
        H = hamiltonian("graph_mcf")
        ps = np.linspace(-400, 400, 4_000_001)
        assert legendre_transform(H, v) == pytest.approx(float(np.max(ps * v - H(ps))), abs=1e-4)

    def test_offset_shifts_conjugate(self):
        raw = hamiltonian("graph_mcf", raw=True)
        assert legendre_transform(raw, 0.5) == pytest.approx(legendre_transform(hamiltonian("graph_mcf"), 0.5) - 1)

    def test_numeric_matches_closed_form(self):
        assert legendre_numeric(lambda p: 0.5 * p * p, 1.5) == pytest.approx(1.125, abs=1e-10)
        assert math.isinf(legendre_numeric(np.abs, 2.0))

    def test_non_convex_rejected(self):
        with pytest.raises(ValueError):
            legendre_transform(hamiltonian("ohta_kawasaki"), 0.1)

    @settings(max_examples=30)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_fenchel_young(self, p, v):
        H = hamiltonian("power", q=1.5)
        assert float(H(p)) + legendre_transform(H, v) >= p * v - 1e-9


class TestGTransform:
    def test_examples(self):
        assert g_transform(dissipation("linear", delta=1.0), hamiltonian("quadratic"), 2.0) == pytest.approx(2.0)
        ref, _ = integrate.quad(lambda u: (1 + u * u) ** -1.25, 0.0, 1.0, epsabs=1e-13)
        got = g_transform(dissipation("arctan", delta=1.0), hamiltonian("graph_mcf"), 1.0)
        assert got == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("alpha,beta", [(1.5, 2.0), (3.0, 1.5), (2.0, 3.0)])
    def test_power_pair_against_quadrature(self, alpha, beta):
        F, H = dissipation("power", alpha=alpha), hamiltonian("power", q=beta)
        ref, _ = integrate.quad(
            lambda u: math.sqrt(alpha * u ** (alpha - 1) * beta * (beta - 1) * u ** (beta - 2)), 0.0, 1.7)
        assert g_transform(F, H, 1.7) == pytest.approx(ref, rel=1e-8)

    def test_linear_power_against_quadrature(self):
        F, H = dissipation("linear", delta=0.3), hamiltonian("power", q=3.0)
        ref, _ = integrate.quad(lambda u: math.sqrt(0.3 * 6 * u), 0.0, 2.0)
        assert g_transform(F, H, 2.0) == pytest.approx(ref, rel=1e-8)

    @given(st.floats(0, 5))
    def test_odd_and_monotone(self, r):
        F, H = dissipation("arctan", delta=0.5), hamiltonian("graph_mcf")
        g = g_transform(F, H, r)
        assert g_transform(F, H, -r) == pytest.approx(-g, abs=1e-12)
        assert g_transform(F, H, r + 0.1) >= g

    def test_range_check(self):
        with pytest.raises(ValueError):
            g_transform(dissipation("linear"), hamiltonian("quadratic", p_max=1.0), 2.0)


class TestEntropyCompanion:
    @pytest.mark.parametrize("key,kw", [("linear", {"delta": 0.5}), ("arctan", {"delta": 2.0}),
                                        ("power", {"alpha": 1.5}), ("porous_medium", {"m": 1.5}),
                                        ("bump", {"a": 0.5, "w": 1.2})])
    def test_second_derivative_identity(self, key, kw):
        F = dissipation(key, **kw)
        r = np.array([-1.1, -0.4, 0.3, 0.9, 1.6])
        h = 1e-3
        e2 = (entropy_companion(F, r + h) - 2 * entropy_companion(F, r) + entropy_companion(F, r - h)) / h**2
        np.testing.assert_allclose(e2 * F.dp(r), F.entropy_scale, rtol=1e-4)

    def test_normalization(self):
        for F in (dissipation("linear"), dissipation("power", alpha=1.5), dissipation("bump")):
            assert entropy_companion(F, 0.0) == 0.0

    def test_examples(self):
        assert entropy_companion(dissipation("linear", delta=0.5), 1.0) == pytest.approx(1.0)
        assert entropy_companion(dissipation("arctan", delta=1.0), 1.0) == pytest.approx(0.5 + 1 / 12)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            entropy_companion(dissipation("zero"), 1.0)
        with pytest.raises(ValueError):
            entropy_companion(dissipation("power", alpha=3.0), 1.0)

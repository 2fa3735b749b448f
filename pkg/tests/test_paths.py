import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathwise_hj.paths import (
    SamplePath,
    crossing_times,
    extrema_skeleton,
    gamma_functional,
    gamma_hitting_time,
    linear_path,
    monotone_runs,
    one_sided_runup,
    oscillation,
    sample_brownian,
    sample_two_sided_brownian,
)

# dyadic values, shifts and levels keep every comparison exact, so threshold
# ties behave identically before and after a transformation
values_st = st.lists(st.integers(-40, 40).map(lambda k: k / 8), min_size=2, max_size=30)
shift_st = st.integers(-24, 24).map(lambda k: k / 8)
level_st = st.integers(1, 16).map(lambda k: k / 8)


def _path(vals):
    return SamplePath(np.arange(len(vals), dtype=float) / max(len(vals) - 1, 1), np.asarray(vals))


def _gamma_brute(path: SamplePath, refine: int = 40) -> float:
    """Direct O(N^2) scan over a refined copy of the same piecewise-linear path."""
    ts = np.concatenate([np.linspace(a, b, refine, endpoint=False) for a, b in zip(path.times[:-1], path.times[1:])]
                        + [path.times[-1:]])
    vs = np.interp(ts, path.times, path.values)
    best = 0.0
    for i in range(ts.size - 1):
        area = 0.0
        for j in range(i, ts.size - 1):
            a, b = vs[j] - vs[i], vs[j + 1] - vs[i]
            h = ts[j + 1] - ts[j]
            if b < 0:
                frac = a / (a - b)
                area += 0.5 * a * frac * h
                break
            area += 0.5 * (a + b) * h
        best = max(best, area)
    return best


class TestSamplePath:
    def test_rejects_bad_knots(self):
        with pytest.raises(ValueError):
            SamplePath([0.0, 0.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            SamplePath([0.0], [0.0])
        with pytest.raises(ValueError):
            SamplePath([0.0, 1.0], [0.0, np.nan])

    def test_linear_interpolation_and_support(self):
        p = SamplePath([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
        assert p(0.5) == pytest.approx(1.0)
        assert p(1.5) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            p(2.5)

    def test_csv_round_trip(self, tmp_path):
        p = sample_brownian(3, 0.0, 1.0, 0.125)
        p.to_csv(tmp_path / "p.csv")
        q = SamplePath.from_csv(tmp_path / "p.csv")
        np.testing.assert_array_equal(p.times, q.times)
        np.testing.assert_array_equal(p.values, q.values)


class TestBrownian:
    def test_single_increment(self):
        p = sample_brownian(1, 0.0, 1.0, 1.0)
        assert p.n_knots == 2
        assert p.values[0] == 0.0

    def test_rejects_zero_dt(self):
        with pytest.raises(ValueError):
            sample_brownian(0, 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            sample_brownian(0, 1.0, 1.0, 0.1)

    def test_deterministic_per_seed(self):
        a = sample_brownian(7, 0.0, 2.0, 2.0**-6)
        b = sample_brownian(7, 0.0, 2.0, 2.0**-6)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, sample_brownian(8, 0.0, 2.0, 2.0**-6).values)

    def test_coarse_knots_independent_of_resolution(self):
        fine = sample_brownian(5, 0.0, 1.0, 2.0**-8)
        coarse = sample_brownian(5, 0.0, 1.0, 2.0**-4)
        np.testing.assert_allclose(fine(coarse.times), coarse.values, atol=1e-12)

    def test_second_moment(self):
        ends = np.array([sample_brownian(s, 0.0, 1.0, 2.0**-10).values[-1] for s in range(10_000)])
        assert np.mean(ends**2) == pytest.approx(1.0, rel=0.05)

    def test_two_sided_forward_half_matches(self):
        two = sample_two_sided_brownian(4, 3.0, 2.0, 2.0**-5)
        fwd = sample_brownian(4, 0.0, 2.0, 2.0**-5)
        assert two(0.0) == 0.0
        np.testing.assert_allclose(two(fwd.times), fwd.values, atol=1e-12)


class TestOscillationAndRunup:
    def test_examples(self):
        lin = linear_path(0.0, 1.0, 11)
        assert oscillation(lin, 0.0, 1.0) == pytest.approx(1.0)
        assert oscillation(linear_path(0.0, 1.0, 5, slope=0.0)) == 0.0
        saw = SamplePath([0, 0.25, 0.5, 0.75, 1.0], [0, 0.7, 0, 0.7, 0])
        assert oscillation(saw) == pytest.approx(0.7)

    def test_interpolated_endpoints(self):
        p = SamplePath([0.0, 1.0], [0.0, 1.0])
        assert oscillation(p, 0.25, 0.5) == pytest.approx(0.25)

    def test_runup_examples(self):
        assert one_sided_runup(linear_path(0.0, 1.0, 3)) == pytest.approx(1.0)
        assert one_sided_runup(linear_path(0.0, 1.0, 3, slope=-1.0)) == 0.0
        v = SamplePath([0.0, 1.0, 2.0], [0.0, -0.4, 0.3])
        assert one_sided_runup(v) == pytest.approx(0.7)

    @given(values_st, st.floats(0.1, 10))
    def test_oscillation_scales(self, vals, lam):
        p = _path(vals)
        assert oscillation(p.scaled(lam)) == pytest.approx(lam * oscillation(p), abs=1e-12)


class TestCrossings:
    def test_linear_example(self):
        taus, count = crossing_times(linear_path(0.0, 1.0, 9), 0.25)
        np.testing.assert_allclose(taus, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
        assert count == 3

    def test_constant_path(self):
        taus, count = crossing_times(linear_path(0.0, 1.0, 4, slope=0.0), 1.0)
        np.testing.assert_array_equal(taus, [0.0])
        assert count == 0

    def test_rejects_nonpositive_threshold(self):
        with pytest.raises(ValueError):
            crossing_times(linear_path(0.0, 1.0, 3), 0.0)

    @settings(max_examples=50)
    @given(values_st, shift_st, level_st)
    def test_shift_invariance(self, vals, k, C):
        p = _path(vals)
        a, na = crossing_times(p, C)
        b, nb = crossing_times(p.shifted(k), C)
        assert na == nb
        np.testing.assert_allclose(a, b, atol=1e-9)

    @settings(max_examples=50)
    @given(values_st, st.sampled_from([0.25, 0.5, 2.0, 4.0]), level_st)
    def test_scaling(self, vals, lam, C):
        # powers of two keep the rescaling exact in floating point
        p = _path(vals)
        assert crossing_times(p.scaled(lam), lam * C)[1] == crossing_times(p, C)[1]

    def test_rate_ratio_between_levels(self):
        # crossings at level 4 against level 1 over a Brownian ensemble
        c1 = np.mean([crossing_times(sample_brownian(s, 0.0, 100.0, 2.0**-6), 1.0)[1] for s in range(40)])
        c4 = np.mean([crossing_times(sample_brownian(s, 0.0, 100.0, 2.0**-6), 4.0)[1] for s in range(40)])
        # Brownian scaling gives a factor 1/16 between C = 1 and C = 4
        assert c4 / c1 == pytest.approx(1.0 / 16.0, rel=0.25)


class TestGamma:
    def test_examples(self):
        assert gamma_functional(linear_path(0.0, 1.0, 5), 0.0, 1.0) == pytest.approx(0.5)
        assert gamma_functional(linear_path(0.0, 1.0, 5, slope=-1.0)) == 0.0

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValueError):
            gamma_functional(linear_path(0.0, 1.0, 3), 0.8, 0.2)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            p = SamplePath(np.sort(rng.uniform(0, 1, 10)) + np.arange(10), rng.normal(size=10))
            assert gamma_functional(p) == pytest.approx(_gamma_brute(p), abs=1e-8)

    @settings(max_examples=50)
    @given(values_st, shift_st)
    def test_shift_invariance(self, vals, k):
        p = _path(vals)
        assert gamma_functional(p.shifted(k)) == pytest.approx(gamma_functional(p), abs=1e-9)

    @settings(max_examples=50)
    @given(values_st, st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_left_end(self, vals, a, b):
        p = _path(vals)
        lo, hi = sorted((a, b))
        assert gamma_functional(p, lo, 1.0) >= gamma_functional(p, hi, 1.0) - 1e-12

    def test_hitting_time(self):
        p = linear_path(0.0, 2.0, 9)
        assert gamma_hitting_time(p, 0.0, 0.5) == pytest.approx(1.0, abs=1e-9)
        assert math.isinf(gamma_hitting_time(linear_path(0.0, 1.0, 3), 0.0, 10.0))


class TestSkeleton:
    def test_monotone_path(self):
        sk = extrema_skeleton(linear_path(0.0, 1.0, 5))
        assert len(sk) == 1
        assert sk.kinds == ("max",)
        assert sk.times[0] == 1.0

    def test_two_records(self):
        p = SamplePath([0, 1, 2, 3], [0.0, 1.0, -2.0, 0.5])
        assert len(extrema_skeleton(p)) == 2

    def test_brownian_displacements_grow(self):
        sk = extrema_skeleton(sample_brownian(2, 0.0, 100.0, 2.0**-6))
        d = np.abs(sk.displacements)
        assert np.all(np.diff(d) >= -1e-12)
        for t, v, kind in zip(sk.times, sk.values, sk.kinds):
            run = sample_brownian(2, 0.0, 100.0, 2.0**-6).restrict(0.0, t)[1]
            assert v == pytest.approx(run.max() if kind == "max" else run.min())

    def test_monotone_runs(self):
        p = SamplePath([0, 1, 2, 3, 4], [0.0, 1.0, 1.0, 0.0, 2.0])
        bounds, inc = monotone_runs(p)
        np.testing.assert_array_equal(bounds, [0, 2, 3, 4])
        np.testing.assert_allclose(inc, [1.0, -1.0, 2.0])

import numpy as np
import pytest

from pathwise_hj.grid import GridFunction, sample


def test_validation():
    with pytest.raises(ValueError):
        GridFunction(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        GridFunction([1.0])
    with pytest.raises(ValueError):
        GridFunction([0.0, np.inf])


def test_read_only_copy():
    src = np.arange(4.0)
    g = GridFunction(src)
    src[0] = 9.0
    assert g.values[0] == 0.0
    with pytest.raises(ValueError):
        g.values[0] = 1.0


def test_geometry_and_stats():
    g = sample(lambda x: np.cos(2 * np.pi * x), 8)
    assert g.n == 8 and g.dim == 1 and g.dx == 0.125
    assert g.mean() == pytest.approx(0.0, abs=1e-15)
    assert g.osc() == pytest.approx(2.0)
    h = sample(lambda a, b: a + 0 * b, 4, dim=2)
    assert h.values.shape == (4, 4) and h.values[3, 0] == 0.75


def test_csv_round_trip(tmp_path):
    for g in (sample(np.sin, 16), sample(lambda a, b: a * b, 8, dim=2)):
        g.to_csv(tmp_path / "g.csv")
        np.testing.assert_array_equal(GridFunction.from_csv(tmp_path / "g.csv").values, g.values)

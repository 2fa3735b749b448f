"""Periodic grid functions on the unit torus."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = ["GridFunction", "sample"]


@dataclass(frozen=True)
class GridFunction:
    """Values of a periodic field at nodes ``i / n`` (per axis) of the unit torus.

    Parameters
    ----------
    values : array_like
        Shape ``(n,)`` or ``(n, n)``; copied and made read-only.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise ValueError("grid functions are 1D or 2D")
        if v.ndim == 2 and v.shape[0] != v.shape[1]:
            raise ValueError("2D grids must be square")
        if v.shape[0] < 2:
            raise ValueError("grid needs at least two points per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    def mean(self) -> float:
        return float(self.values.mean())

    def osc(self) -> float:
        return float(self.values.max() - self.values.min())

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(values)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.values + other.values)
        return GridFunction(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.values - other.values)
        return GridFunction(self.values - other)

    def to_csv(self, path: str | Path) -> None:
        """Single column of values (row-major for 2D) with an ``n``/``dim`` header comment."""
        np.savetxt(path, self.values.reshape(-1), header=f"n={self.n} dim={self.dim}",
                   comments="# ", fmt="%.17g")

    @classmethod
    def from_csv(cls, path: str | Path) -> "GridFunction":
        with open(path) as fh:
            header = fh.readline().lstrip("#").split()
        meta = dict(item.split("=") for item in header)
        n, dim = int(meta["n"]), int(meta["dim"])
        vals = np.loadtxt(path, comments="#", ndmin=1)
        return cls(vals.reshape((n,) * dim))


def sample(f: Callable, n: int, dim: int = 1) -> GridFunction:
    """Sample ``f(x)`` (1D) or ``f(x1, x2)`` (2D, ``ij`` indexing) on the torus grid."""
    x = np.arange(n) / n
    if dim == 1:
        return GridFunction(f(x))
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    return GridFunction(f(x1, x2))

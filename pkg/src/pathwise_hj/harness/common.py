"""Builders shared by the registered experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..grid import GridFunction
from ..hamiltonians import DissipationSpec, HamiltonianSpec, dissipation, hamiltonian
from ..paths import SamplePath, linear_path, sample_brownian

__all__ = ["Aggregate", "build_hamiltonian", "build_dissipation", "initial_profile", "brownian",
           "still_path", "parse_catalog_entry", "median_series", "finite_or_nan", "LATE"]

LATE = 10**9  # record_every value that keeps only the first and final states


@dataclass
class Aggregate:
    aggregates: dict = field(default_factory=dict)
    fits: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    series: list = field(default_factory=list)


def build_hamiltonian(section: dict) -> HamiltonianSpec:
    d = dict(section)
    key = d.pop("key")
    return hamiltonian(key, **d)


def build_dissipation(section: dict) -> DissipationSpec:
    d = dict(section) if section else {"key": "zero"}
    key = d.pop("key", "zero")
    return dissipation(key, **d)


def parse_catalog_entry(entry: str) -> HamiltonianSpec:
    """``"power:1.5"`` -> ``hamiltonian("power", q=1.5)``; other keys take no argument."""
    key, _, arg = entry.partition(":")
    if arg:
        return hamiltonian(key, q=float(arg))
    return hamiltonian(key)


def initial_profile(preset: str, amplitude: float, n: int, dim: int = 1) -> GridFunction:
    """Preset initial data with unit sup norm, scaled by ``amplitude``.

    ``cos``/``sin``: single mode; ``mix``: ``cos(2 pi x) + 0.5 sin(4 pi x)``
    normalized to sup 1; ``skewed``: ``cos(2 pi x) + 0.15 sin(4 pi x)``
    normalized likewise; ``plateau``: a flat-topped
    wave ``tanh(3 cos(2 pi x)) / tanh(3)``; ``two_mode`` (2D):
    ``(cos(2 pi x1) + cos(2 pi x2)) / 2``.
    """
    x = np.arange(n) / n
    if dim == 2:
        if preset != "two_mode":
            raise ValueError("2D grids use the two_mode preset")
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        return GridFunction(amplitude * 0.5 * (np.cos(2 * np.pi * X1) + np.cos(2 * np.pi * X2)))
    if preset == "cos":
        v = np.cos(2 * np.pi * x)
    elif preset == "sin":
        v = np.sin(2 * np.pi * x)
    elif preset == "mix":
        v = np.cos(2 * np.pi * x) + 0.5 * np.sin(4 * np.pi * x)
        fine = np.linspace(0.0, 1.0, 8193)
        v = v / np.max(np.abs(np.cos(2 * np.pi * fine) + 0.5 * np.sin(4 * np.pi * fine)))
    elif preset == "skewed":
        v = np.cos(2 * np.pi * x) + 0.15 * np.sin(4 * np.pi * x)
        fine = np.linspace(0.0, 1.0, 8193)
        v = v / np.max(np.abs(np.cos(2 * np.pi * fine) + 0.15 * np.sin(4 * np.pi * fine)))
    elif preset == "plateau":
        v = np.tanh(3.0 * np.cos(2 * np.pi * x)) / math.tanh(3.0)
    else:
        raise ValueError(f"preset {preset!r} is not a 1D profile")
    return GridFunction(amplitude * v)


def brownian(seed: int, T: float, dt: float) -> SamplePath:
    return sample_brownian(seed, 0.0, T, dt)


def still_path(T: float, dt: float) -> SamplePath:
    """Constant driver on ``[0, T]`` (noise switched off)."""
    return linear_path(0.0, T, int(round(T / dt)) + 1, slope=0.0)


def median_series(rows: list) -> np.ndarray:
    return np.median(np.vstack([np.asarray(r, dtype=float) for r in rows]), axis=0)


def finite_or_nan(x) -> float:
    x = float(x)
    return x if math.isfinite(x) else math.nan

"""Report value objects and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

__all__ = ["Verdict", "Series", "SeedResult", "ExperimentReport", "to_jsonable"]


def to_jsonable(obj: Any):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass(frozen=True)
class Verdict:
    """Outcome of one registered criterion."""

    criterion: str
    passed: bool
    measured: Any
    expected: Any
    tolerance: Any
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.criterion}: measured={_fmt(self.measured)} "
                f"expected={_fmt(self.expected)} tol={_fmt(self.tolerance)}"
                + (f" ({self.note})" if self.note else ""))

    def to_dict(self) -> dict:
        return to_jsonable({"criterion": self.criterion, "passed": self.passed,
                            "measured": self.measured, "expected": self.expected,
                            "tolerance": self.tolerance, "note": self.note})


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


@dataclass
class Series:
    """One plot: shared ``x`` and one or more named ``y`` columns."""

    name: str
    x: np.ndarray
    ys: dict
    xlabel: str = "t"
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    fit: dict | None = None

    def __len__(self) -> int:
        return int(np.asarray(self.x).size)


@dataclass
class SeedResult:
    """Per-seed output: JSON-able ``summary`` plus arrays kept for aggregation."""

    seed: int
    summary: dict
    data: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    """Aggregated outcome of an experiment over a seed set."""

    experiment: str
    config: dict
    seeds: list
    per_seed: list
    aggregates: dict
    fits: list
    verdicts: list
    series: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    partial: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)

    def verdict(self, criterion: str) -> Verdict:
        for v in self.verdicts:
            if v.criterion == criterion:
                return v
        raise KeyError(criterion)

    def to_dict(self) -> dict:
        return to_jsonable({
            "experiment": self.experiment,
            "config": self.config,
            "seeds": self.seeds,
            "per_seed": self.per_seed,
            "aggregates": self.aggregates,
            "fits": self.fits,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "failures": self.failures,
            "partial": self.partial,
            "passed": self.passed,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, out_dir: str | Path, plots: bool = True) -> Path:
        """Write ``report.json`` plus series CSVs (and SVGs) into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json() + "\n")
        if plots:
            from .plots import emit_plots

            emit_plots(self, out)
        return out

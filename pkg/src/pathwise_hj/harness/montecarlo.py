"""Seed fan-out, deterministic merge and report assembly."""

from __future__ import annotations

import json
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ExperimentConfig, load_config
from .registry import REGISTRY
from .report import ExperimentReport, SeedResult, Verdict, to_jsonable

__all__ = ["run_experiment", "monte_carlo", "run_seed_safely"]


def run_seed_safely(cfg_json: str, seed: int) -> tuple[int, SeedResult | None, str | None]:
    """Run one seed; failures are returned as a message instead of raised."""
    from .config import resolve_config

    cfg = resolve_config(json.loads(cfg_json))
    try:
        return seed, REGISTRY[cfg.experiment].run_seed(cfg, seed), None
    except Exception as exc:  # noqa: BLE001 - per-seed failures are recorded, not fatal
        return seed, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"


def monte_carlo(config, seeds=None, *, workers: int = 1, out_dir: str | Path | None = None,
                plots: bool = True) -> ExperimentReport:
    """Run ``config`` over a seed set and merge the per-seed results.

    Parameters
    ----------
    config : ExperimentConfig, mapping, str or Path
        Resolved config, raw mapping, registry key or JSON file.
    seeds : int, str or sequence, optional
        Overrides the config's seed set (``"a..b"`` ranges allowed).
    workers : int
        Size of the process pool; ``1`` runs in-process.
    out_dir : path, optional
        If given (or set in the config), ``report.json``, ``timing.json`` and
        the plot files are written there.

    Returns
    -------
    ExperimentReport
        Results are merged in seed order, so the report does not depend
        on completion order.  Seeds that raised are listed in ``failures``
        and the report is flagged ``partial``.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    if seeds is not None:
        cfg = cfg.with_overrides(seeds=seeds)
    exp = REGISTRY[cfg.experiment]
    cfg_json = cfg.to_json()
    t0 = time.perf_counter()
    if workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_seed_safely, [cfg_json] * len(cfg.seeds), cfg.seeds))
    else:
        outcomes = [run_seed_safely(cfg_json, s) for s in cfg.seeds]
    outcomes.sort(key=lambda o: o[0])
    results = [r for _, r, err in outcomes if r is not None]
    failures = [{"seed": s, "error": err.splitlines()[0]} for s, _, err in outcomes if err is not None]
    criteria = exp.criteria_for(cfg)
    if results:
        agg = exp.aggregate(cfg, results)
        verdicts = list(agg.verdicts)
    else:
        agg = None
        verdicts = []
    names = [v.criterion for v in verdicts]
    for c in criteria:
        if c not in names:
            verdicts.append(Verdict(c, False, "missing", None, None, note="no verdict produced"))
    extra = [n for n in names if n not in criteria]
    if extra or len(set(names)) != len(names):
        raise RuntimeError(f"{cfg.experiment}: unexpected or duplicate verdicts {names}")
    verdicts.sort(key=lambda v: criteria.index(v.criterion))
    report = ExperimentReport(
        experiment=cfg.experiment, config=cfg.to_dict(), seeds=list(cfg.seeds),
        per_seed=[{"seed": r.seed, **r.summary} for r in results],
        aggregates=agg.aggregates if agg else {}, fits=agg.fits if agg else [], verdicts=verdicts,
        series=agg.series if agg else [], failures=failures, partial=bool(failures),
    )
    elapsed = time.perf_counter() - t0
    target = out_dir if out_dir is not None else cfg.output_dir
    if target is not None:
        out = report.write(target, plots=plots)
        (Path(out) / "timing.json").write_text(json.dumps(to_jsonable(
            {"seconds": elapsed, "workers": workers}), indent=2) + "\n")
    return report


def run_experiment(config, *, out_dir: str | Path | None = None, plots: bool = True,
                   workers: int = 1) -> ExperimentReport:
    """Run ``config`` over the seed set it declares; see :func:`monte_carlo`."""
    return monte_carlo(config, None, workers=workers, out_dir=out_dir, plots=plots)

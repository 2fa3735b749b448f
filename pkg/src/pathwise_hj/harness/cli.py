"""Command line interface: ``pathwise-hj``.

Subcommands
-----------
run CONFIG               run an experiment (JSON file or registry key)
mc CONFIG --seeds a..b   Monte Carlo over a seed range
paths-stats              sanity statistics of the Brownian path sampler
list-experiments         registry keys and their targets

Exit status is 0 iff every verdict passes.  The default output directory
is taken from ``PATHWISE_HJ_OUT`` (fallback ``./pathwise_hj_out``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from ..paths import sample_brownian
from .config import ConfigError, load_config
from .montecarlo import monte_carlo
from .registry import REGISTRY
from .report import Series, to_jsonable

ENV_OUT = "PATHWISE_HJ_OUT"


def _default_out() -> str:
    return os.environ.get(ENV_OUT, "pathwise_hj_out")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathwise-hj", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./pathwise_hj_out)")
    common.add_argument("--seed", type=int, help="run a single seed")
    common.add_argument("--grid", type=int, help="override the grid size n")
    common.add_argument("--quiet", action="store_true", help="print nothing but errors")
    common.add_argument("--workers", type=int, default=1, help="seed-level process pool size")
    common.add_argument("--no-plots", action="store_true", help="skip SVG output")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run an experiment")
    r.add_argument("config", help="JSON config file or registry key")
    m = sub.add_parser("mc", parents=[common], help="Monte Carlo over a seed range")
    m.add_argument("config", help="JSON config file or registry key")
    m.add_argument("--seeds", required=True, help="seed range a..b (inclusive) or comma list")
    s = sub.add_parser("paths-stats", parents=[common], help="Brownian sampler statistics")
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=2.0**-8)
    sub.add_parser("list-experiments", help="list registry keys")
    return p


def _print(args, *lines: str) -> None:
    if not getattr(args, "quiet", False):
        for line in lines:
            print(line)


def _run(args, seeds) -> int:
    cfg = load_config(args.config)
    if args.grid is not None:
        cfg = cfg.with_overrides(n=args.grid)
    if args.seed is not None:
        seeds = [args.seed]
    out = args.out or cfg.output_dir or str(Path(_default_out()) / cfg.experiment)
    report = monte_carlo(cfg, seeds, workers=args.workers, out_dir=out, plots=not args.no_plots)
    _print(args, f"{cfg.experiment}: {len(report.seeds)} seed(s), report in {out}",
           *(v.line() for v in report.verdicts))
    if report.failures:
        _print(args, f"{len(report.failures)} seed(s) failed; report is partial")
    return 0 if report.passed and not report.partial else 1


def _seed_spec(text: str):
    return [int(s) for s in text.split(",")] if "," in text else text


def _paths_stats(args) -> int:
    base = args.seed or 0
    ends = np.array([sample_brownian(base + k, 0.0, args.T, args.dt).values[-1]
                     for k in range(args.samples)])
    z = ends / np.sqrt(args.T)
    ks = stats.kstest(z, "norm")
    qv = float(np.mean([np.sum(np.diff(sample_brownian(base + k, 0.0, args.T, args.dt).values) ** 2)
                        for k in range(min(args.samples, 50))]))
    summary = {"samples": args.samples, "T": args.T, "dt": args.dt, "mean": float(z.mean()),
               "variance": float(z.var(ddof=1)), "ks_statistic": float(ks.statistic),
               "ks_pvalue": float(ks.pvalue), "quadratic_variation_over_T": qv / args.T}
    out = Path(args.out or Path(_default_out()) / "paths_stats")
    out.mkdir(parents=True, exist_ok=True)
    (out / "paths_stats.json").write_text(json.dumps(to_jsonable(summary), indent=2, sort_keys=True) + "\n")
    from .plots import plot_series, write_series_csv

    path = sample_brownian(base, 0.0, args.T, args.dt)
    s = Series("sample_path", path.times, {f"seed {base}": path.values}, ylabel="B(t)")
    write_series_csv(s, out / "sample_path.csv")
    if not args.no_plots:
        plot_series(s, out / "sample_path.svg")
    _print(args, *(f"{k}: {v}" for k, v in sorted(summary.items())))
    ok = ks.pvalue > 1e-3 and abs(summary["variance"] - 1.0) < 0.2
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for key in sorted(REGISTRY):
                print(f"{key}: {REGISTRY[key].target}")
            return 0
        if args.command == "paths-stats":
            return _paths_stats(args)
        if args.command == "run":
            return _run(args, None)
        return _run(args, _seed_spec(args.seeds))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Experiment harness: configuration, registry, Monte Carlo runs, reports and plots."""

from .config import ConfigError, ExperimentConfig, load_config, parse_seeds, resolve_config
from .montecarlo import monte_carlo, run_experiment
from .plots import emit_plots
from .registry import REGISTRY, Experiment, experiment_keys
from .report import ExperimentReport, SeedResult, Series, Verdict

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_seeds", "resolve_config",
           "monte_carlo", "run_experiment", "emit_plots", "REGISTRY", "Experiment", "experiment_keys",
           "ExperimentReport", "SeedResult", "Series", "Verdict"]

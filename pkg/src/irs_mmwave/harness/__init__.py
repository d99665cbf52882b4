"""Seeded Monte Carlo experiments, result files and the command-line interface."""

from .config import EXPERIMENTS, ConfigError, SystemConfig
from .experiment import run_experiment, run_named, run_trial
from .results import ExperimentResult, emit_results, read_results

__all__ = ["SystemConfig", "ConfigError", "EXPERIMENTS", "run_trial", "run_experiment", "run_named",
           "ExperimentResult", "emit_results", "read_results"]

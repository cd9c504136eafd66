"""Experiment harness: JSON configs in, traces and summary tables out."""

from .config import ConfigError, ExperimentConfig, ProblemSpec, SolverSpec, load_config, parse_config, validate_document
from .report import SummaryRow, emit_summary_table, emit_trace_csv, read_trace_csv
from .runner import ExperimentError, build_problem, run_experiment, solver_config

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentError",
    "ProblemSpec",
    "SolverSpec",
    "SummaryRow",
    "build_problem",
    "emit_summary_table",
    "emit_trace_csv",
    "load_config",
    "parse_config",
    "read_trace_csv",
    "run_experiment",
    "solver_config",
    "validate_document",
]

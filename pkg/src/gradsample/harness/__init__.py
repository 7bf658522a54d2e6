"""Experiment engine, file formats and diagnostics."""

from gradsample.harness.config import ConfigError, ExperimentConfig, MethodSpec, load_config
from gradsample.harness.diagnostics import (
    Dispersion,
    TimingRow,
    probability_dispersion,
    timing_benchmark,
)
from gradsample.harness.experiment import (
    ExperimentReport,
    ResultRecord,
    build_dataset,
    empirical_mse,
    run_experiment,
)
from gradsample.harness.io import (
    REPORT_SCHEMA,
    emit_report,
    load_csv,
    read_report_csv,
    write_csv,
)

__all__ = [
    "ConfigError", "Dispersion", "ExperimentConfig", "ExperimentReport", "MethodSpec",
    "REPORT_SCHEMA", "ResultRecord", "TimingRow", "build_dataset", "emit_report",
    "empirical_mse", "load_config", "load_csv", "probability_dispersion",
    "read_report_csv", "run_experiment", "timing_benchmark", "write_csv",
]

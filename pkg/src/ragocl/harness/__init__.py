"""End-to-end sweep, reports, REST service and CLI."""

from ragocl.harness.config import ExperimentConfig, load_config
from ragocl.harness.pipeline import Pipeline
from ragocl.harness.report import export_boxplot_data, render_report
from ragocl.harness.sweep import SweepResult, run_sweep

__all__ = [
    "ExperimentConfig",
    "Pipeline",
    "SweepResult",
    "export_boxplot_data",
    "load_config",
    "render_report",
    "run_sweep",
]

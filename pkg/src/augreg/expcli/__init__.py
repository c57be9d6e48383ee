"""Experiment harness: presets, sweeps, config parsing, CSV and SVG output."""
from .config import ExperimentConfig, build_config, load_config, parse_text
from .plot import PlotSpec, emit_plot, render_svg
from .presets import PRESETS, run_preset
from .sweep import run_sweep
from .table import ResultsTable, emit_csv, read_csv

__all__ = [
    "ExperimentConfig", "PRESETS", "PlotSpec", "ResultsTable", "build_config", "emit_csv", "emit_plot",
    "load_config", "parse_text", "read_csv", "render_svg", "run_preset", "run_sweep",
]
